import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ac3di.errors import SizeError
from ac3di.hadamard import (MaskedSensingPlan, debias, dense_hadamard, fwht, iht,
                            next_power_of_two, pattern_row)


def kron_oracle(n):
    """Hand-rolled Sylvester block construction, independent of np.kron."""
    h = [[1]]
    for _ in range(n):
        h = [row + row for row in h] + [row + [-v for v in row] for row in h]
    return np.array(h)


def test_dense_small_orders():
    assert dense_hadamard(0).tolist() == [[1]]
    assert dense_hadamard(1).tolist() == [[1, 1], [1, -1]]
    assert dense_hadamard(2).tolist() == [
        [1, 1, 1, 1],
        [1, -1, 1, -1],
        [1, 1, -1, -1],
        [1, -1, -1, 1],
    ]


@pytest.mark.parametrize("n", range(9))
def test_dense_orthogonal_and_matches_block_oracle(n):
    h = dense_hadamard(n)
    assert np.array_equal(h @ h.T, (2 ** n) * np.eye(2 ** n, dtype=np.int64))
    assert np.array_equal(h, kron_oracle(n))


@pytest.mark.parametrize("bad", [-1, 13])
def test_dense_order_range(bad):
    with pytest.raises(SizeError):
        dense_hadamard(bad)


def test_fwht_examples():
    assert fwht([1, 0, 0, 0]).tolist() == [1, 1, 1, 1]
    assert fwht(np.full(8, 2.5)).tolist() == [20, 0, 0, 0, 0, 0, 0, 0]
    rng = np.random.default_rng(1)
    v = rng.normal(size=16)
    ref = dense_hadamard(4) @ v
    assert np.max(np.abs(fwht(v) - ref)) <= 1e-12 * np.max(np.abs(ref))


def test_fwht_does_not_mutate_input():
    v = np.arange(8.0)
    fwht(v)
    assert v.tolist() == list(range(8))


@pytest.mark.parametrize("n", [0, 3, 6, 12])
def test_fwht_rejects_non_power_of_two(n):
    with pytest.raises(SizeError):
        fwht(np.ones(n))


def test_iht_examples():
    rng = np.random.default_rng(2)
    x = rng.normal(size=64)
    assert np.allclose(iht(fwht(x)), x, atol=1e-12, rtol=0)
    assert iht(np.ones(4)).tolist() == [1, 0, 0, 0]
    v = rng.normal(size=8)
    assert np.allclose(iht(v), dense_hadamard(3) @ v / 8, atol=1e-13, rtol=0)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(0, 10), seed=st.integers(0, 2 ** 32 - 1))
def test_fwht_matches_dense(n, seed):
    v = np.random.default_rng(seed).normal(size=2 ** n)
    ref = dense_hadamard(n) @ v
    assert np.max(np.abs(fwht(v) - ref)) <= 1e-10 * max(np.max(np.abs(ref)), 1e-300)


@settings(max_examples=15, deadline=None)
@given(n=st.integers(0, 18), seed=st.integers(0, 2 ** 32 - 1))
def test_iht_inverts_fwht(n, seed):
    x = np.random.default_rng(seed).normal(size=2 ** n)
    assert np.max(np.abs(iht(fwht(x)) - x)) <= 1e-10 * np.max(np.abs(x))


def test_fwht_deterministic():
    x = np.random.default_rng(3).normal(size=4096)
    assert fwht(x).tobytes() == fwht(x.copy()).tobytes()


def test_plan_fields():
    plan = MaskedSensingPlan(np.array([0, 1, 1, 0, 1]))
    assert plan.n_pixels == 5
    assert plan.n_marked == 3
    assert plan.order == 4
    assert plan.col_of_pixel.tolist() == [-1, 0, 1, -1, 2]
    with pytest.raises(SizeError):
        MaskedSensingPlan(np.zeros(4))


def test_pattern_row_examples():
    full = MaskedSensingPlan(np.ones(4))
    assert pattern_row(full, 1).tolist() == [1, 0, 1, 0]
    partial = MaskedSensingPlan(np.array([0, 1, 1, 0]))
    assert partial.order == 2
    assert pattern_row(partial, 1).tolist() == [0, 1, 0, 0]
    assert pattern_row(partial, 0).tolist() == [0, 1, 1, 0]
    with pytest.raises(IndexError):
        pattern_row(partial, 2)


@settings(max_examples=40, deadline=None)
@given(bits=st.lists(st.booleans(), min_size=1, max_size=80).filter(any))
def test_pattern_rows_match_zero_shifted_dense(bits):
    mark = np.array(bits)
    plan = MaskedSensingPlan(mark)
    L, M = plan.order, plan.n_marked
    assert L == next_power_of_two(M) and L >= M
    h01 = (dense_hadamard(L.bit_length() - 1) + 1) // 2
    for m in range(L):
        row = pattern_row(plan, m)
        assert np.array_equal(row[~mark], np.zeros((~mark).sum()))
        assert np.array_equal(row[mark], h01[m, :M])
    assert pattern_row(plan, 0).sum() == M


def test_debias_examples():
    s = 12.0
    assert debias([s, s / 2, s / 2, s / 2]).tolist() == [s, 0, 0, 0]
    assert debias(np.zeros(4)).tolist() == [0, 0, 0, 0]
    rng = np.random.default_rng(4)
    x = rng.uniform(size=8)
    h = dense_hadamard(3)
    y_raw = ((h + 1) / 2) @ x
    assert np.allclose(debias(y_raw), h @ x, atol=1e-13, rtol=0)
    with pytest.raises(SizeError):
        debias([])


@settings(max_examples=40, deadline=None)
@given(bits=st.lists(st.booleans(), min_size=1, max_size=200).filter(any),
       seed=st.integers(0, 2 ** 32 - 1))
def test_closed_loop_recovers_marked_values(bits, seed):
    mark = np.array(bits)
    plan = MaskedSensingPlan(mark)
    x = np.random.default_rng(seed).uniform(0, 10, size=mark.size)
    y_raw = np.array([pattern_row(plan, m) @ x for m in range(plan.order)])
    rec = iht(debias(y_raw))
    assert np.allclose(rec[: plan.n_marked], x[mark], atol=1e-9, rtol=0)
    assert np.all(np.abs(rec[plan.n_marked:]) <= 1e-9)
    assert np.allclose(plan.scatter(rec), np.where(mark, x, 0), atol=1e-9, rtol=0)
