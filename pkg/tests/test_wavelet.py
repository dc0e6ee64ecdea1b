import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ac3di.errors import BudgetError, SizeError
from ac3di.wavelet import (BudgetPolicy, HaarBands, ThresholdPolicy, avg_pool2, haar_analyze,
                           haar_synthesize, predict_mark, upsample2)

finite = st.floats(-100, 100, allow_nan=False)


def square(side):
    return arrays(np.float64, (side, side), elements=finite)


def test_constant_block():
    b = haar_analyze(np.full((2, 2), 1.5))
    assert b.ll.tolist() == [[3.0]]
    assert b.lh.tolist() == b.hl.tolist() == b.hh.tolist() == [[0.0]]


def test_diagonal_block():
    b = haar_analyze(np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert (b.ll.item(), b.lh.item(), b.hl.item(), b.hh.item()) == (1.0, 0.0, 0.0, 1.0)


def test_odd_side_rejected():
    with pytest.raises(SizeError):
        haar_analyze(np.zeros((3, 3)))
    with pytest.raises(SizeError):
        haar_analyze(np.zeros((1, 1)))


@settings(max_examples=50, deadline=None)
@given(img=st.sampled_from([2, 4, 8]).flatmap(square))
def test_energy_and_inverse(img):
    b = haar_analyze(img)
    energy = sum(float(np.sum(x ** 2)) for x in (b.ll, b.lh, b.hl, b.hh))
    total = float(np.sum(img ** 2))
    assert abs(energy - total) <= 1e-9 * max(total, 1e-300)
    assert np.allclose(haar_synthesize(b), img, atol=1e-10, rtol=0)


def test_energy_random_8x8():
    img = np.random.default_rng(0).normal(size=(8, 8))
    b = haar_analyze(img)
    energy = sum(np.sum(x ** 2) for x in (b.ll, b.lh, b.hl, b.hh))
    assert abs(energy - np.sum(img ** 2)) <= 1e-12 * np.sum(img ** 2)


def test_upsample():
    assert upsample2([[3]]).tolist() == [[3, 3], [3, 3]]
    assert upsample2(np.eye(2)).tolist() == [
        [1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]]
    x = np.random.default_rng(1).normal(size=(4, 8))
    assert np.array_equal(avg_pool2(upsample2(x)), x)


def bands_with(side, **nonzero):
    z = {k: np.zeros((side, side)) for k in ("ll", "lh", "hl", "hh")}
    for k, (pos, v) in nonzero.items():
        z[k][pos] = v
    return HaarBands(**z)


def test_predict_mark_examples():
    b = bands_with(4, ll=((1, 1), 50.0))
    assert predict_mark(b, ThresholdPolicy(0.1)).n_marked == 0
    everything = predict_mark(b, ThresholdPolicy(0.0))
    assert everything.n_marked == 64 and everything.side == 8
    one = predict_mark(bands_with(4, hh=((0, 0), 0.3)), ThresholdPolicy(0.2))
    assert one.n_marked == 4
    assert set(zip(*np.nonzero(one.as_image()))) == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_threshold_is_inclusive():
    b = bands_with(2, lh=((1, 0), 0.05))
    assert predict_mark(b, ThresholdPolicy(0.05)).n_marked == 4


def magnitude_oracle(bands, threshold):
    """Upsample the detail magnitude field and threshold pixelwise."""
    d = np.max(np.abs(np.stack([bands.lh, bands.hl, bands.hh])), axis=0)
    return (upsample2(d) >= threshold).ravel()


@settings(max_examples=50, deadline=None)
@given(lh=square(4), hl=square(4), hh=square(4), t=st.floats(0, 120))
def test_threshold_mark_oracle_and_band_symmetry(lh, hl, hh, t):
    ll = np.zeros((4, 4))
    pol = ThresholdPolicy(t)
    ref = predict_mark(HaarBands(ll, lh, hl, hh), pol).bits
    assert np.array_equal(ref, magnitude_oracle(HaarBands(ll, lh, hl, hh), t))
    for perm in [(hl, lh, hh), (hh, hl, lh), (lh, hh, hl)]:
        assert np.array_equal(predict_mark(HaarBands(ll, *perm), pol).bits, ref)
    # blocks are aligned 2x2
    img = ref.reshape(8, 8)
    assert np.array_equal(img, upsample2(img[::2, ::2]))


@settings(max_examples=50, deadline=None)
@given(img=square(8), t1=st.floats(0, 100), t2=st.floats(0, 100))
def test_threshold_monotone(img, t1, t2):
    lo, hi = sorted((t1, t2))
    b = haar_analyze(img)
    m_lo = predict_mark(b, ThresholdPolicy(lo)).bits
    m_hi = predict_mark(b, ThresholdPolicy(hi)).bits
    assert not np.any(m_hi & ~m_lo)


@settings(max_examples=80, deadline=None)
@given(img=square(16), budget=st.integers(1, 400), out=st.sampled_from([16, 32]))
def test_budget_cap(img, budget, out):
    mark = predict_mark(haar_analyze(img), BudgetPolicy(budget), out_side=out)
    m = mark.n_marked
    if m:
        assert 1 << (m - 1).bit_length() <= budget
    block = out // 8
    # maximal: one more coefficient would not fit (unless all are taken)
    if m < out * out:
        assert 1 << (m + block * block - 1).bit_length() > budget


def test_budget_prefers_strongest():
    b = bands_with(4, lh=((2, 3), 1.0), hh=((0, 1), 3.0))
    mark = predict_mark(b, BudgetPolicy(4)).as_image()
    assert mark[0:2, 2:4].all() and mark.sum() == 4
    mark = predict_mark(b, BudgetPolicy(8)).as_image()
    assert mark[4:6, 6:8].all() and mark.sum() == 8


def test_budget_error():
    with pytest.raises(BudgetError):
        predict_mark(bands_with(2), BudgetPolicy(0))


def test_footprint_at_coarser_band():
    b = bands_with(2, hl=((1, 0), 1.0))
    mark = predict_mark(b, ThresholdPolicy(0.5), out_side=8).as_image()
    assert mark[4:8, 0:4].all() and mark.sum() == 16
