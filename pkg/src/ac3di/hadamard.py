"""Sylvester-order Hadamard matrices, the fast transform, and masked patterns.

Rows are indexed in natural (Sylvester) order, so ``H[m, k] = (-1) ** popcount(m & k)``.
Physical patterns are the zero-shifted matrix ``(H + 1) / 2`` rearranged into the
marked pixels of a stage; no ``L x N`` sensing matrix is ever built.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SizeError

MAX_DENSE_ORDER_LOG2 = 12


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    """Smallest power of two >= n (n >= 1)."""
    if n < 1:
        raise SizeError(f"need n >= 1, got {n}")
    return 1 << (int(n) - 1).bit_length()


def dense_hadamard(order_log2: int) -> np.ndarray:
    """Dense ``2**order_log2`` square Hadamard matrix built by Kronecker recursion.

    Intended for oracles and small debugging; use :func:`fwht` for real sizes.
    """
    if not 0 <= order_log2 <= MAX_DENSE_ORDER_LOG2:
        raise SizeError(f"order_log2 must be in [0, {MAX_DENSE_ORDER_LOG2}], got {order_log2}")
    h2 = np.array([[1, 1], [1, -1]], dtype=np.int64)
    h = np.ones((1, 1), dtype=np.int64)
    for _ in range(order_log2):
        h = np.kron(h, h2)
    return h


def fwht(v) -> np.ndarray:
    """Return ``H_L @ v`` in O(L log L) using in-place butterflies.

    The butterfly order is fixed, so the output is bit-deterministic for a given input.
    """
    x = np.array(v, dtype=np.float64)
    if x.ndim != 1:
        raise SizeError(f"expected a 1-D vector, got shape {x.shape}")
    n = x.shape[0]
    if not is_power_of_two(n):
        raise SizeError(f"length must be a power of two, got {n}")
    h = 1
    while h < n:
        y = x.reshape(-1, 2, h)
        a = y[:, 0, :].copy()
        y[:, 0, :] += y[:, 1, :]
        y[:, 1, :] = a - y[:, 1, :]
        h *= 2
    return x


def iht(v) -> np.ndarray:
    """Inverse Hadamard transform, ``fwht(v) / L``."""
    out = fwht(v)
    out /= out.shape[0]
    return out


def hadamard_row(m: int, order: int, ncols: int | None = None) -> np.ndarray:
    """Entries ``H_order[m, :ncols]`` as an int8 vector of +1/-1."""
    if not 0 <= m < order:
        raise IndexError(f"row {m} out of range for order {order}")
    k = np.arange(order if ncols is None else ncols, dtype=np.uint64)
    parity = np.bitwise_count(k & np.uint64(m)) & 1
    return (1 - 2 * parity.astype(np.int8)).astype(np.int8)


@dataclass(frozen=True)
class MaskedSensingPlan:
    """Zero-shifted Hadamard patterns confined to the marked pixels of one stage.

    ``pixels[j]`` is the row-major index of the marked pixel assigned to Hadamard
    column ``j``; ``col_of_pixel`` is the inverse map (-1 for unmarked pixels).
    """

    mark: np.ndarray
    pixels: np.ndarray = field(init=False, repr=False)
    col_of_pixel: np.ndarray = field(init=False, repr=False)
    order: int = field(init=False)

    def __post_init__(self):
        mark = np.asarray(self.mark).astype(bool).ravel()
        pixels = np.flatnonzero(mark)
        if pixels.size == 0:
            raise SizeError("a sensing plan needs at least one marked pixel")
        col = np.full(mark.size, -1, dtype=np.int64)
        col[pixels] = np.arange(pixels.size)
        mark.setflags(write=False)
        pixels.setflags(write=False)
        col.setflags(write=False)
        object.__setattr__(self, "mark", mark)
        object.__setattr__(self, "pixels", pixels)
        object.__setattr__(self, "col_of_pixel", col)
        object.__setattr__(self, "order", next_power_of_two(pixels.size))

    @property
    def n_pixels(self) -> int:
        return self.mark.size

    @property
    def n_marked(self) -> int:
        return self.pixels.size

    def pad(self, values) -> np.ndarray:
        """Place per-pixel values of the marked pixels into Hadamard columns 0..M-1."""
        values = np.asarray(values, dtype=np.float64).ravel()
        if values.size != self.n_pixels:
            raise SizeError(f"expected {self.n_pixels} values, got {values.size}")
        out = np.zeros(self.order)
        out[: self.n_marked] = values[self.pixels]
        return out

    def scatter(self, columns) -> np.ndarray:
        """Inverse of :meth:`pad`: columns 0..M-1 back onto their pixels, zeros elsewhere."""
        out = np.zeros(self.n_pixels)
        out[self.pixels] = np.asarray(columns)[: self.n_marked]
        return out


def pattern_row(plan: MaskedSensingPlan, m: int) -> np.ndarray:
    """Binary DMD pattern for row ``m`` of the plan, as a uint8 vector of length N."""
    if not 0 <= m < plan.order:
        raise IndexError(f"pattern index {m} out of range for order {plan.order}")
    row = np.zeros(plan.n_pixels, dtype=np.uint8)
    row[plan.pixels] = hadamard_row(m, plan.order, plan.n_marked) > 0
    return row


def debias(y_raw) -> np.ndarray:
    """Convert zero-shifted measurements to bipolar ones: ``2 y(m) - y(0)``.

    Row 0 lights every marked pixel, so ``y(0)`` is the total signal that the
    zero shift added to each measurement twice over.
    """
    y = np.asarray(y_raw, dtype=np.float64).ravel()
    if y.size == 0:
        raise SizeError("cannot debias an empty measurement vector")
    return 2.0 * y - y[0]
