"""One-level orthonormal Haar analysis and edge prediction along wavelet trees."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, SizeError


@dataclass(frozen=True)
class HaarBands:
    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    @property
    def side(self) -> int:
        return self.ll.shape[0]

    def detail_magnitude(self) -> np.ndarray:
        """Per-position edge strength: the largest detail magnitude over orientations."""
        return np.maximum(np.maximum(np.abs(self.lh), np.abs(self.hl)), np.abs(self.hh))


@dataclass(frozen=True)
class MarkVector:
    """Row-major binary mask of pixels to resample at the next resolution."""

    bits: np.ndarray
    side: int

    @property
    def n_marked(self) -> int:
        return int(np.count_nonzero(self.bits))

    def as_image(self) -> np.ndarray:
        return self.bits.reshape(self.side, self.side)


@dataclass(frozen=True)
class ThresholdPolicy:
    """Fixed detail threshold in depth units (meters); marks where magnitude >= threshold."""

    threshold: float = 0.05


@dataclass(frozen=True)
class BudgetPolicy:
    """Mark the strongest coefficients so that the stage fits in ``budget`` patterns."""

    budget: int


def _blocks(img: np.ndarray):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] != img.shape[1]:
        raise SizeError(f"expected a square image, got shape {img.shape}")
    s = img.shape[0]
    if s < 2 or s % 2:
        raise SizeError(f"side must be even and >= 2, got {s}")
    a = img[0::2, 0::2]
    b = img[0::2, 1::2]
    c = img[1::2, 0::2]
    d = img[1::2, 1::2]
    return a, b, c, d


def haar_analyze(img) -> HaarBands:
    a, b, c, d = _blocks(img)
    return HaarBands(
        ll=(a + b + c + d) / 2,
        lh=(a - b + c - d) / 2,
        hl=(a + b - c - d) / 2,
        hh=(a - b - c + d) / 2,
    )


def haar_synthesize(bands: HaarBands) -> np.ndarray:
    """Exact inverse of :func:`haar_analyze`."""
    ll, lh, hl, hh = bands.ll, bands.lh, bands.hl, bands.hh
    s = ll.shape[0]
    out = np.empty((2 * s, 2 * s))
    out[0::2, 0::2] = (ll + lh + hl + hh) / 2
    out[0::2, 1::2] = (ll - lh + hl - hh) / 2
    out[1::2, 0::2] = (ll + lh - hl - hh) / 2
    out[1::2, 1::2] = (ll - lh - hl + hh) / 2
    return out


def upsample2(x) -> np.ndarray:
    """Replicate every pixel into a 2x2 block."""
    x = np.asarray(x)
    if x.size == 0:
        raise SizeError("cannot upsample an empty image")
    return np.repeat(np.repeat(x, 2, axis=0), 2, axis=1)


def avg_pool2(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    s0, s1 = x.shape
    return x.reshape(s0 // 2, 2, s1 // 2, 2).mean(axis=(1, 3))


def max_marked_coefficients(budget: int, block: int) -> int:
    """Largest K with ``2 ** ceil(log2(block**2 * K)) <= budget``."""
    if budget < 1:
        raise BudgetError(f"stage budget must be at least one pattern, got {budget}")
    largest_pow2 = 1 << (int(budget).bit_length() - 1)
    return largest_pow2 // (block * block)


def predict_mark(bands: HaarBands, policy, out_side: int | None = None) -> MarkVector:
    """Predict the pixels to resample from the detail coefficients of a depth map.

    Each coefficient position whose detail magnitude is significant marks its
    whole spatial footprint at ``out_side`` resolution. With the default
    ``out_side = 2 * bands.side`` the footprint is its four children.

    ``policy`` is a :class:`ThresholdPolicy` or a :class:`BudgetPolicy`. Under a
    budget the K strongest positions are kept, ties resolved by row-major order.
    """
    s = bands.side
    out_side = 2 * s if out_side is None else int(out_side)
    if out_side % s or out_side < s:
        raise SizeError(f"out_side {out_side} is not a multiple of band side {s}")
    block = out_side // s
    mag = bands.detail_magnitude()

    if isinstance(policy, ThresholdPolicy):
        selected = mag >= policy.threshold
    elif isinstance(policy, BudgetPolicy):
        k = min(max_marked_coefficients(policy.budget, block), mag.size)
        flat = mag.ravel()
        # stable sort on -magnitude keeps row-major order among ties
        keep = np.argsort(-flat, kind="stable")[:k]
        selected = np.zeros(flat.size, dtype=bool)
        selected[keep] = True
        selected = selected.reshape(mag.shape)
    else:
        raise TypeError(f"unsupported policy {policy!r}")

    bits = np.kron(selected, np.ones((block, block), dtype=bool)).ravel()
    return MarkVector(bits=bits, side=out_side)
