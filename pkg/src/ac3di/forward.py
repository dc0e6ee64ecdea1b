"""Photon-counting forward model of the single-pixel camera.

Counts are photons per pattern; TOF sums are the summed round-trip times (seconds)
of the photons detected during one pattern. Dead time and pile-up are not modeled.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .config import SPEED_OF_LIGHT, SimConfig
from .errors import SizeError
from .hadamard import MaskedSensingPlan, fwht, hadamard_row, is_power_of_two


@dataclass(frozen=True)
class Scene:
    """Ground truth: expected detected photons per pixel per dwell, and depth in meters."""

    intensity: np.ndarray
    depth: np.ndarray

    def __post_init__(self):
        inten = np.asarray(self.intensity, dtype=np.float64)
        depth = np.asarray(self.depth, dtype=np.float64)
        if inten.ndim != 2 or inten.shape[0] != inten.shape[1] or inten.shape != depth.shape:
            raise SizeError(f"intensity {inten.shape} and depth {depth.shape} must be equal squares")
        if not is_power_of_two(inten.shape[0]):
            raise SizeError(f"scene side must be a power of two, got {inten.shape[0]}")
        if not (np.all(np.isfinite(inten)) and np.all(inten >= 0)):
            raise ValueError("intensity must be finite and non-negative")
        if not (np.all(np.isfinite(depth)) and np.all(depth >= 0)):
            raise ValueError("depth must be finite and non-negative")
        object.__setattr__(self, "intensity", inten)
        object.__setattr__(self, "depth", depth)

    @property
    def side(self) -> int:
        return self.intensity.shape[0]


@dataclass(frozen=True)
class MeasurementRecord:
    stage: int
    pattern_index: int
    count: float
    tof_sum_s: float


def downsample_scene(scene: Scene, side: int) -> Scene:
    """Merge pixels into ``side x side`` blocks: flux is summed, depth is the
    intensity-weighted mean (plain mean for unlit blocks)."""
    if side < 1 or scene.side % side or not is_power_of_two(side):
        raise SizeError(f"cannot downsample side {scene.side} to {side}")
    if side == scene.side:
        return scene
    f = scene.side // side
    inten = scene.intensity.reshape(side, f, side, f)
    depth = scene.depth.reshape(side, f, side, f)
    flux = inten.sum(axis=(1, 3))
    weighted = (inten * depth).sum(axis=(1, 3))
    plain = depth.mean(axis=(1, 3))
    lit = flux > 0
    d = np.where(lit, weighted / np.where(lit, flux, 1.0), plain)
    return Scene(flux, d)


def pattern_seed(seed: int, stage: int, pattern_index: int) -> int:
    """Stable per-pattern seed so simulation does not depend on scheduling order."""
    ss = np.random.SeedSequence([int(seed), int(stage), int(pattern_index)])
    return int(ss.generate_state(1, np.uint64)[0])


def _rng(cfg: SimConfig, seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, int(seed)]))


def _photons(x: np.ndarray, tof: np.ndarray, cfg: SimConfig, rng: np.random.Generator):
    """Poisson photon detections for lit pixels with fluxes ``x`` and true TOFs ``tof``."""
    k = rng.poisson(x)
    t = np.repeat(tof, k)
    t += rng.normal(0.0, cfg.jitter_sigma_s, size=t.size)
    n_dark = int(rng.poisson(cfg.dark_rate_hz * cfg.dwell_s))
    gate = cfg.range_gate_s
    if n_dark:
        t = np.concatenate([t, rng.uniform(0.0, gate, size=n_dark)])
    bw = cfg.bin_width_s
    n_bins = max(int(np.ceil(gate / bw)), 1)
    bins = np.clip(np.floor(t / bw), 0, n_bins - 1)
    t_q = (bins + 0.5) * bw
    return int(k.sum()) + n_dark, float(t_q.sum())


def _expected(x: np.ndarray, tof: np.ndarray):
    return float(x.sum()), float((x * tof).sum())


def measure(scene: Scene, pattern, cfg: SimConfig, pattern_seed: int = 0, *, stage: int = 0,
            pattern_index: int = 0) -> MeasurementRecord:
    """Photon count and TOF sum collected while one binary pattern is displayed."""
    pattern = np.asarray(pattern).ravel()
    if pattern.size != scene.side ** 2:
        raise SizeError(f"pattern has {pattern.size} pixels, scene has {scene.side ** 2}")
    lit = pattern != 0
    x = scene.intensity.ravel()[lit]
    tof = 2.0 * scene.depth.ravel()[lit] / SPEED_OF_LIGHT
    if cfg.mode == "noiseless":
        count, tof_sum = _expected(x, tof)
    else:
        count, tof_sum = _photons(x, tof, cfg, _rng(cfg, pattern_seed))
    return MeasurementRecord(stage, pattern_index, count, tof_sum)


def acquire_arrays(scene: Scene, plan: MaskedSensingPlan, cfg: SimConfig, stage: int):
    """Counts and TOF sums for every pattern of ``plan``, as two float arrays."""
    if scene.side ** 2 != plan.n_pixels:
        raise SizeError(f"scene has {scene.side ** 2} pixels, plan expects {plan.n_pixels}")
    x = scene.intensity.ravel()[plan.pixels]
    tof = 2.0 * scene.depth.ravel()[plan.pixels] / SPEED_OF_LIGHT
    L, M = plan.order, plan.n_marked
    if cfg.mode == "noiseless":
        # zero-shifted rows: (H + 1)/2 applied to the padded vector
        xp = np.zeros(L)
        xp[:M] = x
        qp = np.zeros(L)
        qp[:M] = x * tof
        counts = (fwht(xp) + x.sum()) / 2
        tofs = (fwht(qp) + (x * tof).sum()) / 2
        return counts, tofs
    counts = np.empty(L)
    tofs = np.empty(L)
    for m in range(L):
        on = hadamard_row(m, L, M) > 0
        rng = _rng(cfg, pattern_seed(cfg.seed, stage, m))
        counts[m], tofs[m] = _photons(x[on], tof[on], cfg, rng)
    return counts, tofs


def acquire_stage(scene: Scene, plan: MaskedSensingPlan, cfg: SimConfig, stage: int) -> list[MeasurementRecord]:
    counts, tofs = acquire_arrays(scene, plan, cfg, stage)
    return records_from_arrays(stage, counts, tofs, integral=cfg.mode == "poisson")


def records_from_arrays(stage: int, counts, tofs, integral: bool = False) -> list[MeasurementRecord]:
    conv = int if integral else float
    return [
        MeasurementRecord(stage, m, conv(c), float(t))
        for m, (c, t) in enumerate(zip(counts.tolist(), tofs.tolist()))
    ]


def write_log(path, records: Iterable[MeasurementRecord]) -> None:
    """JSON-lines: one ``{stage, pattern_index, count, tof_sum_s}`` object per line."""
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(asdict(r)) + "\n")


def read_log(path) -> list[MeasurementRecord]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
                out.append(MeasurementRecord(int(d["stage"]), int(d["pattern_index"]),
                                             d["count"], float(d["tof_sum_s"])))
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad record ({exc})") from None
    return out
