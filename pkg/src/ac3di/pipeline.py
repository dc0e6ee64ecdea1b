"""Staged adaptive compressed 3D imaging.

Stage 0 fully samples a coarse image with Hadamard multiplexing. Every later
stage doubles the side length, predicts edge regions from the Haar details of
the previous depth map, measures only those regions, and keeps the upsampled
previous estimate everywhere else.

Intensity and the modulated image are fluxes per pixel, so when a stage's
estimate is carried to the next resolution each replicated pixel gets a quarter
of its parent's value. Depth is replicated unchanged.
"""

from __future__ import annotations

import time
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .config import FixedThreshold, PatternBudget, ReconConfig, SimConfig
from .errors import ConfigError, IncompleteLogError, SizeError
from .forward import (MeasurementRecord, Scene, acquire_arrays, downsample_scene,
                      records_from_arrays)
from .hadamard import MaskedSensingPlan, debias, iht
from .metrics import psnr
from .wavelet import (BudgetPolicy, MarkVector, ThresholdPolicy, haar_analyze,
                      predict_mark, upsample2)


class SimulatorSource:
    """Live measurements from the forward model; optionally keeps every record."""

    def __init__(self, scene: Scene, sim: SimConfig, keep_records: bool = True):
        self.scene = scene
        self.sim = sim
        self.keep_records = keep_records
        self.records: list[MeasurementRecord] = []
        self._cache: dict[int, Scene] = {}

    def _scene_at(self, side: int) -> Scene:
        if side not in self._cache:
            self._cache[side] = downsample_scene(self.scene, side)
        return self._cache[side]

    def acquire(self, stage: int, plan: MaskedSensingPlan):
        side = int(round(np.sqrt(plan.n_pixels)))
        counts, tofs = acquire_arrays(self._scene_at(side), plan, self.sim, stage)
        if self.keep_records:
            self.records.extend(records_from_arrays(stage, counts, tofs,
                                                    integral=self.sim.mode == "poisson"))
        return counts, tofs


class LogSource:
    """Replays recorded measurements, grouped by stage."""

    def __init__(self, records):
        self._by_stage: dict[int, dict[int, MeasurementRecord]] = defaultdict(dict)
        for r in records:
            if r.pattern_index in self._by_stage[r.stage]:
                raise IncompleteLogError(f"duplicate record for stage {r.stage} pattern {r.pattern_index}")
            self._by_stage[r.stage][r.pattern_index] = r

    def acquire(self, stage: int, plan: MaskedSensingPlan):
        got = self._by_stage.get(stage, {})
        missing = [m for m in range(plan.order) if m not in got]
        if missing:
            raise IncompleteLogError(
                f"stage {stage}: log has {plan.order - len(missing)} of {plan.order} patterns "
                f"(first missing index {missing[0]})")
        if len(got) != plan.order:
            raise IncompleteLogError(
                f"stage {stage}: log has {len(got)} patterns but the plan projects {plan.order}")
        counts = np.array([float(got[m].count) for m in range(plan.order)])
        tofs = np.array([got[m].tof_sum_s for m in range(plan.order)])
        return counts, tofs


@dataclass
class StageState:
    side: int
    intensity: np.ndarray
    depth: np.ndarray
    modulated: np.ndarray
    mark: MarkVector
    patterns_used: int
    stage: int = 0


@dataclass
class RunStats:
    patterns_per_stage: list[int] = field(default_factory=list)
    final_side: int = 0
    reconstruction_time_s: float = 0.0
    psnr_intensity_db: float | None = None
    psnr_depth_db: float | None = None

    @property
    def total_patterns(self) -> int:
        return sum(self.patterns_per_stage)

    @property
    def compression_ratio(self) -> float:
        return self.total_patterns / self.final_side ** 2


def _demultiplex(plan: MaskedSensingPlan, counts, tofs, c_factor: float):
    edge_i = plan.scatter(iht(debias(counts)))
    edge_q = c_factor * plan.scatter(iht(debias(tofs)))
    return edge_i, edge_q


def _depth_floor(intensity: np.ndarray, cfg: ReconConfig) -> float:
    return cfg.epsilon_intensity * float(intensity.max(initial=0.0))


def initial_stage(source, cfg: ReconConfig, stats: RunStats | None = None) -> StageState:
    s = cfg.initial_side
    mark = MarkVector(np.ones(s * s, dtype=bool), s)
    plan = MaskedSensingPlan(mark.bits)
    counts, tofs = source.acquire(0, plan)
    t0 = time.perf_counter()
    edge_i, edge_q = _demultiplex(plan, counts, tofs, cfg.c_factor)
    intensity = np.maximum(edge_i, 0.0)
    eps = _depth_floor(intensity, cfg)
    ok = (intensity > 0) & (intensity >= eps)
    depth = np.zeros_like(intensity)
    depth[ok] = edge_q[ok] / intensity[ok]
    if stats is not None:
        stats.reconstruction_time_s += time.perf_counter() - t0
        stats.patterns_per_stage.append(plan.order)
    return StageState(s, intensity.reshape(s, s), depth.reshape(s, s), edge_q.reshape(s, s),
                      mark, plan.order, stage=0)


def stage_policy(cfg: ReconConfig, stage: int, patterns_used: int):
    """The per-stage marking policy; a global ratio target is shared out so that
    stage j gets a 4**j-weighted slice of what is still unspent."""
    p = cfg.policy
    if isinstance(p, FixedThreshold):
        return ThresholdPolicy(p.threshold)
    if p.stage_budgets is not None:
        return BudgetPolicy(p.stage_budgets[stage - 1])
    target = int(np.floor(p.ratio * cfg.final_side ** 2))
    remaining = target - patterns_used
    weights = [4 ** j for j in range(stage, cfg.n_stages)]
    return BudgetPolicy(remaining * weights[0] // sum(weights))


def _carry(prev: StageState, mark: MarkVector, patterns_used: int) -> StageState:
    side = 2 * prev.side
    return StageState(side, upsample2(prev.intensity) / 4, upsample2(prev.depth),
                      upsample2(prev.modulated) / 4, mark, patterns_used, prev.stage + 1)


def run_stage(prev: StageState, source, cfg: ReconConfig, stats: RunStats | None = None) -> StageState:
    if prev.side >= cfg.final_side:
        raise SizeError(f"already at final side {cfg.final_side}")
    stage = prev.stage + 1
    side = 2 * prev.side
    policy = stage_policy(cfg, stage, prev.patterns_used)
    if isinstance(policy, BudgetPolicy) and policy.budget < 1:
        mark = MarkVector(np.zeros(side * side, dtype=bool), side)
    else:
        mark = predict_mark(haar_analyze(prev.depth), policy, out_side=side)

    if mark.n_marked == 0:
        if stats is not None:
            stats.patterns_per_stage.append(0)
        return _carry(prev, mark, prev.patterns_used)

    plan = MaskedSensingPlan(mark.bits)
    counts, tofs = source.acquire(stage, plan)

    t0 = time.perf_counter()
    edge_i, edge_q = _demultiplex(plan, counts, tofs, cfg.c_factor)
    on = mark.bits
    coarse = _carry(prev, mark, prev.patterns_used + plan.order)
    intensity = coarse.intensity.ravel()
    modulated = coarse.modulated.ravel()
    depth = coarse.depth.ravel()
    intensity[on] = np.maximum(edge_i[on], 0.0)
    modulated[on] = edge_q[on]
    eps = _depth_floor(intensity, cfg)
    ok = on & (intensity > 0) & (intensity >= eps)
    depth[ok] = edge_q[ok] / intensity[ok]
    if stats is not None:
        stats.reconstruction_time_s += time.perf_counter() - t0
        stats.patterns_per_stage.append(plan.order)
    return coarse


def run(cfg: ReconConfig, source, truth: Scene | None = None):
    """Run every stage; returns ``(intensity, depth, RunStats)``."""
    p = cfg.policy
    if isinstance(p, PatternBudget) and p.ratio is not None:
        if cfg.initial_side ** 2 > p.ratio * cfg.final_side ** 2:
            raise ConfigError(
                f"ratio {p.ratio} cannot cover the {cfg.initial_side ** 2} initial patterns")
    stats = RunStats(final_side=cfg.final_side)
    state = initial_stage(source, cfg, stats)
    while state.side < cfg.final_side:
        state = run_stage(state, source, cfg, stats)
    if truth is not None:
        ref = downsample_scene(truth, cfg.final_side)
        stats.psnr_intensity_db = psnr(state.intensity, ref.intensity, float(ref.intensity.max()))
        stats.psnr_depth_db = psnr(state.depth, ref.depth, cfg.sim.range_gate_m)
    return state.intensity, state.depth, stats
