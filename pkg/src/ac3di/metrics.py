"""Image quality metrics and the JSON quality report."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import SizeError


def psnr(a, b, peak: float) -> float:
    """Peak signal-to-noise ratio in dB; ``math.inf`` for identical images."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise SizeError(f"shape mismatch {a.shape} vs {b.shape}")
    if not peak > 0:
        raise ValueError(f"peak must be positive, got {peak}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return math.inf
    return 10 * math.log10(peak ** 2 / mse)


def _finite_or_inf(x):
    if x is None:
        return None
    return "inf" if math.isinf(x) else x


@dataclass
class QualityReport:
    psnr_intensity_db: float | None = None
    psnr_depth_db: float | None = None
    compression_ratio: float | None = None
    patterns_per_stage: list[int] = field(default_factory=list)
    total_patterns: int | None = None
    reconstruction_time_s: float | None = None
    intensity_peak: str = "ground-truth maximum"
    depth_peak_m: float | None = None

    def to_json(self) -> str:
        d = asdict(self)
        d["psnr_intensity_db"] = _finite_or_inf(self.psnr_intensity_db)
        d["psnr_depth_db"] = _finite_or_inf(self.psnr_depth_db)
        return json.dumps(d, indent=2)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")

    @classmethod
    def from_stats(cls, stats, range_gate_m: float) -> "QualityReport":
        return cls(
            psnr_intensity_db=stats.psnr_intensity_db,
            psnr_depth_db=stats.psnr_depth_db,
            compression_ratio=stats.compression_ratio,
            patterns_per_stage=list(stats.patterns_per_stage),
            total_patterns=stats.total_patterns,
            reconstruction_time_s=stats.reconstruction_time_s,
            depth_peak_m=range_gate_m,
        )
