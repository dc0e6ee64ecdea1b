"""Adaptive compressed single-pixel photon-counting 3D imaging: simulator and reconstruction."""

from .config import FixedThreshold, PatternBudget, ReconConfig, SimConfig
from .forward import MeasurementRecord, Scene
from .pipeline import LogSource, SimulatorSource, run

__all__ = [
    "FixedThreshold", "PatternBudget", "ReconConfig", "SimConfig",
    "MeasurementRecord", "Scene", "LogSource", "SimulatorSource", "run",
]
__version__ = "0.1.0"
