"""Run configuration models. JSON field names match the model fields exactly;
unknown fields are rejected."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError

SPEED_OF_LIGHT = 299_792_458.0


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SimConfig(_Strict):
    mode: Literal["noiseless", "poisson"] = "noiseless"
    dwell_s: float = Field(1e-3, gt=0)
    jitter_fwhm_s: float = Field(300e-12, gt=0)
    bin_width_s: float = Field(64e-12, gt=0)
    dark_rate_hz: float = Field(0.0, ge=0)
    range_gate_m: float = Field(7.5, gt=0)
    seed: int = Field(0, ge=0, lt=2**64)

    @property
    def jitter_sigma_s(self) -> float:
        return self.jitter_fwhm_s / 2.3548

    @property
    def range_gate_s(self) -> float:
        return 2.0 * self.range_gate_m / SPEED_OF_LIGHT


class FixedThreshold(_Strict):
    kind: Literal["threshold"] = "threshold"
    threshold: float = Field(0.05, ge=0)


class PatternBudget(_Strict):
    """Either a global compression-ratio target or explicit per-stage caps
    (one entry per refinement stage)."""

    kind: Literal["budget"] = "budget"
    ratio: Optional[float] = Field(None, gt=0)
    stage_budgets: Optional[list[int]] = None

    @model_validator(mode="after")
    def _one_of(self):
        if (self.ratio is None) == (self.stage_budgets is None):
            raise ValueError("give exactly one of 'ratio' or 'stage_budgets'")
        if self.stage_budgets is not None and any(b < 0 for b in self.stage_budgets):
            raise ValueError("stage budgets must be non-negative")
        return self


Policy = Annotated[Union[FixedThreshold, PatternBudget], Field(discriminator="kind")]


def _pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


class ReconConfig(_Strict):
    initial_side: int = 64
    final_side: int = 512
    policy: Policy = FixedThreshold()
    c_factor: float = Field(SPEED_OF_LIGHT / 2, gt=0)
    # relative to the stage's maximum reconstructed intensity
    epsilon_intensity: float = Field(1e-6, ge=0)
    sim: SimConfig = SimConfig()

    @model_validator(mode="after")
    def _sides(self):
        if not (_pow2(self.initial_side) and _pow2(self.final_side)):
            raise ValueError("initial_side and final_side must be powers of two")
        if self.final_side < self.initial_side:
            raise ValueError("final_side must be >= initial_side")
        if self.n_stages > 1 and self.initial_side < 2:
            raise ValueError("initial_side must be >= 2 when refinement stages follow")
        p = self.policy
        if isinstance(p, PatternBudget) and p.stage_budgets is not None:
            if len(p.stage_budgets) != self.n_stages - 1:
                raise ValueError(
                    f"stage_budgets needs {self.n_stages - 1} entries, got {len(p.stage_budgets)}"
                )
        return self

    @property
    def n_stages(self) -> int:
        return (self.final_side // self.initial_side).bit_length()


def load_config(path) -> ReconConfig:
    try:
        data = json.loads(Path(path).read_text())
        return ReconConfig.model_validate(data)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "<root>"
        raise ConfigError(f"{path}: {loc}: {first['msg']}") from None


def dump_config(cfg: ReconConfig) -> str:
    return cfg.model_dump_json(indent=2)
