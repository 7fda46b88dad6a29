"""Experiment configuration. All angles are decimal multiples of pi."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .model import CavityScattering, CoinProfile, NoiseModel, WalkConfig

__all__ = ["ExperimentConfig", "EXPERIMENT_KINDS", "load_config_file", "REALISTIC"]

ExperimentKind = Literal["walk", "boundary", "spectrum", "phase-diagram", "winding", "moment-scan", "eigs"]
EXPERIMENT_KINDS: tuple[str, ...] = ExperimentKind.__args__

INV_SQRT2 = 1 / math.sqrt(2)

# lossy-node parameters of the robustness studies (phases and delta in units of pi)
REALISTIC = {"r_mag": 0.98, "r_phase": 0.05, "t_mag": 0.98, "t_phase": 0.95, "delta_max": 0.05}

_ANGLE_DEFAULTS = {
    "walk": (-0.25, 0.375, 0.75, -0.625),
    "boundary": (-0.25, 0.375, 0.75, -0.625),
    "eigs": (-0.25, 0.375, 0.75, -0.625),
    "winding": (-0.25, 0.375, None, None),
    "spectrum": (-0.25, 0.375, None, None),
    "moment-scan": (1 / 3, 0.0, None, None),
    "phase-diagram": (None, None, None, None),
}
_STEP_DEFAULTS = {"walk": 15, "boundary": 15, "moment-scan": 14}


class ExperimentConfig(BaseModel):
    """One experiment run. ``resolved()`` fills kind-dependent defaults."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: ExperimentKind
    theta1: Optional[float] = None
    theta2: Optional[float] = None
    theta1_right: Optional[float] = None
    theta2_right: Optional[float] = None
    wall: int = 0
    steps: Optional[int] = Field(None, ge=0, le=100_000)
    snapshot_every: int = Field(3, ge=1)
    x0: int = 0
    coin_r: tuple[float, float] = (INV_SQRT2, 0.0)
    coin_l: tuple[float, float] = (INV_SQRT2, 0.0)
    realistic: bool = False
    r_mag: float = Field(1.0, ge=0.0, le=1.0)
    r_phase: float = 0.0
    t_mag: float = Field(1.0, ge=0.0, le=1.0)
    t_phase: float = 1.0
    delta_max: float = Field(0.0, ge=0.0)
    per_site: bool = True
    realizations: Optional[int] = Field(None, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    renormalize: bool = False
    ring_size: int = Field(40, ge=8)
    e_tol: float = Field(0.05, gt=0.0)
    loc_threshold: float = Field(0.5, gt=0.0, le=1.0)
    radius: int = Field(4, ge=0)
    resolution: int = Field(64, ge=16)
    k_samples: int = Field(256, ge=64)
    theta2_min: float = -2.0
    theta2_max: float = 2.0
    points: int = Field(200, ge=2)
    threads: int = Field(1, ge=1)
    out: str = "out"

    @model_validator(mode="after")
    def _check(self) -> "ExperimentConfig":
        for name in ("theta1", "theta2", "theta1_right", "theta2_right", "r_phase", "t_phase",
                     "delta_max", "theta2_min", "theta2_max"):
            v = getattr(self, name)
            if v is not None and not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        norm = sum(c * c for c in self.coin_r) + sum(c * c for c in self.coin_l)
        if abs(norm - 1) > 1e-12:
            raise ValueError(f"coin amplitudes must be normalized, got |a_R|^2 + |a_L|^2 = {norm!r}")
        if self.ring_size % 2:
            raise ValueError(f"ring_size must be even, got {self.ring_size}")
        if self.theta2_max <= self.theta2_min:
            raise ValueError("theta2_max must exceed theta2_min")
        if self.kind == "moment-scan" and self.steps is not None and self.steps < 1:
            raise ValueError("moment-scan needs steps >= 1")
        return self

    def resolved(self) -> "ExperimentConfig":
        """Copy with every kind-dependent default made explicit."""
        updates: dict[str, Any] = {}
        defaults = _ANGLE_DEFAULTS[self.kind]
        for name, default in zip(("theta1", "theta2", "theta1_right", "theta2_right"), defaults):
            if getattr(self, name) is None and default is not None:
                updates[name] = default
        t1 = updates.get("theta1", self.theta1)
        t2 = updates.get("theta2", self.theta2)
        if self.theta1_right is None and "theta1_right" not in updates and t1 is not None:
            updates["theta1_right"] = t1
        if self.theta2_right is None and "theta2_right" not in updates and t2 is not None:
            updates["theta2_right"] = t2
        if self.steps is None and self.kind in _STEP_DEFAULTS:
            updates["steps"] = _STEP_DEFAULTS[self.kind]
        if self.realistic:
            updates.update(REALISTIC)
        if self.realizations is None:
            updates["realizations"] = 100 if (self.realistic or self.delta_max > 0) else 1
        return self.model_copy(update=updates)

    # conversions to library objects (call on a resolved config)

    def profile(self) -> CoinProfile:
        return CoinProfile.from_pi(self.theta1, self.theta2, self.theta1_right, self.theta2_right, self.wall)

    def scattering(self) -> CavityScattering:
        return CavityScattering.from_polar(self.r_mag, self.r_phase * math.pi, self.t_mag, self.t_phase * math.pi)

    def noise(self) -> Optional[NoiseModel]:
        if self.delta_max <= 0:
            return None
        return NoiseModel(self.delta_max * math.pi, self.per_site, self.seed)

    def coin(self) -> tuple[complex, complex]:
        return complex(*self.coin_r), complex(*self.coin_l)

    def walk_config(self) -> WalkConfig:
        return WalkConfig(self.profile(), self.steps, self.scattering(), self.noise(), self.x0, self.coin())


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a JSON config, or the ``config`` section of a run manifest."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError(f"{path}: top level must be a JSON object")
    if "manifest_version" in data:
        data = data["config"]
    return data
