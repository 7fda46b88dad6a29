"""
Domain types for the cavity-network quantum walk.

Coin basis ordering is fixed as ``(|R>, |L>)`` with component indices ``(0, 1)``
everywhere in the package. Angles are stored in radians; constructors with a
``from_pi`` suffix take decimal multiples of pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from .errors import ValidationError

__all__ = [
    "R",
    "L",
    "SpinorField",
    "CoinProfile",
    "CavityScattering",
    "NoiseModel",
    "WalkConfig",
    "DensityProfile",
    "make_initial_state",
    "photon_density",
    "wrap_angle",
]

R, L = 0, 1

NORM_TOL = 1e-12
FOUR_PI = 4.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Map ``theta`` into [-2pi, 2pi] using the 4pi periodicity of the walk."""
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValidationError(f"angle must be finite, got {theta!r}")
    if -2 * math.pi <= theta <= 2 * math.pi:
        return theta
    return (theta + 2 * math.pi) % FOUR_PI - 2 * math.pi


def _readonly(a: NDArray) -> NDArray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpinorField:
    """Two-component amplitudes over a contiguous window of lattice sites.

    ``amplitudes[i, c]`` is the amplitude of site ``origin_offset + i`` and
    polarization ``c``. With ``periodic=True`` the window is a ring and
    translation wraps around instead of overflowing.
    """

    origin_offset: int
    amplitudes: NDArray[np.complex128]
    periodic: bool = False

    def __post_init__(self) -> None:
        a = np.array(self.amplitudes, dtype=np.complex128)
        if a.ndim != 2 or a.shape[1] != 2 or a.shape[0] < 1:
            raise ValidationError(f"amplitudes must have shape (n>=1, 2), got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValidationError("amplitudes contain NaN or Inf")
        norm_sq = float(np.sum(np.abs(a) ** 2))
        if norm_sq > 1 + 1e-9:
            raise ValidationError(f"squared norm {norm_sq} exceeds 1")
        object.__setattr__(self, "origin_offset", int(self.origin_offset))
        object.__setattr__(self, "amplitudes", _readonly(a))

    @property
    def size(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def sites(self) -> NDArray[np.int64]:
        return np.arange(self.origin_offset, self.origin_offset + self.size)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def amplitude(self, x: int, c: int) -> complex:
        i = x - self.origin_offset
        if not 0 <= i < self.size:
            return 0j
        return complex(self.amplitudes[i, c])

    def with_amplitudes(self, amplitudes: NDArray[np.complex128]) -> "SpinorField":
        return SpinorField(self.origin_offset, amplitudes, self.periodic)


@dataclass(frozen=True)
class CoinProfile:
    """Piecewise-constant rotation angles with a single domain wall.

    Sites ``x < wall_position`` use the left angles and sites
    ``x >= wall_position`` the right ones.
    """

    theta1_left: float
    theta2_left: float
    theta1_right: float
    theta2_right: float
    wall_position: int = 0

    def __post_init__(self) -> None:
        for name in ("theta1_left", "theta2_left", "theta1_right", "theta2_right"):
            object.__setattr__(self, name, wrap_angle(getattr(self, name)))
        object.__setattr__(self, "wall_position", int(self.wall_position))

    @classmethod
    def homogeneous(cls, theta1: float, theta2: float) -> "CoinProfile":
        return cls(theta1, theta2, theta1, theta2)

    @classmethod
    def from_pi(
        cls,
        theta1: float,
        theta2: float,
        theta1_right: Optional[float] = None,
        theta2_right: Optional[float] = None,
        wall_position: int = 0,
    ) -> "CoinProfile":
        """Build a profile from angles given in units of pi."""
        t1r = theta1 if theta1_right is None else theta1_right
        t2r = theta2 if theta2_right is None else theta2_right
        return cls(theta1 * math.pi, theta2 * math.pi, t1r * math.pi, t2r * math.pi, wall_position)

    @property
    def is_homogeneous(self) -> bool:
        return self.theta1_left == self.theta1_right and self.theta2_left == self.theta2_right

    @property
    def left(self) -> tuple[float, float]:
        return self.theta1_left, self.theta2_left

    @property
    def right(self) -> tuple[float, float]:
        return self.theta1_right, self.theta2_right

    def angles_at(self, sites: NDArray[np.int64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Per-site ``(theta1, theta2)`` arrays."""
        left = np.asarray(sites) < self.wall_position
        theta1 = np.where(left, self.theta1_left, self.theta1_right)
        theta2 = np.where(left, self.theta2_left, self.theta2_right)
        return theta1, theta2


@dataclass(frozen=True)
class CavityScattering:
    """Reflection amplitude ``r_R`` of R photons and transmission ``t_L`` of L photons."""

    r_R: complex = 1.0 + 0j
    t_L: complex = -1.0 + 0j

    def __post_init__(self) -> None:
        r, t = complex(self.r_R), complex(self.t_L)
        for name, v in (("r_R", r), ("t_L", t)):
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValidationError(f"{name} must be finite")
            if abs(v) > 1 + 1e-12:
                raise ValidationError(f"|{name}| = {abs(v)} exceeds 1")
        object.__setattr__(self, "r_R", r)
        object.__setattr__(self, "t_L", t)

    @classmethod
    def ideal(cls) -> "CavityScattering":
        return cls(1.0 + 0j, -1.0 + 0j)

    @classmethod
    def from_polar(cls, r_mag: float, r_phase: float, t_mag: float, t_phase: float) -> "CavityScattering":
        """Phases in radians."""
        return cls(r_mag * np.exp(1j * r_phase), t_mag * np.exp(1j * t_phase))

    @classmethod
    def realistic(cls) -> "CavityScattering":
        """Lossy node used for the robustness studies: 0.98 e^{0.05i pi}, 0.98 e^{0.95i pi}."""
        return cls.from_polar(0.98, 0.05 * math.pi, 0.98, 0.95 * math.pi)

    @property
    def is_ideal(self) -> bool:
        return self.r_R == 1 and self.t_L == -1


@dataclass(frozen=True)
class NoiseModel:
    """Uniform fluctuation on (-delta_max, delta_max) added to every rotation angle."""

    delta_max: float = 0.0
    per_site: bool = True
    master_seed: int = 0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.delta_max) and self.delta_max >= 0):
            raise ValidationError(f"delta_max must be finite and >= 0, got {self.delta_max}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValidationError("master_seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "master_seed", int(self.master_seed))

    @classmethod
    def realistic(cls, master_seed: int = 0, per_site: bool = True) -> "NoiseModel":
        return cls(math.pi / 20, per_site, master_seed)

    @property
    def active(self) -> bool:
        return self.delta_max > 0


@dataclass(frozen=True)
class WalkConfig:
    """Everything needed to run one walk. The step time is fixed at 1."""

    profile: CoinProfile
    steps: int
    scattering: CavityScattering = field(default_factory=CavityScattering.ideal)
    noise: Optional[NoiseModel] = None
    x0: int = 0
    coin: tuple[complex, complex] = (1 / math.sqrt(2), 1 / math.sqrt(2))

    def __post_init__(self) -> None:
        if int(self.steps) < 0:
            raise ValidationError(f"steps must be non-negative, got {self.steps}")
        object.__setattr__(self, "steps", int(self.steps))
        a_r, a_l = (complex(c) for c in self.coin)
        _check_coin(a_r, a_l)
        object.__setattr__(self, "coin", (a_r, a_l))

    @property
    def lattice_halfwidth(self) -> int:
        return 2 * self.steps + 2

    def initial_state(self) -> SpinorField:
        return make_initial_state(self.x0, self.coin[0], self.coin[1], self.lattice_halfwidth)


@dataclass(frozen=True)
class DensityProfile:
    """Photon density ``P(x)`` over a window of sites after ``step`` steps."""

    origin_offset: int
    probabilities: NDArray[np.float64]
    step: int = 0

    def __post_init__(self) -> None:
        p = np.array(self.probabilities, dtype=np.float64)
        if p.ndim != 1:
            raise ValidationError("probabilities must be one-dimensional")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValidationError("probabilities must be finite and non-negative")
        if p.sum() > 1 + 1e-9:
            raise ValidationError(f"total probability {p.sum()} exceeds 1")
        object.__setattr__(self, "probabilities", _readonly(p))

    @property
    def sites(self) -> NDArray[np.int64]:
        return np.arange(self.origin_offset, self.origin_offset + len(self.probabilities))

    def total(self) -> float:
        return float(self.probabilities.sum())

    def at(self, x: int) -> float:
        i = x - self.origin_offset
        if not 0 <= i < len(self.probabilities):
            return 0.0
        return float(self.probabilities[i])

    def argmax_site(self) -> int:
        return int(self.sites[np.argmax(self.probabilities)])


def _check_coin(a_r: complex, a_l: complex) -> None:
    norm = abs(a_r) ** 2 + abs(a_l) ** 2
    if abs(norm - 1) > NORM_TOL:
        raise ValidationError(f"coin amplitudes must be normalized, |a_R|^2 + |a_L|^2 = {norm!r}")


def make_initial_state(x0: int, a_R: complex, a_L: complex, lattice_halfwidth: int) -> SpinorField:
    """Single photon at site ``x0`` with polarization ``a_R|R> + a_L|L>``.

    The window spans ``[x0 - lattice_halfwidth, x0 + lattice_halfwidth]``.
    """
    _check_coin(complex(a_R), complex(a_L))
    if lattice_halfwidth < 1:
        raise ValidationError(f"lattice_halfwidth must be >= 1, got {lattice_halfwidth}")
    amps = np.zeros((2 * lattice_halfwidth + 1, 2), dtype=np.complex128)
    amps[lattice_halfwidth] = (a_R, a_L)
    return SpinorField(x0 - lattice_halfwidth, amps)


def photon_density(state: SpinorField, step: int = 0) -> DensityProfile:
    """``P(x) = |<x,R|psi>|^2 + |<x,L|psi>|^2``."""
    p = np.sum(np.abs(state.amplitudes) ** 2, axis=1)
    return DensityProfile(state.origin_offset, p, step)
