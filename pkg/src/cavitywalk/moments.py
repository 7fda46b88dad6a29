"""
Second-order moment ``M = sum_x (x - x0)^2 P(x, N) / N^2`` of the output density.

Three independent routes are provided:

* ``second_moment`` from a real-space density,
* ``second_moment_momentum`` from the N-step Bloch propagator,
* ``moment_infinite_limit`` / ``moment_closed_form`` for N -> infinity.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from .bloch import rotation_y
from .errors import UnsupportedConfigurationError, ValidationError
from .model import CavityScattering, CoinProfile, DensityProfile, NoiseModel, WalkConfig
from .walk import derive_seed, ensemble_average, evolve

__all__ = [
    "MomentScan",
    "second_moment",
    "second_moment_momentum",
    "moment_infinite_limit",
    "moment_closed_form",
    "moment_scan",
    "breakpoint_distance",
    "BREAKPOINTS",
]

BREAKPOINTS = (-5 * math.pi / 3, -math.pi / 3, math.pi / 3, 5 * math.pi / 3)
_DEGENERATE = 1e-6


@dataclass(frozen=True)
class MomentScan:
    theta1: float
    steps: int
    theta2: NDArray[np.float64]
    m_numeric: NDArray[np.float64]
    m_analytic: NDArray[np.float64]

    def __post_init__(self) -> None:
        if np.any(np.diff(self.theta2) <= 0):
            raise ValidationError("theta2 samples must be strictly increasing")

    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.theta2.tolist(), self.m_numeric.tolist(), self.m_analytic.tolist()))


def breakpoint_distance(theta2: float) -> float:
    """Distance from ``theta2`` to the nearest transition of the theta1 = pi/3 cut."""
    return min(abs(theta2 - b) for b in BREAKPOINTS)


def second_moment(density: DensityProfile, x0: int, steps: int, renormalize: bool = False) -> float:
    if steps < 1:
        raise ValidationError(f"second moment needs steps >= 1, got {steps}")
    p = density.probabilities
    if renormalize:
        total = p.sum()
        if total <= 0:
            raise ValidationError("cannot renormalize an empty density")
        p = p / total
    dx = (density.sites - x0).astype(float)
    return float(np.sum(dx**2 * p) / steps**2)


def second_moment_momentum(
    profile: CoinProfile,
    coin_state: tuple[complex, complex],
    steps: int,
    k_samples: int = 1024,
    scattering: Optional[CavityScattering] = None,
) -> float:
    """Second moment from ``<psi_N(k)| (i d/dk)^2 |psi_N(k)>`` integrated over k.

    ``psi_N(k) = U(k)^N phi0`` and its k-derivatives are propagated exactly
    (forward-mode product rule), so the periodic rectangle rule is exact once
    ``k_samples`` exceeds ``4N``.
    """
    if not profile.is_homogeneous:
        raise UnsupportedConfigurationError("momentum-space moment needs a homogeneous coin profile")
    if k_samples < 512:
        raise ValidationError(f"k_samples must be >= 512, got {k_samples}")
    if steps < 1:
        raise ValidationError(f"second moment needs steps >= 1, got {steps}")
    sc = scattering or CavityScattering.ideal()
    theta1, theta2 = profile.left

    k = np.linspace(-math.pi, math.pi, k_samples, endpoint=False)
    half = rotation_y(theta1 / 2)
    mid = rotation_y(theta2)
    zeros = np.zeros(k.shape + (2, 2), dtype=np.complex128)
    t0, t1, t2 = zeros.copy(), zeros.copy(), zeros.copy()
    t0[:, 0, 0] = sc.r_R * np.exp(-1j * k)
    t0[:, 1, 1] = sc.t_L * np.exp(1j * k)
    t1[:, 0, 0] = -1j * t0[:, 0, 0]
    t1[:, 1, 1] = 1j * t0[:, 1, 1]
    t2[:] = -t0
    u0 = half @ t0 @ mid @ t0 @ half
    u1 = half @ (t1 @ mid @ t0 + t0 @ mid @ t1) @ half
    u2 = half @ (t2 @ mid @ t0 + 2 * t1 @ mid @ t1 + t0 @ mid @ t2) @ half

    psi = np.broadcast_to(np.asarray(coin_state, dtype=np.complex128), k.shape + (2,)).copy()
    d1 = np.zeros_like(psi)
    d2 = np.zeros_like(psi)
    apply = lambda m, v: np.einsum("kij,kj->ki", m, v)  # noqa: E731
    for _ in range(steps):
        psi, d1, d2 = (
            apply(u0, psi),
            apply(u1, psi) + apply(u0, d1),
            apply(u2, psi) + 2 * apply(u1, d1) + apply(u0, d2),
        )
    integrand = -np.real(np.sum(psi.conj() * d2, axis=1))
    return float(integrand.mean() / steps**2)


def _group_velocity_sq(theta1: float, theta2: float, k: NDArray[np.float64]) -> NDArray[np.float64]:
    c = math.cos(theta1 / 2) * math.cos(theta2 / 2)
    s = math.sin(theta1 / 2) * math.sin(theta2 / 2)
    cos2k = np.cos(2 * k)
    cos_e = np.clip(c * cos2k + s, -1.0, 1.0)
    sin_e_sq = 1.0 - cos_e**2
    regular = sin_e_sq > _DEGENERATE**2
    v_sq = np.where(regular, (2 * c * np.sin(2 * k)) ** 2 / np.where(regular, sin_e_sq, 1.0), 0.0)
    # removable 0/0 where the band touches E = 0 or pi; second-order L'Hopital limit
    denom = cos_e * cos2k
    limit = np.where(c * denom > 0, 4 * c / np.where(denom != 0, denom, 1.0), 0.0)
    return np.where(regular, v_sq, limit)


def moment_infinite_limit(
    theta1: float, theta2: float, k_samples: int = 4096, tol: float = 1e-11, max_samples: int = 2**22
) -> float:
    """``(1/2pi) * integral over [-pi, pi) of (dE/dk)^2``, the N -> infinity moment.

    The integrand is smooth and periodic, so the rectangle rule converges
    geometrically, but more slowly the smaller the gap. The grid is doubled from
    ``k_samples`` until two successive estimates agree to ``tol`` or the grid
    reaches ``max_samples`` (only happens at or extremely close to a transition).
    """
    if k_samples < 1024:
        raise ValidationError(f"k_samples must be >= 1024, got {k_samples}")
    n = k_samples
    k = np.linspace(-math.pi, math.pi, n, endpoint=False)
    value = float(_group_velocity_sq(theta1, theta2, k).mean())
    while n < max_samples:
        # the refined grid interleaves the midpoints of the current one
        mid = k + math.pi / n
        refined = 0.5 * (value + float(_group_velocity_sq(theta1, theta2, mid).mean()))
        n *= 2
        k = np.concatenate([k, mid])
        if abs(refined - value) < tol:
            return refined
        value = refined
    return value


def moment_closed_form(theta2: float) -> float:
    """Infinite-step moment along the cut theta1 = pi/3, theta2 in [-2pi, 2pi]."""
    tol = 1e-12
    if not -2 * math.pi - tol <= theta2 <= 2 * math.pi + tol:
        raise ValidationError(f"theta2 must lie in [-2pi, 2pi], got {theta2}")
    if -5 * math.pi / 3 < theta2 < -math.pi / 3:
        return 4 + 4 * math.sin(theta2 / 2)
    if math.pi / 3 < theta2 < 5 * math.pi / 3:
        return 4 - 4 * math.sin(theta2 / 2)
    return 2.0


def _scan_point(
    index: int,
    theta1: float,
    theta2: float,
    steps: int,
    scattering: CavityScattering,
    noise: Optional[NoiseModel],
    realizations: int,
    renormalize: bool,
    x0: int,
    coin: tuple[complex, complex],
) -> float:
    profile = CoinProfile.homogeneous(theta1, theta2)
    if noise is not None and noise.active:
        point_noise = NoiseModel(noise.delta_max, noise.per_site, derive_seed(noise.master_seed, index, 1))
        config = WalkConfig(profile, steps, scattering, point_noise, x0, coin)
        density = ensemble_average(config, realizations).density
    else:
        config = WalkConfig(profile, steps, scattering, None, x0, coin)
        density = evolve(config)[-1].density
    return second_moment(density, x0, steps, renormalize)


def moment_scan(
    theta1: float = math.pi / 3,
    theta2_min: float = -2 * math.pi,
    theta2_max: float = 2 * math.pi,
    points: int = 200,
    steps: int = 14,
    scattering: Optional[CavityScattering] = None,
    noise: Optional[NoiseModel] = None,
    realizations: int = 1,
    renormalize: bool = False,
    workers: int = 1,
    x0: int = 0,
    coin: tuple[complex, complex] = (1 / math.sqrt(2), 1 / math.sqrt(2)),
) -> MomentScan:
    """Finite-step moment against the infinite-step prediction along a theta2 cut.

    The analytic column is the closed form when ``theta1 == pi/3`` and the
    numerically integrated infinite-step limit otherwise. Lossy densities are
    used unnormalized unless ``renormalize`` is set.
    """
    if points < 2:
        raise ValidationError(f"points must be >= 2, got {points}")
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")
    sc = scattering or CavityScattering.ideal()
    grid = np.linspace(theta2_min, theta2_max, points)

    def numeric(i: int) -> float:
        return _scan_point(i, theta1, float(grid[i]), steps, sc, noise, realizations, renormalize, x0, coin)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            m_num = list(pool.map(numeric, range(points)))
    else:
        m_num = [numeric(i) for i in range(points)]

    if abs(theta1 - math.pi / 3) < 1e-12:
        m_an = [moment_closed_form(float(t)) for t in grid]
    else:
        m_an = [moment_infinite_limit(theta1, float(t)) for t in grid]
    return MomentScan(theta1, steps, grid, np.array(m_num), np.array(m_an))
