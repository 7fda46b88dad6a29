"""
Momentum-space analysis of the homogeneous walk.

With plane waves ``|k> = sum_x exp(ikx)|x>`` the translation becomes
``T(k) = diag(exp(-ik), -exp(ik))`` and the Bloch operator

    U(k) = R_y(theta1/2) T(k) R_y(theta2) T(k) R_y(theta1/2)

has half-trace ``cos E(k) = cos(t2/2) cos(t1/2) cos 2k + sin(t2/2) sin(t1/2)``.
The closed-form Bloch vector used here,

    n_y = (cos(t2/2) sin(t1/2) cos 2k - sin(t2/2) cos(t1/2)) / sin E
    n_z = -cos(t2/2) sin 2k / sin E

is the one of ``U(-k)``: with the plane-wave sign above, ``U(k)`` itself has
the opposite ``n_z``. Both conventions give the same spectrum; the winding
combination below is fixed so that the invariants come out in the standard
labelling used throughout the package.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import minimize_scalar

from .errors import UndefinedInvariantError, ValidationError

__all__ = [
    "BlochData",
    "Gaps",
    "PhaseLabel",
    "PhaseDiagram",
    "rotation_y",
    "bloch_operator",
    "cos_quasienergy",
    "quasienergy_and_vector",
    "bloch_bands",
    "gap",
    "frame_winding",
    "winding_pair",
    "phase_diagram",
]

DEGENERATE_SIN_E = 1e-8
GAP_TOL = 1e-6
BOUNDARY_GAP = 1e-3
WINDING_SAMPLES = 4096


@dataclass(frozen=True)
class BlochData:
    """Quasienergy ``E`` in [0, pi] and unit vector ``n`` at quasimomentum ``k``.

    ``n`` is ``None`` where ``sin E`` drops below 1e-8 (band touching).
    """

    k: float
    E: float
    n: tuple[float, float, float] | None

    @property
    def defined(self) -> bool:
        return self.n is not None


@dataclass(frozen=True)
class Gaps:
    gap0: float
    gap_pi: float

    def __iter__(self):
        return iter((self.gap0, self.gap_pi))


@dataclass(frozen=True)
class PhaseLabel:
    nu0: int
    nu_pi: int

    def as_dict(self) -> dict[str, int]:
        return {"nu0": self.nu0, "nuPi": self.nu_pi}

    def __iter__(self):
        return iter((self.nu0, self.nu_pi))


@dataclass(frozen=True)
class PhaseDiagram:
    """Labels on a square grid; ``boundary[i, j]`` marks gapless cells (labels 0 there).

    Index ``i`` runs over ``theta1`` and ``j`` over ``theta2``.
    """

    theta1: NDArray[np.float64]
    theta2: NDArray[np.float64]
    nu0: NDArray[np.int64]
    nu_pi: NDArray[np.int64]
    boundary: NDArray[np.bool_]


def rotation_y(angle: ArrayLike) -> NDArray[np.complex128]:
    """``exp(-i sigma_y angle/2)`` with shape ``angle.shape + (2, 2)``."""
    angle = np.asarray(angle, dtype=float)
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2).astype(np.complex128)


def _translation_k(k: NDArray[np.float64], r_R: complex, t_L: complex) -> NDArray[np.complex128]:
    out = np.zeros(k.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = r_R * np.exp(-1j * k)
    out[..., 1, 1] = t_L * np.exp(1j * k)
    return out


def bloch_operator(
    theta1: float, theta2: float, k: ArrayLike, r_R: complex = 1.0, t_L: complex = -1.0
) -> NDArray[np.complex128]:
    """One-step operator at quasimomentum ``k``; broadcasts over an array of ``k``."""
    k = np.asarray(k, dtype=float)
    half = rotation_y(theta1 / 2)
    mid = rotation_y(theta2)
    t = _translation_k(k, r_R, t_L)
    return half @ t @ mid @ t @ half


def cos_quasienergy(theta1: float, theta2: float, k: ArrayLike) -> NDArray[np.float64]:
    c1, s1 = math.cos(theta1 / 2), math.sin(theta1 / 2)
    c2, s2 = math.cos(theta2 / 2), math.sin(theta2 / 2)
    return c2 * c1 * np.cos(2 * np.asarray(k, dtype=float)) + s2 * s1


def bloch_bands(theta1: float, theta2: float, k: ArrayLike):
    """Vectorized ``(E, n_y, n_z, defined)`` over an array of ``k``.

    Entries of ``n_y``, ``n_z`` are NaN where ``defined`` is False.
    """
    k = np.asarray(k, dtype=float)
    c1, s1 = math.cos(theta1 / 2), math.sin(theta1 / 2)
    c2, s2 = math.cos(theta2 / 2), math.sin(theta2 / 2)
    cos_e = np.clip(c2 * c1 * np.cos(2 * k) + s2 * s1, -1.0, 1.0)
    num_y = c2 * s1 * np.cos(2 * k) - s2 * c1
    num_z = -c2 * np.sin(2 * k)
    # num_y^2 + num_z^2 == sin^2 E exactly; avoids cancellation in 1 - cos^2 E near band touchings
    sin_e = np.hypot(num_y, num_z)
    energy = np.arctan2(sin_e, cos_e)
    defined = sin_e >= DEGENERATE_SIN_E
    safe = np.where(defined, sin_e, 1.0)
    n_y = np.where(defined, num_y / safe, np.nan)
    n_z = np.where(defined, num_z / safe, np.nan)
    return energy, n_y, n_z, defined


def quasienergy_and_vector(theta1: float, theta2: float, k: float) -> BlochData:
    energy, n_y, n_z, defined = bloch_bands(theta1, theta2, np.array([k]))
    n = (0.0, float(n_y[0]), float(n_z[0])) if defined[0] else None
    return BlochData(float(k), float(energy[0]), n)


def gap(theta1: float, theta2: float, k_samples: int = 256) -> Gaps:
    """Minimum distance of the bands from quasienergy 0 and from pi.

    Samples ``k`` on [0, pi) (the bands depend on ``2k`` only) and refines the
    best sample of each gap with a bounded scalar minimization.
    """
    if k_samples < 64:
        raise ValidationError(f"k_samples must be >= 64, got {k_samples}")
    ks = np.linspace(0.0, math.pi, k_samples, endpoint=False)
    energy = bloch_bands(theta1, theta2, ks)[0]
    h = math.pi / k_samples

    def refine(f, values):
        i = int(np.argmin(values))
        best = float(values[i])
        res = minimize_scalar(f, bounds=(ks[i] - h, ks[i] + h), method="bounded",
                              options={"xatol": 1e-12})
        return max(0.0, min(best, float(res.fun)))

    e_of = lambda k: float(bloch_bands(theta1, theta2, np.array([k]))[0][0])  # noqa: E731
    gap0 = refine(e_of, energy)
    gap_pi = refine(lambda k: math.pi - e_of(k), math.pi - energy)
    return Gaps(gap0, gap_pi)


def frame_winding(theta1: float, theta2: float, samples: int = WINDING_SAMPLES) -> float:
    """Winding of ``(n_y, n_z)`` around the origin as ``k`` runs over [-pi, pi).

    Returns the raw accumulated angle divided by 2pi (an integer up to rounding).
    """
    ks = np.linspace(-math.pi, math.pi, samples, endpoint=False)
    _, n_y, n_z, defined = bloch_bands(theta1, theta2, ks)
    if not np.all(defined):
        raise UndefinedInvariantError(
            f"Bloch vector degenerate at theta=({theta1}, {theta2}); the spectrum is gapless"
        )
    phi = np.arctan2(n_z, n_y)
    phi = np.unwrap(np.append(phi, phi[0]))
    return float((phi[-1] - phi[0]) / (2 * math.pi))


def _stable_winding(theta1: float, theta2: float) -> int:
    samples = WINDING_SAMPLES
    previous = round(frame_winding(theta1, theta2, samples))
    while True:
        samples *= 2
        current = round(frame_winding(theta1, theta2, samples))
        if current == previous or samples > 2**20:
            return current
        previous = current


def winding_pair(theta1: float, theta2: float) -> PhaseLabel:
    """Invariants ``(nu0, nu_pi)`` of the homogeneous walk.

    ``nu_a`` is the winding in the frame that splits ``theta1`` and ``nu_b`` the
    one in the frame that splits ``theta2`` (same formula, angles swapped).
    Then ``nu0 = (nu_a - nu_b)/2`` and ``nu_pi = (nu_a + nu_b)/2``.
    """
    g0, gpi = gap(theta1, theta2)
    if g0 <= GAP_TOL or gpi <= GAP_TOL:
        raise UndefinedInvariantError(
            f"winding numbers undefined at theta=({theta1}, {theta2}): gaps ({g0:.3g}, {gpi:.3g})"
        )
    nu_a = _stable_winding(theta1, theta2)
    nu_b = _stable_winding(theta2, theta1)
    if (nu_a - nu_b) % 2:
        raise UndefinedInvariantError(f"frame windings {nu_a}, {nu_b} have different parity")
    return PhaseLabel((nu_a - nu_b) // 2, (nu_a + nu_b) // 2)


def _diagram_cell(theta1: float, theta2: float) -> tuple[int, int, bool]:
    g0, gpi = gap(theta1, theta2, 64)
    if g0 < BOUNDARY_GAP or gpi < BOUNDARY_GAP:
        return 0, 0, True
    label = winding_pair(theta1, theta2)
    return label.nu0, label.nu_pi, False


def phase_diagram(resolution: int = 64, workers: int = 1) -> PhaseDiagram:
    """Winding labels on a ``resolution x resolution`` grid over [-2pi, 2pi]^2."""
    if resolution < 16:
        raise ValidationError(f"resolution must be >= 16, got {resolution}")
    axis = np.linspace(-2 * math.pi, 2 * math.pi, resolution)

    def row(t1: float) -> list[tuple[int, int, bool]]:
        return [_diagram_cell(t1, t2) for t2 in axis]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, axis))
    else:
        rows = [row(t1) for t1 in axis]
    cells = np.array(rows, dtype=object)
    return PhaseDiagram(
        axis.copy(),
        axis.copy(),
        cells[..., 0].astype(np.int64),
        cells[..., 1].astype(np.int64),
        cells[..., 2].astype(bool),
    )
