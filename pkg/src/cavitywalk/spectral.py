"""
Dense one-step operator on a ring and boundary-mode detection.

The ring has ``L`` sites ``x = -L/2, ..., L/2 - 1`` (flattened index
``2*(x + L/2) + c``). Sites ``x < wall`` carry the left angles, so the ring
has one domain wall at ``wall`` and a second one where ``-L/2`` meets
``L/2 - 1``. The matrix is assembled from explicit block matrices and shares
no code with the array-based real-space engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import NumericError, ValidationError
from .model import CavityScattering, CoinProfile

__all__ = [
    "EigenMode",
    "WallReport",
    "BoundaryReport",
    "ring_sites",
    "ring_walls",
    "build_dense_operator",
    "eigenphases",
    "detect_boundary_modes",
]


@dataclass(frozen=True)
class EigenMode:
    quasienergy: float
    eigenvalue: complex
    vector: NDArray[np.complex128] = field(repr=False)
    center: int
    localization_length: float

    @property
    def modulus(self) -> float:
        return abs(self.eigenvalue)


@dataclass(frozen=True)
class WallReport:
    wall: int
    count_zero: int
    count_pi: int
    weights_zero: list[float]
    weights_pi: list[float]


@dataclass(frozen=True)
class BoundaryReport:
    walls: list[WallReport]
    candidates_zero: int
    candidates_pi: int

    @property
    def count_zero(self) -> int:
        return sum(w.count_zero for w in self.walls)

    @property
    def count_pi(self) -> int:
        return sum(w.count_pi for w in self.walls)

    def as_dict(self) -> dict:
        return {
            "count_zero": self.count_zero,
            "count_pi": self.count_pi,
            "candidates_zero": self.candidates_zero,
            "candidates_pi": self.candidates_pi,
            "walls": [
                {
                    "wall": w.wall,
                    "count_zero": w.count_zero,
                    "count_pi": w.count_pi,
                    "weights_zero": w.weights_zero,
                    "weights_pi": w.weights_pi,
                }
                for w in self.walls
            ],
        }


def ring_sites(size: int) -> NDArray[np.int64]:
    return np.arange(-(size // 2), size - size // 2)


def ring_walls(size: int, profile: CoinProfile) -> list[int]:
    return [profile.wall_position, -(size // 2)]


def _ry(angle: float) -> NDArray[np.complex128]:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def build_dense_operator(
    size: int, profile: CoinProfile, scattering: Optional[CavityScattering] = None
) -> NDArray[np.complex128]:
    """``2L x 2L`` matrix of one walk step on a ring of ``size`` sites."""
    if size % 2 or size < 8:
        raise ValidationError(f"ring size must be even and >= 8, got {size}")
    half = size // 2
    if not -half < profile.wall_position < half:
        raise ValidationError(f"wall position {profile.wall_position} must lie inside the ring")
    sc = scattering or CavityScattering.ideal()
    xs = ring_sites(size)
    dim = 2 * size

    coin_half = np.zeros((dim, dim), dtype=np.complex128)
    coin_mid = np.zeros((dim, dim), dtype=np.complex128)
    for i, x in enumerate(xs):
        theta1, theta2 = profile.left if x < profile.wall_position else profile.right
        coin_half[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = _ry(theta1 / 2)
        coin_mid[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = _ry(theta2)

    shift = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(size):
        shift[2 * ((i + 1) % size), 2 * i] = sc.r_R
        shift[2 * ((i - 1) % size) + 1, 2 * i + 1] = sc.t_L

    return coin_half @ shift @ coin_mid @ shift @ coin_half


def _localization(prob: NDArray[np.float64], xs: NDArray[np.int64]) -> tuple[int, float]:
    size = len(xs)
    i0 = int(np.argmax(prob))
    dist = np.abs(np.arange(size) - i0)
    dist = np.minimum(dist, size - dist)
    # fit within a quarter ring of the peak; degenerate modes may carry weight at the other wall
    mask = (prob > 1e-14) & (dist <= size // 4)
    if mask.sum() < 3 or np.ptp(dist[mask]) == 0:
        return int(xs[i0]), math.inf
    slope = np.polyfit(dist[mask], np.log(prob[mask]), 1)[0]
    length = -1.0 / slope if slope < 0 else math.inf
    return int(xs[i0]), float(length)


def eigenphases(matrix: NDArray[np.complex128], sites: Optional[Sequence[int]] = None) -> list[EigenMode]:
    """Full eigendecomposition, sorted by quasienergy ``E = -arg(lambda)`` in (-pi, pi]."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] % 2:
        raise ValidationError(f"expected a square matrix of even dimension, got {matrix.shape}")
    size = matrix.shape[0] // 2
    xs = ring_sites(size) if sites is None else np.asarray(sites)
    try:
        values, vectors = np.linalg.eig(matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed on a {matrix.shape} matrix: {exc}") from exc
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(vectors))):
        raise NumericError("eigensolver returned non-finite values")
    energies = -np.angle(values)
    energies = np.where(energies <= -math.pi, math.pi, energies)
    modes = []
    for j in np.argsort(energies, kind="stable"):
        v = vectors[:, j] / np.linalg.norm(vectors[:, j])
        prob = np.sum(np.abs(v.reshape(size, 2)) ** 2, axis=1)
        center, length = _localization(prob, xs)
        modes.append(EigenMode(float(energies[j]), complex(values[j]), v, center, length))
    return modes


def _wall_weights(basis: NDArray[np.complex128], near: NDArray[np.bool_]) -> list[float]:
    # eigenvalues of the wall projector inside the selected subspace
    block = basis[np.repeat(near, 2)]
    return sorted(np.linalg.eigvalsh(block.conj().T @ block).tolist(), reverse=True)


def detect_boundary_modes(
    modes: Sequence[EigenMode],
    walls: Sequence[int],
    e_tol: float = 0.05,
    loc_threshold: float = 0.5,
    radius: int = 4,
    sites: Optional[Sequence[int]] = None,
) -> BoundaryReport:
    """Count modes near quasienergy 0 and pi that sit on each wall.

    Modes at 0 (and separately at pi) are degenerate across walls, so single
    eigenvectors may be spread over both. The candidates are therefore
    treated as a subspace: a wall hosts as many boundary modes as the
    projector onto sites within ``radius`` of it has eigenvalues of at least
    ``loc_threshold`` inside that subspace.
    """
    if not modes:
        raise ValidationError("no modes given")
    size = len(modes[0].vector) // 2
    xs = ring_sites(size) if sites is None else np.asarray(sites)
    energies = np.array([m.quasienergy for m in modes])
    at_zero = np.abs(energies) < e_tol
    at_pi = np.abs(math.pi - np.abs(energies)) < e_tol

    def subspace(mask: NDArray[np.bool_]) -> Optional[NDArray[np.complex128]]:
        if not mask.any():
            return None
        stacked = np.stack([m.vector for m, keep in zip(modes, mask) if keep], axis=1)
        q, _ = np.linalg.qr(stacked)
        return q

    zero_basis, pi_basis = subspace(at_zero), subspace(at_pi)
    reports = []
    for wall in walls:
        d = np.abs(xs - wall)
        d = np.minimum(d, size - d)
        near = d <= radius
        w0 = _wall_weights(zero_basis, near) if zero_basis is not None else []
        wpi = _wall_weights(pi_basis, near) if pi_basis is not None else []
        reports.append(
            WallReport(
                int(wall),
                sum(w >= loc_threshold for w in w0),
                sum(w >= loc_threshold for w in wpi),
                [round(max(w, 0.0), 12) for w in w0],
                [round(max(w, 0.0), 12) for w in wpi],
            )
        )
    return BoundaryReport(reports, int(at_zero.sum()), int(at_pi.sum()))
