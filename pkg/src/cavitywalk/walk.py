"""
Real-space evolution of the split-coin walk.

One step applies, right to left,

    U = R_y(theta1/2) T R_y(theta2) T R_y(theta1/2)

where ``R_y(a) = exp(-i sigma_y a/2)`` acts site by site and ``T`` moves the
R component one site right (times ``r_R``) and the L component one site left
(times ``t_L``).

Noise draws come from Philox streams keyed by
``(realization_seed, step, layer)``; each stream yields one uniform offset per
window site in ascending site order (or a single offset when the noise model is
global). ``realization_seed`` is itself derived from ``(master_seed, r)``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Literal, Optional

import numpy as np
from numpy.typing import NDArray

from .errors import LatticeOverflowError, ValidationError
from .model import (
    CavityScattering,
    CoinProfile,
    DensityProfile,
    NoiseModel,
    SpinorField,
    WalkConfig,
    photon_density,
)

__all__ = [
    "StepRecord",
    "EnsembleResult",
    "apply_coin",
    "apply_translation",
    "walk_step",
    "iter_states",
    "evolve",
    "final_state",
    "ensemble_average",
    "realization_seed",
    "derive_seed",
    "noise_offsets",
]

AngleSelector = Literal["theta1_half", "theta2"]

# rotation layers of one step, in application order
LAYERS: tuple[AngleSelector, ...] = ("theta1_half", "theta2", "theta1_half")


@dataclass(frozen=True)
class StepRecord:
    step: int
    density: DensityProfile
    norm_sq: float


@dataclass(frozen=True)
class EnsembleResult:
    """Mean densities over noise realizations.

    ``density`` is the mean final density; ``trajectory[n]`` the mean density
    after ``n`` steps. ``seeds[r]`` is the derived seed of realization ``r``.
    """

    density: DensityProfile
    trajectory: list[DensityProfile]
    seeds: list[int]


def derive_seed(*keys: int) -> int:
    """Hash a tuple of non-negative integers into a 64-bit seed."""
    ss = np.random.SeedSequence([int(k) for k in keys])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def realization_seed(master_seed: int, realization: int) -> int:
    """64-bit seed of one noise realization, derived from the master seed."""
    return derive_seed(master_seed, realization)


def noise_offsets(noise: NoiseModel, seed: int, step: int, layer: int, n_sites: int) -> NDArray[np.float64]:
    """Uniform angle offsets on (-delta_max, delta_max) for one rotation layer."""
    bitgen = np.random.Philox(np.random.SeedSequence([int(seed), int(step), int(layer)]))
    rng = np.random.Generator(bitgen)
    if noise.per_site:
        return rng.uniform(-noise.delta_max, noise.delta_max, n_sites)
    return np.full(n_sites, rng.uniform(-noise.delta_max, noise.delta_max))


def apply_coin(
    state: SpinorField,
    profile: CoinProfile,
    angle_selector: AngleSelector,
    noise_draws: Optional[NDArray[np.float64]] = None,
) -> SpinorField:
    """Rotate the coin at every site by ``R_y`` of the selected angle (plus noise)."""
    theta1, theta2 = profile.angles_at(state.sites)
    if angle_selector == "theta1_half":
        angle = theta1 / 2
    elif angle_selector == "theta2":
        angle = theta2
    else:
        raise ValidationError(f"unknown angle selector {angle_selector!r}")
    if noise_draws is not None:
        if len(noise_draws) != state.size:
            raise ValidationError("noise_draws length does not match the lattice window")
        angle = angle + noise_draws
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    a = state.amplitudes
    out = np.empty_like(a)
    out[:, 0] = c * a[:, 0] - s * a[:, 1]
    out[:, 1] = s * a[:, 0] + c * a[:, 1]
    return state.with_amplitudes(out)


def apply_translation(state: SpinorField, scattering: CavityScattering) -> SpinorField:
    """Cavity-mediated shift: ``a(x,R) -> r_R a(x+1,R)``, ``a(x,L) -> t_L a(x-1,L)``."""
    a = state.amplitudes
    out = np.zeros_like(a)
    if state.periodic:
        out[:, 0] = scattering.r_R * np.roll(a[:, 0], 1)
        out[:, 1] = scattering.t_L * np.roll(a[:, 1], -1)
    else:
        if np.any(a[0] != 0) or np.any(a[-1] != 0):
            raise LatticeOverflowError(
                f"amplitude on the window edge sites {state.origin_offset} or "
                f"{state.origin_offset + state.size - 1}; the lattice window is too small"
            )
        out[1:, 0] = scattering.r_R * a[:-1, 0]
        out[:-1, 1] = scattering.t_L * a[1:, 1]
    return state.with_amplitudes(out)


def walk_step(
    state: SpinorField,
    config: WalkConfig,
    step_index: int = 0,
    seed: Optional[int] = None,
) -> SpinorField:
    """Apply one full step ``R_y(theta1/2) T R_y(theta2) T R_y(theta1/2)``.

    ``step_index`` and ``seed`` only select the noise substreams; they are
    ignored when the config has no active noise model.
    """
    noise = config.noise if config.noise is not None and config.noise.active else None
    if noise is not None and seed is None:
        seed = realization_seed(noise.master_seed, 0)

    def draws(layer: int) -> Optional[NDArray[np.float64]]:
        if noise is None:
            return None
        return noise_offsets(noise, seed, step_index, layer, state.size)

    psi = apply_coin(state, config.profile, LAYERS[0], draws(0))
    psi = apply_translation(psi, config.scattering)
    psi = apply_coin(psi, config.profile, LAYERS[1], draws(1))
    psi = apply_translation(psi, config.scattering)
    return apply_coin(psi, config.profile, LAYERS[2], draws(2))


def iter_states(config: WalkConfig, seed: Optional[int] = None) -> Iterator[SpinorField]:
    """Yield the state after 0, 1, ..., ``config.steps`` steps."""
    if seed is None and config.noise is not None:
        seed = realization_seed(config.noise.master_seed, 0)
    psi = config.initial_state()
    yield psi
    for n in range(config.steps):
        psi = walk_step(psi, config, n, seed)
        yield psi


def evolve(config: WalkConfig, seed: Optional[int] = None) -> list[StepRecord]:
    """Run the walk and return ``steps + 1`` records, record 0 being the initial density."""
    return [
        StepRecord(n, photon_density(psi, n), psi.norm_sq())
        for n, psi in enumerate(iter_states(config, seed))
    ]


def final_state(config: WalkConfig, seed: Optional[int] = None) -> SpinorField:
    psi = None
    for psi in iter_states(config, seed):
        pass
    return psi


def _batch_trajectories(config: WalkConfig, seeds: list[int]) -> NDArray[np.float64]:
    """Densities of several realizations at once, shape ``(R, steps + 1, n_sites)``.

    Same arithmetic as ``walk_step`` applied element by element, so each slice
    is bit-identical to ``evolve(config, seed)``.
    """
    psi0 = config.initial_state()
    sites = psi0.sites
    n_sites = psi0.size
    theta1, theta2 = config.profile.angles_at(sites)
    base = {"theta1_half": theta1 / 2, "theta2": theta2}
    r_r, t_l = config.scattering.r_R, config.scattering.t_L
    noise = config.noise if config.noise is not None and config.noise.active else None

    a = np.broadcast_to(psi0.amplitudes, (len(seeds), n_sites, 2)).copy()
    out = np.empty((len(seeds), config.steps + 1, n_sites))
    out[:, 0] = np.sum(np.abs(a) ** 2, axis=-1)
    for n in range(config.steps):
        for layer, selector in enumerate(LAYERS):
            angle = base[selector]
            if noise is not None:
                angle = angle + np.stack([noise_offsets(noise, s, n, layer, n_sites) for s in seeds])
            c, s_ = np.cos(angle / 2), np.sin(angle / 2)
            a = np.stack([c * a[..., 0] - s_ * a[..., 1], s_ * a[..., 0] + c * a[..., 1]], axis=-1)
            if layer < 2:
                if np.any(a[:, 0] != 0) or np.any(a[:, -1] != 0):
                    raise LatticeOverflowError("amplitude reached the lattice window edge")
                shifted = np.zeros_like(a)
                shifted[:, 1:, 0] = r_r * a[:, :-1, 0]
                shifted[:, :-1, 1] = t_l * a[:, 1:, 1]
                a = shifted
        out[:, n + 1] = np.sum(np.abs(a) ** 2, axis=-1)
    return out


def ensemble_average(config: WalkConfig, realizations: int, workers: int = 1) -> EnsembleResult:
    """Average densities over ``realizations`` independent noise draws.

    Realization ``r`` uses ``realization_seed(master_seed, r)``, so results do
    not depend on ``workers`` or on scheduling order.
    """
    if realizations < 1:
        raise ValidationError(f"realizations must be >= 1, got {realizations}")
    master = config.noise.master_seed if config.noise is not None else 0
    seeds = [realization_seed(master, r) for r in range(realizations)]
    if config.noise is None or not config.noise.active:
        # every realization is identical; skip the sum so the mean stays bit-exact
        batches = [_batch_trajectories(config, seeds[:1])]
        realizations = 1
    elif workers > 1:
        index = [np.arange(i, realizations, workers) for i in range(min(workers, realizations))]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda idx: _batch_trajectories(config, [seeds[i] for i in idx]), index))
        # back to realization order so the running sum below is schedule independent
        batches = [np.concatenate(parts)[np.argsort(np.concatenate(index))]]
    else:
        batches = [_batch_trajectories(config, seeds)]
    trajectories = np.concatenate(batches)
    total = np.zeros_like(trajectories[0])
    for t in trajectories:
        total += t
    mean = total / realizations
    origin = config.x0 - config.lattice_halfwidth
    traj = [DensityProfile(origin, np.clip(row, 0, None), n) for n, row in enumerate(mean)]
    return EnsembleResult(traj[-1], traj, seeds)
