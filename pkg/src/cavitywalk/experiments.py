"""Experiment drivers behind the command-line subcommands."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .bloch import bloch_bands, gap, phase_diagram, winding_pair
from .config import ExperimentConfig
from .errors import UndefinedInvariantError
from .io import write_csv, write_json
from .model import DensityProfile
from .moments import moment_scan
from .spectral import build_dense_operator, detect_boundary_modes, eigenphases, ring_walls
from .walk import ensemble_average, evolve

__all__ = ["RunResult", "run_experiment"]


@dataclass
class RunResult:
    files: list[Path] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)


def _densities(cfg: ExperimentConfig) -> tuple[list[DensityProfile], list[float]]:
    walk = cfg.walk_config()
    if walk.noise is not None:
        result = ensemble_average(walk, cfg.realizations, cfg.threads)
        traj = result.trajectory
        return traj, [d.total() for d in traj]
    records = evolve(walk)
    return [r.density for r in records], [r.norm_sq for r in records]


def _snapshots(steps: int, every: int) -> list[int]:
    picks = list(range(0, steps + 1, every))
    if picks[-1] != steps:
        picks.append(steps)
    return picks


def _run_walk(cfg: ExperimentConfig, out: Path) -> RunResult:
    traj, norms = _densities(cfg)
    res = RunResult()
    peaks = {}
    for n in _snapshots(cfg.steps, cfg.snapshot_every):
        d = traj[n]
        res.files.append(write_csv(("x", "p"), zip(d.sites.tolist(), d.probabilities.tolist()),
                                   out / f"density_N{n:03d}.csv"))
        peaks[n] = d.argmax_site()
    res.files.append(write_csv(("step", "norm_sq"), enumerate(norms), out / "norms.csv"))
    res.summary = {"peak_site": peaks, "final_norm_sq": norms[-1]}
    return res


def _label_or_none(theta1: float, theta2: float) -> dict[str, int] | None:
    try:
        return winding_pair(theta1, theta2).as_dict()
    except UndefinedInvariantError:
        return None


def _run_boundary(cfg: ExperimentConfig, out: Path) -> RunResult:
    profile = cfg.profile()
    traj, norms = _densities(cfg)
    final = traj[-1]
    left, right = _label_or_none(*profile.left), _label_or_none(*profile.right)
    modes = eigenphases(build_dense_operator(cfg.ring_size, profile, cfg.scattering()))
    report = detect_boundary_modes(modes, ring_walls(cfg.ring_size, profile), cfg.e_tol,
                                   cfg.loc_threshold, cfg.radius)
    delta = None
    if left is not None and right is not None:
        delta = {"nu0": abs(left["nu0"] - right["nu0"]), "nuPi": abs(left["nuPi"] - right["nuPi"])}
    near = [final.at(x) for x in range(cfg.wall - 2, cfg.wall + 3)]
    data = {
        "labels": {"left": left, "right": right},
        "expected_per_wall": delta,
        "ring": report.as_dict(),
        "dynamics": {
            "steps": cfg.steps,
            "peak_site": final.argmax_site(),
            "peak_density": float(final.probabilities.max()),
            "density_near_wall": float(sum(near)),
            "norm_sq": norms[-1],
        },
    }
    res = RunResult()
    res.files.append(write_csv(("x", "p"), zip(final.sites.tolist(), final.probabilities.tolist()),
                               out / f"density_N{cfg.steps:03d}.csv"))
    res.files.append(write_json(data, out / "boundary.json"))
    res.summary = {"count_zero": report.count_zero, "count_pi": report.count_pi,
                   "expected_per_wall": delta, "peak_site": final.argmax_site()}
    return res


def _run_spectrum(cfg: ExperimentConfig, out: Path) -> RunResult:
    theta1, theta2 = cfg.theta1 * math.pi, cfg.theta2 * math.pi
    k = np.linspace(-math.pi, math.pi, cfg.k_samples, endpoint=False)
    energy = bloch_bands(theta1, theta2, k)[0]
    rows = zip((k / math.pi).tolist(), energy.tolist(), (-energy).tolist())
    g = gap(theta1, theta2, cfg.k_samples)
    data = {"gap0": g.gap0, "gapPi": g.gap_pi, "label": _label_or_none(theta1, theta2)}
    res = RunResult()
    res.files.append(write_csv(("k_over_pi", "e_plus", "e_minus"), rows, out / "bands.csv"))
    res.files.append(write_json(data, out / "spectrum.json"))
    res.summary = data
    return res


def _run_phase_diagram(cfg: ExperimentConfig, out: Path) -> RunResult:
    diagram = phase_diagram(cfg.resolution, cfg.threads)
    rows = []
    for i, t1 in enumerate(diagram.theta1):
        for j, t2 in enumerate(diagram.theta2):
            flag = bool(diagram.boundary[i, j])
            nu0 = None if flag else int(diagram.nu0[i, j])
            nupi = None if flag else int(diagram.nu_pi[i, j])
            rows.append((t1 / math.pi, t2 / math.pi, nu0, nupi, flag))
    res = RunResult()
    res.files.append(write_csv(("theta1_over_pi", "theta2_over_pi", "nu0", "nuPi", "boundary_flag"),
                               rows, out / "phase_diagram.csv"))
    res.summary = {"cells": len(rows), "boundary_cells": int(diagram.boundary.sum())}
    return res


def _run_winding(cfg: ExperimentConfig, out: Path) -> RunResult:
    label = winding_pair(cfg.theta1 * math.pi, cfg.theta2 * math.pi).as_dict()
    res = RunResult()
    res.files.append(write_json(label, out / "winding.json"))
    res.summary = label
    return res


def _run_moment_scan(cfg: ExperimentConfig, out: Path) -> RunResult:
    scan = moment_scan(
        theta1=cfg.theta1 * math.pi,
        theta2_min=cfg.theta2_min * math.pi,
        theta2_max=cfg.theta2_max * math.pi,
        points=cfg.points,
        steps=cfg.steps,
        scattering=cfg.scattering(),
        noise=cfg.noise(),
        realizations=cfg.realizations,
        renormalize=cfg.renormalize,
        workers=cfg.threads,
        x0=cfg.x0,
        coin=cfg.coin(),
    )
    rows = [(t / math.pi, m, a) for t, m, a in scan.rows()]
    res = RunResult()
    res.files.append(write_csv(("theta2_over_pi", "m_numeric", "m_analytic"), rows, out / "moment_scan.csv"))
    res.summary = {"max_abs_difference": float(np.max(np.abs(scan.m_numeric - scan.m_analytic)))}
    return res


def _run_eigs(cfg: ExperimentConfig, out: Path) -> RunResult:
    modes = eigenphases(build_dense_operator(cfg.ring_size, cfg.profile(), cfg.scattering()))
    rows = [(i, m.quasienergy, m.modulus, m.center, m.localization_length) for i, m in enumerate(modes)]
    res = RunResult()
    res.files.append(write_csv(("index", "quasienergy", "modulus", "center", "localization_length"),
                               rows, out / "eigs.csv"))
    res.summary = {"modes": len(modes)}
    return res


_RUNNERS: dict[str, Callable[[ExperimentConfig, Path], RunResult]] = {
    "walk": _run_walk,
    "boundary": _run_boundary,
    "spectrum": _run_spectrum,
    "phase-diagram": _run_phase_diagram,
    "winding": _run_winding,
    "moment-scan": _run_moment_scan,
    "eigs": _run_eigs,
}


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Run a resolved config, writing outputs into ``cfg.out``."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return _RUNNERS[cfg.kind](cfg, out)

