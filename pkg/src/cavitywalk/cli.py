"""
Command-line front end.

    cavitywalk walk --theta1 -0.25 --theta2 0.375 --theta1-right 0.75 --theta2-right -0.625
    cavitywalk winding --theta1 -0.25 --theta2 0.375
    cavitywalk moment-scan --steps 14 --points 200 --realistic

Angles are in units of pi. Each run writes its data files plus ``manifest.json``
into ``--out``. A manifest can be passed back through ``--config`` to repeat
the run. Exit codes: 0 success, 2 invalid configuration, 3 numeric failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
import time
from pathlib import Path
from typing import Any, Optional, Sequence

from pydantic import ValidationError as PydanticValidationError

from . import __version__
from .config import EXPERIMENT_KINDS, ExperimentConfig, load_config_file
from .errors import (
    CavityWalkError,
    LatticeOverflowError,
    NumericError,
    UndefinedInvariantError,
    UnsupportedConfigurationError,
    ValidationError,
)
from .experiments import run_experiment
from .io import write_json

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

_HELP = {
    "walk": "real-space walk; density snapshots every --snapshot-every steps",
    "boundary": "domain-wall walk plus boundary-mode count on a ring",
    "spectrum": "quasienergy bands of a homogeneous walk",
    "phase-diagram": "winding-number labels over [-2pi, 2pi]^2",
    "winding": "winding-number pair (nu0, nuPi) of a homogeneous walk",
    "moment-scan": "second-order moment along a theta2 cut",
    "eigs": "eigenphases of the dense ring operator",
}

# handled as common flags on every subcommand
_COMMON = {"kind", "seed", "out", "threads", "realistic"}


def _add_field_flags(parser: argparse.ArgumentParser) -> None:
    for name, info in ExperimentConfig.model_fields.items():
        if name in _COMMON:
            continue
        flag = "--" + name.replace("_", "-")
        default = info.default
        ann = str(info.annotation)
        if "bool" in ann:
            parser.add_argument(flag, dest=name, action=argparse.BooleanOptionalAction, default=None)
        elif "tuple" in ann:
            parser.add_argument(flag, dest=name, nargs=2, type=float, metavar=("RE", "IM"), default=None)
        elif "int" in ann and "float" not in ann:
            parser.add_argument(flag, dest=name, type=int, default=None, help=f"default: {default}")
        else:
            parser.add_argument(flag, dest=name, type=float, default=None, help=f"default: {default}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cavitywalk", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="kind", required=True, metavar="EXPERIMENT")
    for kind in EXPERIMENT_KINDS:
        p = sub.add_parser(kind, help=_HELP[kind])
        p.add_argument("--config", type=Path, default=None, help="JSON config or run manifest")
        p.add_argument("--seed", type=int, default=None, help="master seed (unsigned 64-bit)")
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None, help="worker threads for sweeps")
        p.add_argument("--realistic", action=argparse.BooleanOptionalAction, default=None,
                       help="lossy scattering 0.98e^{0.05i pi}/0.98e^{0.95i pi} and angle noise pi/20")
        _add_field_flags(p)
    return parser


def _fail(code: int, category: str, message: str) -> int:
    print(json.dumps({"error": category, "message": message}), file=sys.stderr)
    return code


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    data: dict[str, Any] = {}
    if args.config is not None:
        data = load_config_file(args.config)
        if data.get("kind", args.kind) != args.kind:
            raise ValueError(f"config kind {data['kind']!r} does not match subcommand {args.kind!r}")
    data["kind"] = args.kind
    for name in ExperimentConfig.model_fields:
        value = getattr(args, name, None)
        if name != "kind" and value is not None:
            data[name] = tuple(value) if isinstance(value, list) else value
    return ExperimentConfig(**data).resolved()


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except PydanticValidationError as exc:
        return _fail(EXIT_CONFIG, "invalid_config", str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, "io_error", str(exc))
    except ValueError as exc:
        return _fail(EXIT_CONFIG, "invalid_config", str(exc))

    started = _dt.datetime.now(_dt.timezone.utc)
    t0 = time.perf_counter()
    try:
        result = run_experiment(cfg)
        manifest = {
            "manifest_version": 1,
            "software_version": __version__,
            "config": cfg.model_dump(mode="json"),
            "seed": cfg.seed,
            "started_at": started.isoformat(),
            "wall_clock_seconds": time.perf_counter() - t0,
            "outputs": [p.name for p in result.files],
            "summary": result.summary,
        }
        write_json(manifest, Path(cfg.out) / "manifest.json")
    except (ValidationError, UnsupportedConfigurationError) as exc:
        return _fail(EXIT_CONFIG, "invalid_config", str(exc))
    except (NumericError, UndefinedInvariantError, LatticeOverflowError) as exc:
        return _fail(EXIT_NUMERIC, "numeric_failure", str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, "io_error", str(exc))
    except CavityWalkError as exc:
        return _fail(EXIT_NUMERIC, "numeric_failure", str(exc))

    print(json.dumps({"kind": cfg.kind, "out": cfg.out, "summary": result.summary}, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
