"""Command line: ``aoi-contract {solve,sweep,validate,simulate,compare}``.

Exit codes: 0 all hard checks pass, 2 a soft (paper-setting) check failed,
1 a hard check failed or the run errored.
"""

from __future__ import annotations

import argparse
import os
import sys

from .aoi import LATENCY_MODELS
from .config import PRESETS, ConfigError, load_config
from .errors import DomainError, ResourceError
from .harness import (
    MC_SAMPLES,
    SWEEP_AXES,
    run_compare,
    run_simulate,
    run_solve,
    run_sweep,
    run_validate,
)

OUT_ENV = "AOI_CONTRACT_OUT"


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="JSON config (defaults when omitted)")
    p.add_argument("--preset", choices=sorted(PRESETS), help="override the config's preset")
    p.add_argument("--out", metavar="DIR", help=f"output directory (default ${OUT_ENV} or ./out)")
    p.add_argument("--seed", type=int, help="override run.seed")
    p.add_argument("--latency-model", choices=LATENCY_MODELS, help="override run.latency_model")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aoi-contract",
        description="Freshness-aware contract menus for federated-learning data workers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve EUT and PT menus and check them")
    _common(p)

    p = sub.add_parser("sweep", help="sweep one parameter and write sweep.csv")
    _common(p)
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument(
        "--values",
        help="comma-separated values (default: the config's sweep range for a/c)",
    )
    p.add_argument("--jobs", type=int, help="worker processes (results keep input order)")

    p = sub.add_parser("validate", help="run the oracle and invariant checks")
    _common(p)
    p.add_argument("--oracle", action="store_true", help="include the brute-force PT oracle")

    p = sub.add_parser("simulate", help="Monte Carlo latency/AoI over the sweep range")
    _common(p)
    p.add_argument("--samples", type=int, default=MC_SAMPLES)

    p = sub.add_parser("compare", help="compare CA, CC, CS and SG on one instance")
    _common(p)
    return parser


def _config(args):
    cfg = load_config(args.config, args.preset)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.latency_model is not None:
        changes["latency_model"] = args.latency_model
    return cfg.replace(**changes) if changes else cfg


def _values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values must be comma-separated numbers, got {text!r}") from None


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        out = args.out or cfg.out or os.environ.get(OUT_ENV) or "out"
        if args.command == "solve":
            outcome = run_solve(cfg, out)
        elif args.command == "sweep":
            if args.values:
                values = _values(args.values)
            elif args.axis in ("a", "c"):
                values = list(cfg.sweep)
            else:
                raise ConfigError(f"--values is required for axis {args.axis!r}")
            outcome = run_sweep(cfg, args.axis, values, out, jobs=args.jobs)
        elif args.command == "validate":
            outcome = run_validate(cfg, out, oracle=args.oracle or cfg.oracle)
        elif args.command == "simulate":
            outcome = run_simulate(cfg, out, samples=args.samples)
        else:
            outcome = run_compare(cfg, out)
    except (DomainError, ResourceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in outcome.files:
        print(f"wrote {path}")
    for line in outcome.failed():
        print(f"FAILED {line}", file=sys.stderr)
    return outcome.status


if __name__ == "__main__":
    sys.exit(main())
