"""Command-line interface.

Subcommands: detuning-scan, sigma-sweep, witness, comb-spectrum,
validate-config.  Exit codes: 0 success, 2 configuration error, 3 numerical
or physicality failure.  The record seed comes from --seed, else the
OPO_SEED environment variable, else the config file.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .config import (
    ConfigError,
    RunMode,
    SweepKind,
    default_config,
    load_config,
    render_config,
)
from .gaussian import IncompleteCovarianceError, PhysicalityError
from .runner import run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_KIND_BY_COMMAND = {
    "detuning-scan": SweepKind.DETUNING_SCAN,
    "sigma-sweep": SweepKind.SIGMA_SWEEP,
    "witness": SweepKind.WITNESS_POINT,
    "comb-spectrum": SweepKind.COMB_SPECTRUM,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triopo",
        description="Above-threshold OPO quadrature-noise scans and "
                    "entanglement witnesses.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*_KIND_BY_COMMAND, "validate-config"):
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", default=None,
                       help="key=value config file (defaults when omitted)")
        if name != "validate-config":
            p.add_argument("--out", metavar="PATH", default=None,
                           help="output CSV path (overrides output_path)")
            p.add_argument("--seed", type=int, default=None,
                           help="record seed (wins over OPO_SEED and config)")
            p.add_argument("--mode", choices=[m.value for m in RunMode],
                           default=None)
    return parser


def _load(args, kind):
    if args.config is None:
        cfg = default_config(kind if kind is not None else SweepKind.DETUNING_SCAN)
        if kind is not None and cfg.sweep_kind is not kind:
            cfg = replace(cfg, sweep_kind=kind)
    else:
        cfg = load_config(args.config, kind)
    return cfg


def _resolve_seed(args, cfg):
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("OPO_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"OPO_SEED must be an integer, got {env!r}") from None
    return cfg.detection.seed


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate-config":
            cfg = _load(args, None)
            sys.stdout.write(render_config(cfg))
            print("config ok")
            return EXIT_OK
        kind = _KIND_BY_COMMAND[args.command]
        cfg = _load(args, kind)
        seed = _resolve_seed(args, cfg)
        cfg = replace(cfg, detection=replace(cfg.detection, seed=seed))
        if args.mode is not None:
            cfg = replace(cfg, mode=RunMode(args.mode))
        if args.out is not None:
            cfg = replace(cfg, output_path=args.out)

        table, report = run(cfg)
        table.to_csv(cfg.output_path)
        if report is not None:
            sys.stdout.write(report.to_key_value_block())
        print(f"wrote {len(table.rows)} row(s) to {cfg.output_path}")
        return EXIT_OK
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PhysicalityError, IncompleteCovarianceError, ValueError,
            FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
