"""Command-line front end: `simulate` runs a Monte Carlo sweep and writes the
report; `complexity` prints the estimation multiplication count."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import (
    ConfigError,
    DEFAULT_KAPPA_SWEEP_DB,
    SWEEP_VARIABLES,
    SweepSpec,
    SystemConfig,
    load_config,
    smoke_preset,
)
from .experiment import complexity_count, run_sweep, write_report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpdftsim",
        description="Link-level Monte Carlo simulator for CSIT-free unitary "
        "precoding in high-mobility mmWave MU-MISO downlink",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo sweep")
    sim.add_argument("--config", help="JSON or key=value config file")
    sim.add_argument("--sweep", choices=SWEEP_VARIABLES, default=None,
                     help="swept variable (default: kappa)")
    sim.add_argument("--values", default=None,
                     help="comma-separated sweep values "
                          "(kappa in dB, power in dBm, speed in m/s, q as size)")
    sim.add_argument("--out", required=True, help="output report path")
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    sim.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    sim.add_argument("--trials", type=int, default=None, help="override trials per point")
    sim.add_argument("--preset", choices=("paper", "smoke"), default=None)
    sim.add_argument("--threads", type=int, default=1)

    comp = sub.add_parser("complexity", help="print the multiplication count")
    comp.add_argument("--L", type=int, required=True, help="number of subcarriers")
    comp.add_argument("--Q", type=int, required=True, help="codebook resolution")
    comp.add_argument("--N", type=int, required=True, help="number of antennas/blocks")
    return parser


def _build_spec(args) -> SweepSpec:
    if args.config:
        cfg, spec = load_config(args.config)
    else:
        cfg = SystemConfig()
        spec = SweepSpec(
            variable="kappa",
            values=tuple(DEFAULT_KAPPA_SWEEP_DB),
            trials=cfg.trials,
            base=cfg,
        )
    if args.preset == "smoke":
        cfg = smoke_preset(spec.base)
        spec = SweepSpec(variable=spec.variable, values=spec.values,
                         trials=cfg.trials, base=cfg)
    variable = args.sweep or spec.variable
    if args.values is not None:
        try:
            values = tuple(float(v) for v in args.values.split(","))
        except ValueError:
            raise ConfigError(f"--values: cannot parse '{args.values}'")
    elif variable == spec.variable:
        values = spec.values
    elif variable == "kappa":
        values = tuple(DEFAULT_KAPPA_SWEEP_DB)
    else:
        raise ConfigError(f"--values is required for sweep variable '{variable}'")
    cfg = spec.base
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    trials = args.trials if args.trials is not None else spec.trials
    if args.trials is not None:
        cfg = replace(cfg, trials=args.trials)
    return SweepSpec(variable=variable, values=values, trials=trials, base=cfg)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "complexity":
            print(complexity_count(args.L, args.Q, args.N))
            return 0
        spec = _build_spec(args)
        report = run_sweep(spec, threads=max(1, args.threads))
        write_report(report, args.out, fmt=args.format)
        return 0
    except (ConfigError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
