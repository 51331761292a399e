"""Command-line interface.

Commands: simulate, propagation, linear-decay, kato, commutator-norms,
inequality, cutoff-check, sweep.  Common flags: --config PATH, --out DIR,
--seed N, --threads N.  Exit codes: 0 success, 2 validation failure,
3 numerical blow-up, 4 wrap contamination above threshold.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import (
    CommutatorParams,
    ConfigError,
    ExperimentConfig,
    InequalityParams,
    WindowParams,
    load_config,
)
from .experiments import EXIT_VALIDATION, cutoff_check_report, run, run_sweep

_CONFIG_KINDS = ("simulate", "propagation", "linear-decay", "kato")


def _add_common(parser, config_required=True):
    parser.add_argument("--config", required=config_required, help="path to the run config (INI)")
    parser.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--threads", type=int, default=None, help="thread-pool limit for linear algebra")


def build_parser():
    parser = argparse.ArgumentParser(prog="bozklab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"bozklab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for kind in _CONFIG_KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment from a config file")
        _add_common(p)
        if kind == "simulate":
            p.add_argument("--resume", default=None, help="directory holding a checkpoint to resume")

    p = sub.add_parser("commutator-norms", help="Ginibre-Velo remainder norms and empirical constants")
    _add_common(p, config_required=False)
    p.add_argument("--a", type=float, default=None, help="operator order a = 2*mu + 1")
    p.add_argument("--n", type=int, default=None, help="expansion truncation")
    p.add_argument("--b", type=float, default=None, help="outer derivative exponent")
    p.add_argument("--grid", default=None, help="comma list of 1-D grid sizes, e.g. 256,512,1024")
    p.add_argument("--h", dest="h_profile", default=None, help="multiplier profile, e.g. gaussian:3")
    p.add_argument("--box", type=float, default=None, help="1-D box length")

    p = sub.add_parser("inequality", help="randomized inequality-constant sweep")
    _add_common(p, config_required=False)
    p.add_argument("--kind", default=None, help="inequality kind (e.g. kato_ponce)")
    p.add_argument("--s", type=float, default=None, help="derivative order s")
    p.add_argument("--p", default=None, help="Lebesgue exponent (number or inf)")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--grid", dest="grid_n", type=int, default=None, help="1-D grid size")

    p = sub.add_parser("cutoff-check", help="property table for one cutoff family")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("sweep", help="dispatch several configs into one output tree")
    p.add_argument("--configs", nargs="+", required=True, help="config paths")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--threads", type=int, default=None)

    return parser


def _load(args, kind):
    if args.config:
        config = load_config(args.config)
        if config.kind != kind:
            raise ConfigError([f"experiment.kind: config declares {config.kind!r}, command is {kind!r}"])
    else:
        config = ExperimentConfig(kind=kind, raw_text="")
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    return config


def _print_violations(exc):
    print("configuration invalid:", file=sys.stderr)
    for violation in exc.violations:
        print(f"  - {violation}", file=sys.stderr)


def _cmd_config_kind(args, kind):
    try:
        config = _load(args, kind)
        resume = getattr(args, "resume", None)
        report = run(config, out_dir=args.out, threads=args.threads, resume=resume)
    except ConfigError as exc:
        _print_violations(exc)
        return EXIT_VALIDATION
    print(f"{kind}: exit {report.exit_code}; outputs in {report.out_dir}")
    return report.exit_code


def _cmd_commutator(args):
    try:
        config = _load(args, "commutator-norms")
        comm = config.commutator or CommutatorParams()
        overrides = {}
        if args.a is not None:
            overrides["a"] = args.a
        if args.n is not None:
            overrides["n"] = args.n
        if args.b is not None:
            overrides["b"] = args.b
        if args.grid is not None:
            overrides["grid_ns"] = tuple(int(tok) for tok in args.grid.split(","))
        if args.h_profile is not None:
            overrides["h_profile"] = args.h_profile
        if args.box is not None:
            overrides["box"] = args.box
        comm = replace(comm, **overrides)
        total = comm.a + 2.0 * comm.b
        if not (2 * comm.n + 1 <= total <= 2 * comm.n + 3):
            raise ConfigError([f"commutator: 2n+1 <= a+2b <= 2n+3 violated (a+2b={total:g})"])
        config = replace(config, commutator=comm)
        report = run(config, out_dir=args.out, threads=args.threads)
    except ConfigError as exc:
        _print_violations(exc)
        return EXIT_VALIDATION
    for row in report.manifest["results"]["rows"]:
        print(
            f"n1d={row['n1d']:>5}  C_emp={row['c_emp']:.6g}  ||op||={row['op_norm']:.6g}  "
            f"||hat(D^s h)||_L1={row['l1_norm']:.6g}  converged={row['converged']}"
        )
    factor = report.manifest["results"]["stability_factor"]
    if factor is not None:
        print(f"stability factor across grids: {factor:.4f}")
    return report.exit_code


def _cmd_inequality(args):
    try:
        config = _load(args, "inequality")
        ineq = config.inequality or InequalityParams()
        overrides = {}
        if args.kind is not None:
            overrides["kind"] = args.kind
        if args.s is not None:
            overrides["s"] = args.s
        if args.p is not None:
            overrides["p"] = float("inf") if args.p == "inf" else float(args.p)
        if args.trials is not None:
            overrides["trials"] = args.trials
        if args.grid_n is not None:
            overrides["grid_n"] = args.grid_n
        ineq = replace(ineq, **overrides)
        config = replace(config, inequality=ineq)
        report = run(config, out_dir=args.out, threads=args.threads)
    except ConfigError as exc:
        _print_violations(exc)
        return EXIT_VALIDATION
    res = report.manifest["results"]
    print(
        f"{res['kind']}: max ratio {res['max_ratio']:.6g} over {res['trials']} trials "
        f"({res['skipped']} skipped), n={res['grid_n']}, seed={res['seed']}"
    )
    return report.exit_code


def _cmd_cutoff_check(args):
    try:
        _, checks = cutoff_check_report(args.eps, args.b, samples=args.samples, tol=args.tol)
    except Exception as exc:
        print(f"cutoff-check failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    width = max(len(c.name) for c in checks)
    print(f"cutoff family eps={args.eps:g}, b={args.b:g}")
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"  {c.name:<{width}}  {status}  worst residual {c.worst:.3e}  ({c.description})")
    return 0 if all(c.passed for c in checks) else 1


def _cmd_sweep(args):
    configs = []
    try:
        for path in args.configs:
            configs.append((Path(path).stem, load_config(path)))
    except ConfigError as exc:
        _print_violations(exc)
        return EXIT_VALIDATION
    reports = run_sweep(configs, args.out, threads=args.threads, jobs=args.jobs)
    for (name, _), report in zip(configs, reports):
        print(f"{name}: exit {report.exit_code}; outputs in {report.out_dir}")
    return max((r.exit_code for r in reports), default=0)


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command in _CONFIG_KINDS:
        return _cmd_config_kind(args, args.command)
    if args.command == "commutator-norms":
        return _cmd_commutator(args)
    if args.command == "inequality":
        return _cmd_inequality(args)
    if args.command == "cutoff-check":
        return _cmd_cutoff_check(args)
    if args.command == "sweep":
        return _cmd_sweep(args)
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
