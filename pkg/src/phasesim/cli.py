"""
Command-line front end.

    phasesim simulate  [--total-photons N --beta-s B --beta-p B ...]
    phasesim density   --method {closed,quadrature,fock} [...]
    phasesim sweep     --n-values 100 1000 10000 [...]
    phasesim validate

Exit codes: 0 success, 1 validation failure, 2 bad arguments,
3 infeasible budget or numerical overflow.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

from . import distributions as dist
from . import io
from . import phasespace as ps
from . import simulate as sim
from . import validate

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3

DEFAULT_N, DEFAULT_BETA_S, DEFAULT_BETA_P = 2.0, 0.5, 0.25


class UsageError(Exception):
    pass


def default_seed() -> int:
    env = os.environ.get("PHASESIM_SEED")
    if env is None:
        return 1
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"PHASESIM_SEED must be an integer, got {env!r}")


def read_config(path) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment.  Keys use flag names."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _budget_args(p):
    g = p.add_argument_group("budget form")
    g.add_argument("--total-photons", type=float, help=f"total mean photons N (default {DEFAULT_N})")
    g.add_argument("--beta-s", type=float, help=f"signal coherent fraction (default {DEFAULT_BETA_S})")
    g.add_argument("--beta-p", type=float, help=f"probe squeezing fraction (default {DEFAULT_BETA_P})")


def _raw_args(p):
    g = p.add_argument_group("raw form")
    g.add_argument("--x-s", type=float, help="signal coherent amplitude")
    g.add_argument("--r-s", type=float, help="signal squeezing parameter")
    g.add_argument("--r-p", type=float, help="probe squeezing parameter")
    g.add_argument("--psi-p", type=float, help="probe squeezing phase (rad)")


def _common(p, sampling=True):
    p.add_argument("--config", help="key=value file mirroring the flags; flags win")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    if sampling:
        p.add_argument("--n-samples", type=int, default=100_000)
        p.add_argument("--bins", type=int, default=200)
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--reallocation", choices=sim.REALLOCATIONS, default="fixed-ratio")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasesim", description="Two-step phase measurement simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the two-step protocol")
    _budget_args(p)
    _raw_args(p)
    _common(p)

    p = sub.add_parser("density", help="phase density on a grid")
    _budget_args(p)
    _raw_args(p)
    _common(p, sampling=False)
    p.add_argument("--method", choices=("closed", "quadrature", "fock"), default="closed")
    p.add_argument("--phase-points", type=int, default=512)
    p.add_argument("--step", type=int, choices=(1, 2), default=1,
                   help="budget form: which protocol step's state to use")
    p.add_argument("--reallocation", choices=sim.REALLOCATIONS, default="fixed-ratio")
    p.add_argument("--fock-dim", type=int, help="Fock truncation (default from amplitude)")

    p = sub.add_parser("sweep", help="width scaling against total photons")
    p.add_argument("--n-values", type=float, nargs="+", default=[100.0, 1000.0, 10000.0])
    p.add_argument("--beta-s", type=float, default=0.25)
    p.add_argument("--beta-p", type=float, default=0.25)
    p.add_argument("--mode", choices=("analytic", "monte-carlo"), default="analytic")
    p.add_argument("--estimator", choices=("peak", "circular"), default="peak")
    _common(p)
    p.set_defaults(reallocation="fixed-rs")

    p = sub.add_parser("validate", help="run the oracle suite")
    p.add_argument("--config", help=argparse.SUPPRESS)
    parser.commands = sub.choices
    return parser


def parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = read_config(args.config)
        subparser = parser.commands[args.command]
        known = {a.dest for a in subparser._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        # re-parse with the config as defaults so explicit flags still win
        for action in subparser._actions:
            if action.dest in cfg:
                value = cfg[action.dest]
                if action.nargs in ("+", "*"):
                    value = [action.type(v) for v in value.split()]
                elif action.type is not None:
                    value = action.type(value)
                action.default = value
        args = parser.parse_args(argv)
    return args


def _require(cond, message):
    if not cond:
        raise UsageError(message)


def _check_sampling(args):
    _require(args.n_samples >= 1, "--n-samples must be >= 1")
    _require(args.bins >= 2, "--bins must be >= 2")
    _require(args.threads >= 1, "--threads must be >= 1")
    if args.seed is None:
        args.seed = default_seed()
    _require(args.seed >= 0, "--seed must be >= 0")


def _uses_raw(args):
    return any(getattr(args, k) is not None for k in ("x_s", "r_s", "r_p", "psi_p"))


def _uses_budget(args):
    return any(getattr(args, k) is not None for k in ("total_photons", "beta_s", "beta_p"))


def _budget(args) -> dist.EnergyBudget:
    N = DEFAULT_N if args.total_photons is None else args.total_photons
    bs = DEFAULT_BETA_S if args.beta_s is None else args.beta_s
    bp = DEFAULT_BETA_P if args.beta_p is None else args.beta_p
    for name, v in (("--total-photons", N), ("--beta-s", bs), ("--beta-p", bp)):
        _require(math.isfinite(v), f"{name} must be finite")
    _require(N > 0, "--total-photons must be positive")
    _require(bs >= 0 and bp >= 0, "fractions must be >= 0")
    return dist.EnergyBudget(N, bs, bp)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    _check_sampling(args)
    _require(not _uses_raw(args), "simulate takes the budget form only (--total-photons/--beta-s/--beta-p)")
    _require(args.n_samples >= 1000, "--n-samples must be >= 1000 for the two-step protocol")
    budget = _budget(args)
    res = sim.two_step(budget, args.n_samples, args.bins, args.seed, args.reallocation, args.threads)
    out = _out_dir(args)
    ext = args.format
    h1 = io.write_histogram(res.hist1, out / f"hist1.{ext}", ext)
    h2 = io.write_histogram(res.hist2, out / f"hist2.{ext}", ext)
    summary = res.to_dict()
    summary["files"] = {"hist1": h1.name, "hist2": h2.name}
    summary["model_peak_width1"] = dist.peak_width(ps.composed_model(res.signal1))
    summary["model_peak_width2"] = dist.peak_width(ps.composed_model(res.signal2, res.probe))
    io.write_summary(summary, out / "summary.json")
    print(f"phi_bar = {res.phi_bar:.6g} rad")
    print(f"width1  = {res.width1:.6g} rad (circular std, vacuum probe)")
    print(f"width2  = {res.width2:.6g} rad (circular std, squeezed probe)")
    print(f"peak widths: {summary['model_peak_width1']:.6g} -> {summary['model_peak_width2']:.6g} rad")
    return EXIT_OK


def _density_model(args):
    if _uses_raw(args):
        _require(not _uses_budget(args), "budget-form and raw-form parameters are mutually exclusive")
        _require(args.x_s is not None, "raw form needs --x-s")
        signal = ps.SqueezedSignalParams(args.x_s, args.r_s or 0.0)
        probe = ps.ProbeParams(args.r_p or 0.0, args.psi_p or 0.0)
        return signal, probe
    budget = _budget(args)
    if args.step == 1:
        return sim.step1_signal(budget), ps.ProbeParams()
    return sim.step2_states(budget, 0.0, args.reallocation)


def cmd_density(args) -> int:
    _require(args.phase_points >= 8, "--phase-points must be >= 8")
    signal, probe = _density_model(args)
    grid = dist.PhaseGrid(args.phase_points)
    model = ps.composed_model(signal, probe)
    if args.method == "closed":
        density = dist.closed_form_density(model, grid)
    elif args.method == "quadrature":
        density = dist.marginal_by_quadrature(model, grid)
    else:
        _require(probe.is_vacuum and signal.r_s == 0,
                 "fock method supports coherent signals with a vacuum probe only")
        density = dist.fock_marginal(dist.coherent_fock(signal.x_s, args.fock_dim), grid)
    out = _out_dir(args)
    path = io.write_density(density, out / f"density.{args.format}", args.format)
    print(f"wrote {path} ({args.method}, {grid.n_points} points, integral {density.integral():.12f})")
    return EXIT_OK


def cmd_sweep(args) -> int:
    _check_sampling(args)
    _require(len(args.n_values) >= 3, "--n-values needs at least 3 values")
    _require(all(b > a for a, b in zip(args.n_values, args.n_values[1:])), "--n-values must ascend")
    res = sim.scaling_sweep(args.n_values, args.beta_s, args.beta_p, args.mode, args.estimator,
                            args.reallocation, args.seed, args.n_samples, args.bins, args.threads)
    out = _out_dir(args)
    path = io.write_sweep(res.rows, out / f"sweep.{args.format}", args.format)
    print(f"wrote {path} ({res.mode}, {res.estimator} width)")
    print(f"step-1 slope   = {res.slope1:.4f}")
    print(f"two-step slope = {res.slope2:.4f}")
    return EXIT_OK


def cmd_validate(args) -> int:
    fault = os.environ.get("PHASESIM_VALIDATE_FAULT", "") not in ("", "0")
    checks = validate.run_checks(fault=fault)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


COMMANDS = {"simulate": cmd_simulate, "density": cmd_density, "sweep": cmd_sweep, "validate": cmd_validate}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"phasesim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (dist.InfeasibleBudgetError, dist.FockDimensionError, ps.SqueezingOverflowError, OverflowError) as exc:
        print(f"phasesim: infeasible: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"phasesim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
