"""Command line front end.

    phenocoevo simulate (--config FILE | --preset NAME) [options]
    phenocoevo analyze  (--config FILE | --preset NAME) [options]
    phenocoevo sweep    (--config FILE | --preset NAME) --param P --from A --to B --steps N

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(a fate probability left [0, 1] for the configured step size).
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import List, Optional

from . import analysis as ana
from .config import ExperimentConfig, load_config
from .core import ConfigurationError, TimeStepError, phenotypic_diffusivity
from .harness import _analysis_rows, _fmt, _resolved_text, _write_csv, export, run_experiment
from .presets import PRESET_NAMES, preset

__all__ = ["main"]


def _add_source_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a key=value config file")
    src.add_argument("--preset", help=f"named scenario, one of: {', '.join(PRESET_NAMES)}")
    p.add_argument("--out", help="output directory (default: from config)")


def _build_config(args, **overrides) -> ExperimentConfig:
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.config is not None:
        return load_config(args.config, **overrides)
    return preset(args.preset, **overrides)


def _sim_overrides(args) -> dict:
    out = {}
    if args.engine is not None:
        out["engine"] = args.engine
    if args.replicates is not None:
        out["replicates"] = args.replicates
    if args.seed is not None:
        out["seed"] = args.seed
    return out


def _cmd_simulate(args) -> int:
    config = _build_config(args, **_sim_overrides(args))
    result = run_experiment(config, workers=args.workers)
    written = export(result, config.out_dir)
    if result.ibm_runs:
        for i, (run, label) in enumerate(zip(result.ibm_runs, result.labels)):
            print(
                f"replicate {i} (seed {run.seed}): {label}, "
                f"mean score {_fmt(ana.average_immune_score(run))}, "
                f"final rho_C={_fmt(run.rho_C[-1])} rho_T={_fmt(run.rho_T[-1])} [{run.terminal}]"
            )
        print(f"majority label: {result.majority_label}")
    if result.pde_run is not None:
        run = result.pde_run
        print(
            f"continuum: {result.pde_label}, mean score {_fmt(ana.average_immune_score(run))}, "
            f"final rho_C={_fmt(run.rho_C[-1])} rho_T={_fmt(run.rho_T[-1])} [{run.terminal}]"
        )
    if result.final_total_diff is not None:
        print(
            f"engine agreement at t_final: diff_C={_fmt(result.final_total_diff[0])} "
            f"diff_T={_fmt(result.final_total_diff[1])}"
        )
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_analyze(args) -> int:
    config = _build_config(args)
    params = config.params()
    grid = config.grid()
    size = grid.domain_size
    beta = phenotypic_diffusivity(params, grid.step)

    ss = ana.steady_states(params, size)
    print(f"gamma = {_fmt(params.gamma)}, eradication threshold gamma* = {_fmt(ss.gamma_threshold)}")
    rep = ana.homogeneous_stability(params, size, "ctl_only")
    print(
        f"ctl-only state (0, {_fmt(ss.ctl_only[1])}): "
        f"{'stable' if rep.stable else 'unstable'}, eigenvalues {rep.eigenvalues[0]:.6g}, {rep.eigenvalues[1]:.6g}"
    )
    if ss.coexistence is not None:
        rep = ana.homogeneous_stability(params, size, "coexistence")
        print(
            f"coexistence state ({_fmt(ss.coexistence[0])}, {_fmt(ss.coexistence[1])}): "
            f"{'stable' if rep.stable else 'unstable'}"
        )
        curve = ana.dispersion(params, size, beta, m_max=args.m_max)
        print(
            f"dispersion: fastest mode m = {curve.fastest_mode()}, "
            f"max Re(lambda) = {_fmt(curve.re_lambda_max.max())}"
        )
        pb = ana.pattern_bound(params, params.theta_C, size, m_max=args.m_max, diffusivity=beta)
        if pb.bound is None:
            print(f"pattern bound: {pb.note}")
        else:
            print(
                f"pattern bound: beta_C < {_fmt(pb.bound)} enables modes "
                f"{pb.modes[0]}..{pb.modes[-1]}; beta_C = {_fmt(beta)} -> "
                f"{'patterns expected' if pb.verdict else 'no patterns expected'}"
            )
    else:
        print("no coexistence state: the tumour-free state is the only nonnegative equilibrium")

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if ss.coexistence is not None:
        curve = ana.dispersion(params, size, beta, m_max=args.m_max)
        path = out / "dispersion.csv"
        _write_csv(
            path,
            ["m", "k", "B", "C", "re_lambda_max"],
            zip(curve.modes, curve.wavenumbers, curve.trace, curve.determinant, curve.re_lambda_max),
        )
        written.append(path)
    path = out / "analysis.csv"
    _write_csv(path, ["name", "value"], _analysis_rows(config, None))
    written.append(path)
    path = out / "config.resolved"
    path.write_text(_resolved_text(config))
    written.append(path)
    for path in written:
        print(f"wrote {path}")
    return 0


_SWEEPABLE = (
    "gamma", "alpha_C", "alpha_T", "mu_C", "mu_T", "zeta_C", "zeta_T",
    "eta", "theta_C", "theta_T", "lambda_C", "tau", "t_final", "a", "A",
)


def _cmd_sweep(args) -> int:
    if args.param not in _SWEEPABLE:
        raise ConfigurationError(
            f"cannot sweep {args.param!r}; choose one of: {', '.join(_SWEEPABLE)}"
        )
    if args.steps < 2:
        raise ConfigurationError(f"--steps must be >= 2, got {args.steps}")
    config = _build_config(args)
    lo, hi, n = args.start, args.stop, args.steps
    values = [lo + (hi - lo) * i / (n - 1) for i in range(n)]

    names: List[str] = []
    rows = []
    for v in values:
        cfg = config.replace(**{args.param: v})
        result = run_experiment(cfg, workers=args.workers) if args.simulate else None
        scalars = dict(_analysis_rows(cfg, result))
        if not names:
            names = list(scalars)
        rows.append([_fmt(v)] + [scalars.get(name, "nan") for name in names])
        summary = ", ".join(f"{k}={scalars[k]}" for k in ("gamma_threshold", "rho_C_coexistence") if k in scalars)
        print(f"{args.param} = {_fmt(v)}: {summary}")

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    _write_csv(path, [args.param] + names, rows)
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phenocoevo",
        description="Simulate and analyse tumour/CTL coevolution on a phenotype lattice.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the configured engines and export CSVs")
    _add_source_args(p)
    p.add_argument("--engine", choices=("ibm", "pde", "both"), help="override the configured engine")
    p.add_argument("--replicates", type=int, help="override the stochastic replicate count")
    p.add_argument("--seed", type=int, help="override the base RNG seed")
    p.add_argument("--workers", type=int, default=1, help="parallel workers for replicates")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="steady states, stability, dispersion, pattern bound")
    _add_source_args(p)
    p.add_argument("--m-max", type=int, default=100, help="largest lattice mode to scan")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("sweep", help="repeat the analysis along a 1-D parameter scan")
    _add_source_args(p)
    p.add_argument("--param", required=True, help="config key to sweep")
    p.add_argument("--from", dest="start", type=float, required=True, help="first value")
    p.add_argument("--to", dest="stop", type=float, required=True, help="last value")
    p.add_argument("--steps", type=int, required=True, help="number of values")
    p.add_argument("--simulate", action="store_true", help="also run the engines at every value")
    p.add_argument("--workers", type=int, default=1, help="parallel workers when simulating")
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except TimeStepError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
