"""Replicate orchestration, ensemble statistics and CSV export.

run_experiment turns one ExperimentConfig into: an ensemble of stochastic
runs (seeds base, base+1, ...), one continuum run on the same grid, the
ensemble mean/variance series, per-replicate immune-score labels and
engine-comparison metrics.  export writes the standard CSV files plus a
config.resolved echo so a run can be reproduced from its output directory
alone.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import analysis as ana
from .config import ExperimentConfig, config_text
from .core import phenotypic_diffusivity
from .ibm import IbmTrajectory, initialize_counts, run_ibm
from .pde import PdeTrajectory, run_pde
from .ibm import initial_densities

__all__ = ["AggregateResult", "run_experiment", "export"]


def _run_one_ibm(job: Tuple[ExperimentConfig, int]) -> IbmTrajectory:
    config, seed = job
    grid = config.grid()
    init = initialize_counts(grid, config.a, config.A)
    return run_ibm(config.params(), grid, init, seed, snapshot_times=config.snapshot_times)


@dataclass
class AggregateResult:
    """Everything run_experiment produces for one config."""

    config: ExperimentConfig
    times: np.ndarray
    rho_C_mean: np.ndarray
    rho_C_var: np.ndarray
    rho_T_mean: np.ndarray
    rho_T_var: np.ndarray
    score_mean: np.ndarray
    ibm_runs: List[IbmTrajectory] = field(default_factory=list)
    pde_run: Optional[PdeTrajectory] = None
    # per snapshot time: site-wise ensemble stats of the IBM densities
    snapshot_stats: Dict[float, Dict[str, np.ndarray]] = field(default_factory=dict)
    labels: List[str] = field(default_factory=list)
    majority_label: str = ""
    pde_label: str = ""
    # engine comparison: L1 profile distances per snapshot, totals at t_final
    profile_distance: Dict[float, Tuple[float, float]] = field(default_factory=dict)
    final_total_diff: Optional[Tuple[float, float]] = None


def _ensemble_stats(rows: List[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    stacked = np.vstack(rows)
    mean = stacked.mean(axis=0)
    if stacked.shape[0] > 1:
        var = stacked.var(axis=0, ddof=1)
    else:
        var = np.zeros_like(mean)
    return mean, var


def _relative_l1(profile: np.ndarray, reference: np.ndarray, step: float) -> float:
    denom = float(np.abs(reference).sum() * step)
    num = float(np.abs(profile - reference).sum() * step)
    return num / denom if denom > 0 else math.inf


def run_experiment(config: ExperimentConfig, workers: int = 1) -> AggregateResult:
    """Run the configured engines and aggregate the ensemble.

    Stochastic replicates use seeds seed, seed+1, ... and are collected
    in replicate order, so results do not depend on worker scheduling.
    """
    grid = config.grid()
    params = config.params()

    pde_run = None
    if config.engine in ("pde", "both"):
        init = initial_densities(grid, config.a, config.A)
        pde_run = run_pde(params, grid, init, snapshot_times=config.snapshot_times)

    ibm_runs: List[IbmTrajectory] = []
    if config.engine in ("ibm", "both"):
        jobs = [(config, config.seed + i) for i in range(config.replicates)]
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                ibm_runs = list(pool.map(_run_one_ibm, jobs))
        else:
            ibm_runs = [_run_one_ibm(j) for j in jobs]

    if ibm_runs:
        times = ibm_runs[0].times
        rc_mean, rc_var = _ensemble_stats([r.rho_C for r in ibm_runs])
        rt_mean, rt_var = _ensemble_stats([r.rho_T for r in ibm_runs])
        score_mean = np.vstack([r.immune_score for r in ibm_runs]).mean(axis=0)
    else:
        times = pde_run.times
        rc_mean, rc_var = pde_run.rho_C, np.zeros_like(pde_run.rho_C)
        rt_mean, rt_var = pde_run.rho_T, np.zeros_like(pde_run.rho_T)
        score_mean = pde_run.immune_score

    result = AggregateResult(
        config=config,
        times=times,
        rho_C_mean=rc_mean,
        rho_C_var=rc_var,
        rho_T_mean=rt_mean,
        rho_T_var=rt_var,
        score_mean=score_mean,
        ibm_runs=ibm_runs,
        pde_run=pde_run,
    )

    if ibm_runs:
        step = grid.step
        for t in config.snapshot_times:
            per_run = [r.snapshots.get(t) for r in ibm_runs]
            if any(s is None for s in per_run):
                continue
            dens_c = [s[0] / step for s in per_run]
            dens_t = [s[1] / step for s in per_run]
            c_mean, c_var = _ensemble_stats(dens_c)
            t_mean, t_var = _ensemble_stats(dens_t)
            result.snapshot_stats[t] = {
                "nC_mean": c_mean, "nC_var": c_var,
                "nT_mean": t_mean, "nT_var": t_var,
            }
        result.labels = [ana.classify(r).label for r in ibm_runs]
        counts = Counter(result.labels)
        result.majority_label = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
    if pde_run is not None:
        result.pde_label = ana.classify(pde_run).label

    if ibm_runs and pde_run is not None:
        for t, stats in result.snapshot_stats.items():
            ref = pde_run.snapshots.get(t)
            if ref is None:
                continue
            result.profile_distance[t] = (
                _relative_l1(stats["nC_mean"], ref[0], grid.step),
                _relative_l1(stats["nT_mean"], ref[1], grid.step),
            )
        # relative when the continuum total is above one cell, absolute below
        def total_diff(sim: float, ref: float) -> float:
            return abs(sim - ref) / ref if ref >= 1.0 else abs(sim - ref)

        result.final_total_diff = (
            total_diff(rc_mean[-1], pde_run.rho_C[-1]),
            total_diff(rt_mean[-1], pde_run.rho_T[-1]),
        )
    return result


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def _time_label(t: float) -> str:
    return f"{t:g}"


def _analysis_rows(config: ExperimentConfig, result: Optional[AggregateResult]) -> List[Tuple[str, str]]:
    params = config.params()
    grid = config.grid()
    size = grid.domain_size
    beta = phenotypic_diffusivity(params, grid.step)
    ss = ana.steady_states(params, size)
    rows: List[Tuple[str, str]] = [
        ("gamma", _fmt(params.gamma)),
        ("gamma_threshold", _fmt(ss.gamma_threshold)),
        ("beta_C", _fmt(beta)),
        ("rho_C_ctl_only", _fmt(ss.ctl_only[0])),
        ("rho_T_ctl_only", _fmt(ss.ctl_only[1])),
    ]
    rep = ana.homogeneous_stability(params, size, "ctl_only")
    rows.append(("ctl_only_stable", str(int(rep.stable))))
    if ss.coexistence is not None:
        rows += [
            ("rho_C_coexistence", _fmt(ss.coexistence[0])),
            ("rho_T_coexistence", _fmt(ss.coexistence[1])),
        ]
        rep2 = ana.homogeneous_stability(params, size, "coexistence")
        rows.append(("coexistence_stable", str(int(rep2.stable))))
        curve = ana.dispersion(params, size, beta)
        rows += [
            ("fastest_mode", str(curve.fastest_mode())),
            ("max_re_lambda", _fmt(curve.re_lambda_max.max())),
        ]
        pb = ana.pattern_bound(params, params.theta_C, size, diffusivity=beta)
        if pb.bound is not None:
            rows += [
                ("pattern_bound", _fmt(pb.bound)),
                ("pattern_band_first", str(pb.modes[0])),
                ("pattern_band_last", str(pb.modes[-1])),
                ("pattern_verdict", str(int(pb.verdict))),
            ]
        else:
            rows.append(("pattern_bound", "nan"))
    else:
        rows += [("rho_C_coexistence", "nan"), ("rho_T_coexistence", "nan")]
    if result is not None:
        if result.labels:
            finite = [ana.average_immune_score(r) for r in result.ibm_runs]
            rows.append(("ibm_majority_label", result.majority_label))
            for i, (lab, sc) in enumerate(zip(result.labels, finite)):
                rows.append((f"ibm_label_{i}", lab))
                rows.append((f"ibm_mean_score_{i}", _fmt(sc)))
        if result.pde_run is not None:
            rows.append(("pde_label", result.pde_label))
            rows.append(("pde_mean_score", _fmt(ana.average_immune_score(result.pde_run))))
        if result.final_total_diff is not None:
            rows.append(("final_total_diff_C", _fmt(result.final_total_diff[0])))
            rows.append(("final_total_diff_T", _fmt(result.final_total_diff[1])))
    return rows


def _write_csv(path: Path, header: List[str], rows) -> None:
    with path.open("w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if not isinstance(v, str) else v for v in row) + "\n")


def _resolved_text(config: ExperimentConfig) -> str:
    grid = config.grid()
    beta = phenotypic_diffusivity(config.params(), grid.step)
    extra = (
        f"# derived: step = {grid.step!r}\n"
        f"# derived: beta_C = {beta!r}\n"
        f"# derived: diffusion_number = {beta * config.tau / grid.step ** 2!r}\n"
    )
    return config_text(config) + extra


def export(result: AggregateResult, out_dir) -> List[Path]:
    """Write totals, snapshots, dispersion, analysis and config.resolved.

    totals.csv and the snapshot files describe the stochastic ensemble
    when it ran (variance 0 for a single run) and the deterministic
    continuum run otherwise; continuum columns are appended when both
    engines ran.  dispersion.csv is only written when the coexistence
    state exists.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = result.config
    grid = config.grid()
    written: List[Path] = []

    both = bool(result.ibm_runs) and result.pde_run is not None
    header = ["time", "rho_C_mean", "rho_C_var", "rho_T_mean", "rho_T_var", "I_mean"]
    if both:
        header += ["rho_C_pde", "rho_T_pde"]
    rows = []
    for i, t in enumerate(result.times):
        row = [t, result.rho_C_mean[i], result.rho_C_var[i],
               result.rho_T_mean[i], result.rho_T_var[i], result.score_mean[i]]
        if both:
            row += [result.pde_run.rho_C[i], result.pde_run.rho_T[i]]
        rows.append(row)
    path = out / "totals.csv"
    _write_csv(path, header, rows)
    written.append(path)

    snap_times = set(result.snapshot_stats)
    if result.pde_run is not None:
        snap_times |= set(result.pde_run.snapshots)
    for t in sorted(snap_times):
        stats = result.snapshot_stats.get(t)
        pde_snap = result.pde_run.snapshots.get(t) if result.pde_run is not None else None
        header = ["site_index", "u", "nC_mean", "nC_var", "nT_mean", "nT_var"]
        if stats is not None and pde_snap is not None:
            header += ["nC_pde", "nT_pde"]
        rows = []
        for i in range(grid.n_sites):
            if stats is not None:
                base = [stats["nC_mean"][i], stats["nC_var"][i], stats["nT_mean"][i], stats["nT_var"][i]]
            else:
                base = [pde_snap[0][i], 0.0, pde_snap[1][i], 0.0]
            row = [i, grid.sites[i]] + base
            if stats is not None and pde_snap is not None:
                row += [pde_snap[0][i], pde_snap[1][i]]
            rows.append(row)
        path = out / f"snapshot_{_time_label(t)}.csv"
        _write_csv(path, header, rows)
        written.append(path)

    params = config.params()
    size = grid.domain_size
    ss = ana.steady_states(params, size)
    if ss.coexistence is not None:
        beta = phenotypic_diffusivity(params, grid.step)
        curve = ana.dispersion(params, size, beta)
        path = out / "dispersion.csv"
        _write_csv(
            path,
            ["m", "k", "B", "C", "re_lambda_max"],
            zip(curve.modes, curve.wavenumbers, curve.trace, curve.determinant, curve.re_lambda_max),
        )
        written.append(path)

    path = out / "analysis.csv"
    _write_csv(path, ["name", "value"], _analysis_rows(config, result))
    written.append(path)

    path = out / "config.resolved"
    path.write_text(_resolved_text(config))
    written.append(path)
    return written
