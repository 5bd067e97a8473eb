"""Continuum engine: nonlocal reaction terms plus tumour trait diffusion.

The densities obey, on the trait interval with no-flux ends,

    dn_C/dt = beta_C * n_C'' + R_C(n_C, n_T) * n_C
    dn_T/dt =                  R_T(n_C, n_T) * n_T

with per-capita rates built from density-mode windowed averages

    R_C = alpha_C - (mu_C * K_C + zeta_C * gamma * J_C)
    R_T = alpha_T + zeta_T * gamma * J_T - mu_T * K_T.

One step of length dt splits into a positivity-preserving reaction update

    n <- n * (1 + dt * max(R, 0)) / (1 + dt * max(-R, 0))

for both populations (rates frozen at the step start), then explicit
3-point diffusion on the tumour interior with each boundary value copied
from its updated interior neighbour.  The copy rule trades exact mass
conservation for simplicity; the measured drift stays below O(step) per
unit time and is asserted in the tests.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from .core import ConfigurationError, ModelParams, PhenotypeGrid, PopulationState, phenotypic_diffusivity
from .kernels import nonlocal_field

__all__ = [
    "ReactionTerms",
    "PdeTrajectory",
    "reaction_terms",
    "reaction_factor",
    "reaction_update",
    "diffusion_update",
    "pde_step",
    "run_pde",
]


@dataclass
class ReactionTerms:
    """Per-capita net growth rates for both densities."""

    tumour: np.ndarray
    ctl: np.ndarray


def reaction_terms(state: PopulationState, params: ModelParams, grid: PhenotypeGrid) -> ReactionTerms:
    if state.mode != "density":
        raise ValueError("reaction_terms needs a density-mode state")
    k_c = nonlocal_field(grid, state.tumour, params.theta_C, "density", "tumour crowding").values
    k_t = nonlocal_field(grid, state.ctl, params.theta_T, "density", "ctl crowding").values
    j_c = nonlocal_field(grid, state.ctl, params.eta, "density", "ctl pressure on tumour").values
    j_t = nonlocal_field(grid, state.tumour, params.eta, "density", "tumour stimulus on ctl").values
    r_c = params.alpha_C - (params.mu_C * k_c + params.gamma_C * j_c)
    r_t = params.alpha_T + params.gamma_T * j_t - params.mu_T * k_t
    return ReactionTerms(tumour=r_c, ctl=r_t)


def reaction_factor(rate: np.ndarray, dt: float) -> np.ndarray:
    """Growth factor (1 + dt*R+)/(1 + dt*R-): positive for any rate."""
    rate = np.asarray(rate, dtype=float)
    return (1.0 + dt * np.maximum(rate, 0.0)) / (1.0 + dt * np.maximum(-rate, 0.0))


def reaction_update(
    state: PopulationState, params: ModelParams, grid: PhenotypeGrid, dt: float
) -> PopulationState:
    """Apply the reaction factors to both densities, rates from ``state``."""
    terms = reaction_terms(state, params, grid)
    new_c = state.tumour * reaction_factor(terms.tumour, dt)
    new_t = state.ctl * reaction_factor(terms.ctl, dt)
    return PopulationState(state.t, new_c, new_t, "density", state.step)


def diffusion_update(density: np.ndarray, diffusivity: float, dt: float, grid: PhenotypeGrid) -> np.ndarray:
    """Explicit 3-point diffusion step; ends copy their updated neighbour.

    Stability (dt * diffusivity / step**2 <= 1/2) is checked once at run
    setup, not here.
    """
    nu = diffusivity * dt / (grid.step * grid.step)
    out = np.empty_like(density)
    out[1:-1] = density[1:-1] + nu * (density[2:] - 2.0 * density[1:-1] + density[:-2])
    out[0] = out[1]
    out[-1] = out[-2]
    return out


def pde_step(
    state: PopulationState,
    params: ModelParams,
    grid: PhenotypeGrid,
    dt: float,
    diffusivity: float,
) -> PopulationState:
    """One full splitting step: reaction on both densities, then tumour diffusion."""
    out = reaction_update(state, params, grid, dt)
    out.tumour = diffusion_update(out.tumour, diffusivity, dt, grid)
    out.t = state.t + dt
    return out


@dataclass
class PdeTrajectory:
    """Recorded output of one continuum run, with solver diagnostics."""

    times: np.ndarray
    rho_C: np.ndarray
    rho_T: np.ndarray
    immune_score: np.ndarray
    tau: float                 # recording step (equals dt)
    cfl: float
    min_density: float
    terminal: str
    snapshots: Dict[float, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    kind: str = "pde"

    @property
    def dt(self) -> float:
        return self.tau


# Below one cell in total the continuum tumour is treated as eradicated.
EXTINCTION_MASS = 1.0


def run_pde(
    params: ModelParams,
    grid: PhenotypeGrid,
    init: PopulationState,
    snapshot_times: Tuple[float, ...] = (),
    dt: float = None,
) -> PdeTrajectory:
    """Integrate the densities from ``init`` to t_final.

    The tumour diffusivity is always derived from (lambda_C, step, tau) so
    both engines share one value, even if dt differs from tau.
    """
    if init.mode != "density":
        raise ValueError("run_pde needs a density-mode initial state")
    if init.tumour.shape != (grid.n_sites,):
        raise ValueError("initial state does not match the grid")
    params.validate_radii(grid.domain_size)
    if dt is None:
        dt = params.tau
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")

    beta = phenotypic_diffusivity(params, grid.step)
    cfl = beta * dt / (grid.step * grid.step)
    if cfl > 0.5:
        raise ConfigurationError(
            f"diffusion number {cfl:.3g} exceeds 1/2; reduce dt or refine the grid"
        )

    n_steps = int(round(params.t_final / dt))
    snap_idx = {}
    for s in snapshot_times:
        i = int(round(s / dt))
        if 0 <= i <= n_steps:
            snap_idx.setdefault(i, float(s))

    state = init.copy()
    state.t = 0.0
    times = np.empty(n_steps + 1)
    rho_c = np.empty(n_steps + 1)
    rho_t = np.empty(n_steps + 1)
    score = np.empty(n_steps + 1)
    snapshots: Dict[float, Tuple[np.ndarray, np.ndarray]] = {}
    min_density = np.inf

    def record(h: int) -> None:
        nonlocal min_density
        times[h] = h * dt
        rc, rt = state.rho_C, state.rho_T
        rho_c[h] = rc
        rho_t[h] = rt
        score[h] = rt / rc if rc > 0 else np.inf
        min_density = min(min_density, float(state.tumour.min()), float(state.ctl.min()))
        if h in snap_idx:
            snapshots[snap_idx[h]] = (state.tumour.copy(), state.ctl.copy())

    record(0)
    for h in range(1, n_steps + 1):
        state = pde_step(state, params, grid, dt, beta)
        record(h)

    terminal = "completed"
    if rho_c[-1] < EXTINCTION_MASS:
        terminal = "tumour_extinct"
    elif rho_t[-1] < EXTINCTION_MASS:
        terminal = "ctl_extinct"
    return PdeTrajectory(
        times=times,
        rho_C=rho_c,
        rho_T=rho_t,
        immune_score=score,
        tau=dt,
        cfl=cfl,
        min_density=min_density,
        terminal=terminal,
        snapshots=snapshots,
    )
