"""Stochastic individual-based engine on the phenotype lattice.

One step of length tau, in this order:

1. every tumour cell moves one site left/right with probability lambda_C
   (direction symmetric, moves across the boundary are aborted);
2. the nonlocal fields are evaluated on the post-move configuration;
3. every cell independently dies, divides in place, or stays quiescent
   with the per-site probabilities below.

Tumour cells at site i (count N_i, fields evaluated there):
    birth  tau * alpha_C
    death  tau * (mu_C * K_C + zeta_C * gamma * J_C)
CTLs:
    birth  tau * (alpha_T + zeta_T * gamma * J_T)
    death  tau * mu_T * K_T

K_* are same-population crowding fields (radius theta_C / theta_T), J_*
cross-population recognition fields (radius eta).  All four are count-mode
windowed averages.

Per-cell draws are realised per site with binomial draws, which gives the
same joint law as looping over cells: the number of movers at a site is
Binomial(N, lambda_C), the left/right split Binomial(movers, 1/2); deaths
are Binomial(N, p_death) and divisions Binomial(N - deaths,
p_birth / (1 - p_death)), the conditional law of a categorical fate draw
given survival.  The RNG call order is fixed and documented: movement
makes exactly two binomial calls (movers, then left split), the fate
update four (tumour deaths, tumour births, CTL deaths, CTL births).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from .core import ConfigurationError, ModelParams, PhenotypeGrid, PopulationState, TimeStepError
from .kernels import nonlocal_field

__all__ = [
    "FateProbabilities",
    "IbmTrajectory",
    "initialize_counts",
    "phenotype_move_step",
    "fate_probabilities",
    "birth_death_step",
    "run_ibm",
]

# Initial profile scales (cells per unit trait).
INIT_DENSITY_C = 1.0e4
INIT_DENSITY_T = 2.0e4


@dataclass
class FateProbabilities:
    """Per-site birth/death probabilities for one population over one step."""

    birth: np.ndarray
    death: np.ndarray

    @property
    def quiescent(self) -> np.ndarray:
        return 1.0 - (self.birth + self.death)


def initialize_counts(grid: PhenotypeGrid, amplitude: float, wavenumber: float) -> PopulationState:
    """Initial cell counts from the standard cosine-perturbed profile.

    Densities 1e4*(1 + a*cos(A*u)) for tumour and 1e4*(2 + a*cos(A*u)) for
    CTLs, converted to integer counts per site via rounding of
    density*step.  amplitude > 1 would make the tumour profile negative.
    """
    if not 0.0 <= amplitude <= 1.0:
        raise ConfigurationError(f"amplitude must lie in [0, 1], got {amplitude}")
    if not wavenumber > 0:
        raise ConfigurationError(f"wavenumber must be positive, got {wavenumber}")
    u = grid.sites
    bump = amplitude * np.cos(wavenumber * u)
    dens_c = INIT_DENSITY_C * (1.0 + bump)
    dens_t = INIT_DENSITY_T + INIT_DENSITY_C * bump
    counts_c = np.rint(dens_c * grid.step).astype(np.int64)
    counts_t = np.rint(dens_t * grid.step).astype(np.int64)
    return PopulationState(0.0, counts_c, counts_t, "count", grid.step)


def initial_densities(grid: PhenotypeGrid, amplitude: float, wavenumber: float) -> PopulationState:
    """Continuum counterpart of :func:`initialize_counts` (no rounding)."""
    if not 0.0 <= amplitude <= 1.0:
        raise ConfigurationError(f"amplitude must lie in [0, 1], got {amplitude}")
    if not wavenumber > 0:
        raise ConfigurationError(f"wavenumber must be positive, got {wavenumber}")
    bump = amplitude * np.cos(wavenumber * grid.sites)
    dens_c = INIT_DENSITY_C * (1.0 + bump)
    dens_t = INIT_DENSITY_T + INIT_DENSITY_C * bump
    return PopulationState(0.0, dens_c, dens_t, "density", grid.step)


def phenotype_move_step(state: PopulationState, lambda_C: float, rng) -> PopulationState:
    """Random single-site moves of tumour cells, boundary moves aborted.

    Exactly two rng.binomial calls: total movers per site, then the number
    of those going left.  Movers that would leave the lattice stay put.
    """
    if state.mode != "count":
        raise ValueError("phenotype_move_step needs a count-mode state")
    if not 0.0 <= lambda_C <= 1.0:
        raise ValueError(f"lambda_C must lie in [0, 1], got {lambda_C}")
    counts = state.tumour
    movers = rng.binomial(counts, lambda_C)
    left = rng.binomial(movers, 0.5)
    right = movers - left

    new = counts - movers
    new[0] += left[0]        # aborted at the left wall
    new[-1] += right[-1]     # aborted at the right wall
    new[:-1] += left[1:]
    new[1:] += right[:-1]
    return PopulationState(state.t, new, state.ctl.copy(), "count", state.step)


def _field_values(state: PopulationState, grid: PhenotypeGrid, params: ModelParams):
    k_c = nonlocal_field(grid, state.tumour, params.theta_C, "count", "tumour crowding").values
    k_t = nonlocal_field(grid, state.ctl, params.theta_T, "count", "ctl crowding").values
    j_c = nonlocal_field(grid, state.ctl, params.eta, "count", "ctl pressure on tumour").values
    j_t = nonlocal_field(grid, state.tumour, params.eta, "count", "tumour stimulus on ctl").values
    return k_c, k_t, j_c, j_t


def _check_probs(pop: str, occupied: np.ndarray, birth: np.ndarray, death: np.ndarray) -> None:
    # Probabilities only need to be valid where cells exist to draw fates.
    for name, p in (("death", death), ("birth", birth)):
        bad = occupied & (p > 1.0)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise TimeStepError(f"{pop} {name}", i, float(p[i]))
    bad = occupied & (birth + death > 1.0)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise TimeStepError(f"{pop} birth+death", i, float(birth[i] + death[i]))


def fate_probabilities(
    state: PopulationState, params: ModelParams, grid: PhenotypeGrid
) -> Tuple[FateProbabilities, FateProbabilities]:
    """Per-site fate probabilities (tumour, ctl) for one step of length tau.

    Raises TimeStepError if any probability leaves [0, 1] at an occupied
    site; unoccupied sites are not constrained because no fate is drawn
    there.
    """
    if state.mode != "count":
        raise ValueError("fate_probabilities needs a count-mode state")
    params.validate_radii(grid.domain_size)
    k_c, k_t, j_c, j_t = _field_values(state, grid, params)
    tau = params.tau

    birth_c = np.full(grid.n_sites, tau * params.alpha_C)
    death_c = tau * (params.mu_C * k_c + params.gamma_C * j_c)
    birth_t = tau * (params.alpha_T + params.gamma_T * j_t)
    death_t = tau * params.mu_T * k_t

    _check_probs("tumour", state.tumour > 0, birth_c, death_c)
    _check_probs("ctl", state.ctl > 0, birth_t, death_t)
    return FateProbabilities(birth_c, death_c), FateProbabilities(birth_t, death_t)


def _draw_fates(counts: np.ndarray, fates: FateProbabilities, rng) -> np.ndarray:
    pd = np.clip(fates.death, 0.0, 1.0)
    pb_given_alive = np.divide(
        fates.birth, 1.0 - pd, out=np.zeros_like(pd), where=pd < 1.0
    )
    pb_given_alive = np.clip(pb_given_alive, 0.0, 1.0)
    deaths = rng.binomial(counts, pd)
    births = rng.binomial(counts - deaths, pb_given_alive)
    return counts - deaths + births


def birth_death_step(
    state: PopulationState,
    tumour_fates: FateProbabilities,
    ctl_fates: FateProbabilities,
    rng,
) -> PopulationState:
    """Apply one round of deaths and in-place divisions to both populations.

    Exactly four rng.binomial calls, in the order tumour deaths, tumour
    births, CTL deaths, CTL births.
    """
    if state.mode != "count":
        raise ValueError("birth_death_step needs a count-mode state")
    new_c = _draw_fates(state.tumour, tumour_fates, rng)
    new_t = _draw_fates(state.ctl, ctl_fates, rng)
    return PopulationState(state.t, new_c, new_t, "count", state.step)


@dataclass
class IbmTrajectory:
    """Recorded output of one stochastic realisation."""

    times: np.ndarray
    rho_C: np.ndarray
    rho_T: np.ndarray
    immune_score: np.ndarray   # rho_T/rho_C per step, +inf after tumour extinction
    tau: float
    seed: int
    terminal: str              # "completed" | "tumour_extinct" | "ctl_extinct"
    snapshots: Dict[float, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    kind: str = "ibm"


def run_ibm(
    params: ModelParams,
    grid: PhenotypeGrid,
    init: PopulationState,
    seed: int,
    snapshot_times: Tuple[float, ...] = (),
    stop_on_extinction: bool = False,
) -> IbmTrajectory:
    """Run one realisation from ``init`` to t_final.

    By default the run continues after tumour extinction so late CTL
    relaxation is still observed; the immune score is +inf from the first
    extinct step on.  ``stop_on_extinction`` truncates instead.
    Deterministic for a given seed.
    """
    if init.mode != "count":
        raise ValueError("run_ibm needs a count-mode initial state")
    if init.tumour.shape != (grid.n_sites,):
        raise ValueError("initial state does not match the grid")
    params.validate_radii(grid.domain_size)

    n_steps = int(round(params.t_final / params.tau))
    snap_idx = {}
    for s in snapshot_times:
        i = int(round(s / params.tau))
        if 0 <= i <= n_steps:
            snap_idx.setdefault(i, float(s))

    rng = np.random.default_rng(seed)
    state = init.copy()
    state.t = 0.0

    times = np.empty(n_steps + 1)
    rho_c = np.empty(n_steps + 1)
    rho_t = np.empty(n_steps + 1)
    score = np.empty(n_steps + 1)
    snapshots: Dict[float, Tuple[np.ndarray, np.ndarray]] = {}

    def record(h: int) -> None:
        times[h] = h * params.tau
        rc, rt = state.rho_C, state.rho_T
        rho_c[h] = rc
        rho_t[h] = rt
        score[h] = rt / rc if rc > 0 else np.inf
        if h in snap_idx:
            snapshots[snap_idx[h]] = (state.tumour.copy(), state.ctl.copy())

    record(0)
    last = n_steps
    for h in range(1, n_steps + 1):
        state = phenotype_move_step(state, params.lambda_C, rng)
        tumour_fates, ctl_fates = fate_probabilities(state, params, grid)
        state = birth_death_step(state, tumour_fates, ctl_fates, rng)
        state.t = h * params.tau
        record(h)
        if stop_on_extinction and rho_c[h] == 0:
            last = h
            break

    sl = slice(0, last + 1)
    terminal = "completed"
    if np.any(rho_c[sl] == 0):
        terminal = "tumour_extinct"
    elif rho_t[last] == 0:
        terminal = "ctl_extinct"
    return IbmTrajectory(
        times=times[sl].copy(),
        rho_C=rho_c[sl].copy(),
        rho_T=rho_t[sl].copy(),
        immune_score=score[sl].copy(),
        tau=params.tau,
        seed=seed,
        terminal=terminal,
        snapshots=snapshots,
    )
