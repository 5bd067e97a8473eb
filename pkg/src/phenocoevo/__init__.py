"""Dual-engine simulator for tumour/CTL coevolution on a phenotype lattice.

A stochastic individual-based engine and its continuum (PDE) limit share
one grid, one parameter set and one family of box-kernel interaction
fields.  The analysis layer locates homogeneous steady states, evaluates
their linear stability and the dispersion relation of trait-structured
perturbations, bounds the mutation diffusivity below which phenotype
patterns form, and classifies runs by time-averaged immune score.
"""
from .core import (
    ConfigurationError,
    ModelParams,
    PhenotypeGrid,
    PopulationState,
    TimeStepError,
    phenotypic_diffusivity,
)
from .kernels import KernelField, Window, kernel_weight, nonlocal_field, window
from .ibm import (
    FateProbabilities,
    IbmTrajectory,
    birth_death_step,
    fate_probabilities,
    initialize_counts,
    initial_densities,
    phenotype_move_step,
    run_ibm,
)
from .pde import (
    PdeTrajectory,
    ReactionTerms,
    diffusion_update,
    pde_step,
    reaction_factor,
    reaction_terms,
    reaction_update,
    run_pde,
)
from .analysis import (
    Classification,
    DispersionCurve,
    EigenReport,
    PatternBound,
    SteadyStates,
    average_immune_score,
    classify,
    count_peaks,
    dispersion,
    dispersion_at,
    homogeneous_stability,
    pattern_bound,
    steady_states,
)
from .config import ExperimentConfig, load_config, parse_config_text, config_text
from .presets import PRESET_NAMES, preset
from .harness import AggregateResult, export, run_experiment

__version__ = "0.1.0"
