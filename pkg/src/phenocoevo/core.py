"""Shared types for the phenotype-lattice tumour/CTL model.

The model lives on a uniform lattice of phenotypic states spanning a
symmetric interval.  Tumour cells and cytotoxic T lymphocytes (CTLs) each
carry one scalar trait; tumour cells compete and mutate along the lattice,
CTLs are recruited where their receptor matches nearby tumour antigens.
Everything downstream (stochastic engine, continuum solver, linear
analysis) shares the types defined here.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
import numpy as np

__all__ = [
    "ConfigurationError",
    "TimeStepError",
    "PhenotypeGrid",
    "ModelParams",
    "PopulationState",
    "phenotypic_diffusivity",
]


class ConfigurationError(ValueError):
    """Invalid model or experiment configuration."""


class TimeStepError(RuntimeError):
    """A per-cell fate probability left [0, 1]: the step size is too large
    for the current population sizes."""

    def __init__(self, population: str, site: int, value: float):
        self.population = population
        self.site = site
        self.value = value
        super().__init__(
            f"fate probability for {population} at site {site} is {value:.6g}, "
            "outside [0, 1]; reduce tau or the population scale"
        )


@dataclass(frozen=True)
class PhenotypeGrid:
    """Uniform phenotype lattice on [-half_width, half_width].

    Both endpoints are sites, so step = 2*half_width/(n_sites - 1).
    """

    half_width: float
    n_sites: int
    step: float = field(init=False)
    sites: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.half_width > 0:
            raise ConfigurationError(f"half_width must be positive, got {self.half_width}")
        if self.n_sites < 2:
            raise ConfigurationError(f"n_sites must be at least 2, got {self.n_sites}")
        step = 2.0 * self.half_width / (self.n_sites - 1)
        sites = np.linspace(-self.half_width, self.half_width, self.n_sites)
        object.__setattr__(self, "step", step)
        object.__setattr__(self, "sites", sites)

    @property
    def domain_size(self) -> float:
        """Length of the trait interval."""
        return 2.0 * self.half_width


@dataclass(frozen=True)
class ModelParams:
    """Model rate constants and numerical step sizes.

    Defaults are the baseline calibration (rates per day, interaction
    coefficients per cell per day scaled to the reference volume).  The
    interaction strength ``gamma`` has no meaningful default and must be
    given.  Radii ``eta`` (tumour/CTL trait matching), ``theta_C`` and
    ``theta_T`` (intra-population competition) default to the widest
    commonly used value, 1.8.
    """

    gamma: float
    alpha_C: float = 1.5
    alpha_T: float = 0.05
    mu_C: float = 1.5e-6
    mu_T: float = 5e-6
    zeta_C: float = 5e-6
    zeta_T: float = 3e-5
    eta: float = 1.8
    theta_C: float = 1.8
    theta_T: float = 1.8
    lambda_C: float = 0.01
    tau: float = 0.05
    t_final: float = 30.0

    def __post_init__(self):
        for name in ("gamma", "alpha_C", "alpha_T", "mu_C", "mu_T", "zeta_C", "zeta_T"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ConfigurationError(f"{name} must be finite and >= 0, got {v}")
        for name in ("eta", "theta_C", "theta_T"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 < self.lambda_C < 1.0:
            raise ConfigurationError(f"lambda_C must lie in (0, 1), got {self.lambda_C}")
        if not self.tau > 0:
            raise ConfigurationError(f"tau must be positive, got {self.tau}")
        if not self.t_final > 0:
            raise ConfigurationError(f"t_final must be positive, got {self.t_final}")

    # Effective kill/boost coefficients: interaction radius coefficients
    # always appear multiplied by gamma.
    @property
    def gamma_C(self) -> float:
        """Effective rate at which CTL pressure kills tumour cells."""
        return self.zeta_C * self.gamma

    @property
    def gamma_T(self) -> float:
        """Effective rate at which tumour stimulus boosts CTL division."""
        return self.zeta_T * self.gamma

    def validate_radii(self, domain_size: float) -> None:
        """Radii must not exceed the trait interval length."""
        for name in ("eta", "theta_C", "theta_T"):
            v = getattr(self, name)
            if v > domain_size:
                raise ConfigurationError(
                    f"{name}={v} exceeds the trait interval length {domain_size}"
                )

    def replace(self, **kw) -> "ModelParams":
        vals = {f.name: getattr(self, f.name) for f in fields(self) if f.init}
        vals.update(kw)
        return ModelParams(**vals)


def phenotypic_diffusivity(params: ModelParams, step: float) -> float:
    """Diffusivity of the tumour trait induced by per-step mutation.

    A cell moves one lattice step with probability lambda_C per time step
    tau, direction symmetric, so density-level diffusivity is
    lambda_C * step**2 / (2 * tau).  Both engines share this value.
    """
    return params.lambda_C * step * step / (2.0 * params.tau)


@dataclass
class PopulationState:
    """Tumour and CTL populations resolved on the lattice at one instant.

    ``mode`` is "count" (integer cell counts per site, stochastic engine)
    or "density" (cells per unit trait, continuum engine).  ``step`` is
    the lattice spacing, kept here so totals do not need the grid.
    """

    t: float
    tumour: np.ndarray
    ctl: np.ndarray
    mode: str
    step: float

    def __post_init__(self):
        if self.mode not in ("count", "density"):
            raise ConfigurationError(f"mode must be 'count' or 'density', got {self.mode!r}")
        self.tumour = np.asarray(self.tumour)
        self.ctl = np.asarray(self.ctl)
        if self.tumour.shape != self.ctl.shape or self.tumour.ndim != 1:
            raise ConfigurationError("tumour and ctl must be 1-D arrays of equal length")
        if np.any(self.tumour < 0) or np.any(self.ctl < 0):
            raise ConfigurationError("populations must be non-negative")

    @property
    def rho_C(self) -> float:
        """Total tumour burden (cell count in either mode)."""
        if self.mode == "count":
            return float(self.tumour.sum())
        return float(self.tumour.sum() * self.step)

    @property
    def rho_T(self) -> float:
        """Total CTL count."""
        if self.mode == "count":
            return float(self.ctl.sum())
        return float(self.ctl.sum() * self.step)

    def copy(self) -> "PopulationState":
        return PopulationState(self.t, self.tumour.copy(), self.ctl.copy(), self.mode, self.step)
