"""Named experiment presets covering the canonical scenarios.

Each preset is a full ExperimentConfig on the standard grid (1500 sites
on [-1, 1], tau = 0.05).  The fig1 family scans the interaction strength
gamma from eradication down to cold tumours with wide interaction radii
and an unperturbed initial profile; fig2/fig4 shrink the crowding radii
to trigger phenotype patterns; fig5 scans the recognition radius eta and
produces total-mass oscillations; fig6 is the regime where demographic
noise drives the stochastic tumour extinct while the continuum model
predicts coexistence.  The figS1 variants rerun fig1 with a perturbed
initial profile.
"""
from __future__ import annotations

from .core import ConfigurationError
from .config import ExperimentConfig

__all__ = ["PRESET_NAMES", "preset"]

_WIDE = dict(eta=1.8, theta_C=1.8, theta_T=1.8, a=0.0)

_PRESETS = {
    # interaction-strength scan, wide radii, unperturbed start
    "fig1a": dict(alpha_T=0.5, gamma=3.5, **_WIDE),
    "fig1b": dict(gamma=2.0, **_WIDE),
    "fig1c": dict(gamma=0.3, **_WIDE),
    "fig1d": dict(gamma=0.12, **_WIDE),
    # crowding-radius scan: phenotype patterns
    "fig2a": dict(gamma=1.5, eta=0.7, theta_C=0.5, theta_T=0.5, a=1.0),
    "fig2b": dict(gamma=1.5, eta=0.7, theta_C=0.3, theta_T=0.3, a=1.0),
    "fig2c": dict(gamma=1.5, eta=0.7, theta_C=0.2, theta_T=0.2, a=1.0),
    # time course of the fig2b pattern
    "fig4": dict(gamma=1.5, eta=0.7, theta_C=0.3, theta_T=0.3, a=1.0),
    # recognition-radius scan: oscillations
    "fig5a": dict(gamma=1.0, eta=1.0, theta_C=0.7, theta_T=0.7, a=1.0),
    "fig5b": dict(gamma=1.0, eta=0.6, theta_C=0.7, theta_T=0.7, a=1.0),
    "fig5c": dict(gamma=1.0, eta=0.2, theta_C=0.7, theta_T=0.7, a=1.0),
    # noise-driven extinction vs continuum coexistence, long horizon
    "fig6": dict(
        alpha_T=0.5, mu_T=2e-6, gamma=1.1, eta=0.1,
        theta_C=1.8, theta_T=1.8, a=1.0, t_final=100.0,
    ),
    # fig1 scenarios restarted from a perturbed profile
    "figS1a": dict(alpha_T=0.5, gamma=3.5, eta=1.8, theta_C=1.8, theta_T=1.8, a=1.0),
    "figS1b": dict(gamma=2.0, eta=1.8, theta_C=1.8, theta_T=1.8, a=1.0),
    "figS1c": dict(gamma=0.3, eta=1.8, theta_C=1.8, theta_T=1.8, a=1.0),
    "figS1d": dict(gamma=0.12, eta=1.8, theta_C=1.8, theta_T=1.8, a=1.0),
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset(name: str, **overrides) -> ExperimentConfig:
    """Build the named preset, optionally overriding individual keys."""
    try:
        base = dict(_PRESETS[name])
    except KeyError:
        raise ConfigurationError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        ) from None
    base.update(overrides)
    return ExperimentConfig(**base)
