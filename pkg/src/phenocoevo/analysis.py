"""Linear analysis of the spatially homogeneous model and run classification.

Integrating the densities over the trait interval turns the nonlocal
model into a planar system for the totals (rho_C, rho_T):

    rho_C' = (alpha_C - mu_C*rho_C/S - g_C*rho_T/S) * rho_C
    rho_T' = (alpha_T + g_T*rho_C/S - mu_T*rho_T/S) * rho_T

with S the interval length, g_C = zeta_C*gamma, g_T = zeta_T*gamma.  This
module locates its steady states, gives their eigenvalues, evaluates the
dispersion relation of trait-dependent perturbations around coexistence,
and derives the mutation-diffusivity bound under which some lattice mode
can grow.  It also classifies finished runs by their time-averaged
immune score and counts phenotype peaks in density profiles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.signal import find_peaks

from .core import ModelParams

__all__ = [
    "SteadyStates",
    "EigenReport",
    "DispersionCurve",
    "PatternBound",
    "Classification",
    "steady_states",
    "homogeneous_stability",
    "dispersion",
    "dispersion_at",
    "pattern_bound",
    "average_immune_score",
    "classify",
    "count_peaks",
]


def _sinc(x: float) -> float:
    """sin(x)/x with a series branch for the removable singularity."""
    if abs(x) < 1e-6:
        return 1.0 - x * x / 6.0
    return math.sin(x) / x


@dataclass(frozen=True)
class SteadyStates:
    """Homogeneous steady states of the planar total-mass system."""

    gamma_threshold: float                       # coexistence exists iff gamma < this
    ctl_only: Tuple[float, float]                # (0, alpha_T*S/mu_T)
    coexistence: Optional[Tuple[float, float]]   # None when gamma >= threshold


def steady_states(params: ModelParams, domain_size: float) -> SteadyStates:
    if not domain_size > 0:
        raise ValueError(f"domain_size must be positive, got {domain_size}")
    if params.alpha_T <= 0 or params.mu_T <= 0:
        raise ValueError("alpha_T and mu_T must be positive for the CTL-only state")
    size = domain_size
    ctl_only = (0.0, params.alpha_T * size / params.mu_T)
    if params.zeta_C > 0:
        threshold = (params.mu_T / params.alpha_T) * (params.alpha_C / params.zeta_C)
    else:
        threshold = math.inf
    coexistence = None
    if params.gamma < threshold:
        g_c, g_t = params.gamma_C, params.gamma_T
        denom = g_t * g_c + params.mu_C * params.mu_T
        if denom > 0:
            rho_c = size * (params.alpha_C * params.mu_T - params.alpha_T * g_c) / denom
            rho_t = size * (params.alpha_T * params.mu_C + params.alpha_C * g_t) / denom
            coexistence = (rho_c, rho_t)
    return SteadyStates(gamma_threshold=threshold, ctl_only=ctl_only, coexistence=coexistence)


def _quadratic_roots(trace: float, det: float) -> Tuple[complex, complex]:
    """Roots of x**2 - trace*x + det, cancellation-safe, real-part descending."""
    disc = trace * trace - 4.0 * det
    if disc >= 0.0:
        sq = math.sqrt(disc)
        big = 0.5 * (trace + sq) if trace >= 0 else 0.5 * (trace - sq)
        if big == 0.0:
            r1, r2 = 0.0 + 0.0j, 0.0 + 0.0j
        else:
            r1, r2 = complex(big), complex(det / big)
    else:
        half = 0.5 * math.sqrt(-disc)
        r1, r2 = complex(0.5 * trace, half), complex(0.5 * trace, -half)
    if r1.real < r2.real:
        r1, r2 = r2, r1
    return r1, r2


@dataclass(frozen=True)
class EigenReport:
    """Linearisation at one homogeneous steady state."""

    which: str
    fixed_point: Tuple[float, float]
    trace: float
    determinant: float
    eigenvalues: Tuple[complex, complex]
    stable: bool


def homogeneous_stability(params: ModelParams, domain_size: float, which: str) -> EigenReport:
    """Eigenvalues of the planar system at 'ctl_only' or 'coexistence'.

    The characteristic polynomial is x**2 - trace*x + determinant with the
    closed forms below; stability means both real parts strictly negative.
    """
    ss = steady_states(params, domain_size)
    size = domain_size
    g_c, g_t = params.gamma_C, params.gamma_T
    if which == "ctl_only":
        point = ss.ctl_only
        # Jacobian is triangular here: eigenvalues are the tumour invasion
        # rate alpha_C - g_C*rho_T/S and the CTL relaxation rate -alpha_T.
        invasion = params.alpha_C - g_c * point[1] / size
        trace = invasion - params.alpha_T
        det = -params.alpha_T * invasion
    elif which == "coexistence":
        if ss.coexistence is None:
            raise ValueError(
                f"no coexistence state: gamma={params.gamma} >= threshold {ss.gamma_threshold:.6g}"
            )
        point = ss.coexistence
        rc, rt = point[0] / size, point[1] / size
        trace = -(params.mu_C * rc + params.mu_T * rt)
        det = rc * rt * (params.mu_C * params.mu_T + g_c * g_t)
    else:
        raise ValueError(f"which must be 'ctl_only' or 'coexistence', got {which!r}")
    roots = _quadratic_roots(trace, det)
    return EigenReport(
        which=which,
        fixed_point=point,
        trace=trace,
        determinant=det,
        eigenvalues=roots,
        stable=max(r.real for r in roots) < 0.0,
    )


def dispersion_at(
    params: ModelParams, k: float, domain_size: float, diffusivity: float
) -> Tuple[float, float, float]:
    """(trace, determinant, max real eigenvalue part) of mode wavenumber k.

    Linearisation around coexistence: trait-periodic perturbations with
    wavenumber k see windowed averages damped by sinc(k*radius) and the
    tumour additionally damped by k**2 * diffusivity.  As k -> 0 this
    reduces to the homogeneous coexistence linearisation.
    """
    ss = steady_states(params, domain_size)
    if ss.coexistence is None:
        raise ValueError(
            f"no coexistence state: gamma={params.gamma} >= threshold {ss.gamma_threshold:.6g}"
        )
    size = domain_size
    rc = ss.coexistence[0] / size
    rt = ss.coexistence[1] / size
    s_c = _sinc(k * params.theta_C)
    s_t = _sinc(k * params.theta_T)
    s_e = _sinc(k * params.eta)
    k2b = k * k * diffusivity
    g_c, g_t = params.gamma_C, params.gamma_T
    trace = -k2b - params.mu_C * s_c * rc - params.mu_T * s_t * rt
    det = k2b * params.mu_T * s_t * rt + rc * rt * (
        g_c * g_t * s_e * s_e + params.mu_C * params.mu_T * s_c * s_t
    )
    roots = _quadratic_roots(trace, det)
    return trace, det, max(r.real for r in roots)


@dataclass(frozen=True)
class DispersionCurve:
    """Growth spectrum over the discrete no-flux modes k = m*pi/size."""

    modes: np.ndarray        # integer mode numbers m
    wavenumbers: np.ndarray
    trace: np.ndarray
    determinant: np.ndarray
    re_lambda_max: np.ndarray

    def fastest_mode(self) -> int:
        """Mode number with the largest growth rate."""
        return int(self.modes[np.argmax(self.re_lambda_max)])


def dispersion(
    params: ModelParams, domain_size: float, diffusivity: float, m_max: int = 100
) -> DispersionCurve:
    if m_max < 1:
        raise ValueError(f"m_max must be >= 1, got {m_max}")
    modes = np.arange(1, m_max + 1)
    ks = modes * math.pi / domain_size
    rows = [dispersion_at(params, float(k), domain_size, diffusivity) for k in ks]
    arr = np.asarray(rows)
    return DispersionCurve(
        modes=modes,
        wavenumbers=ks,
        trace=arr[:, 0],
        determinant=arr[:, 1],
        re_lambda_max=arr[:, 2],
    )


@dataclass(frozen=True)
class PatternBound:
    """Largest tumour diffusivity that still lets some lattice mode grow.

    ``modes`` is the first contiguous band of mode numbers whose window
    average flips sign (sinc(k*theta) < 0); ``bound`` is the smallest
    per-mode diffusivity threshold over that band, so diffusivity < bound
    guarantees at least one unstable mode.  ``verdict`` compares a given
    diffusivity against the bound (None when not supplied or no band).
    """

    bound: Optional[float]
    modes: Tuple[int, ...]
    verdict: Optional[bool]
    note: str = ""


def pattern_bound(
    params: ModelParams,
    theta: float,
    domain_size: float,
    m_max: int = 100,
    diffusivity: Optional[float] = None,
) -> PatternBound:
    """Diffusivity bound for pattern onset, assuming equal radii theta.

    Per mode k the trace changes sign when diffusivity reaches
    -sinc(k*theta) * (mu_C*rho_C + mu_T*rho_T) / (k**2 * size); the bound
    minimises this over the first band of modes with sinc(k*theta) < 0.
    Scanning further bands adds ever-smaller thresholds (the k**-2 decay
    makes the infimum over all modes vacuous), so the first band is the
    one that decides whether patterns appear at the natural length scale.
    """
    ss = steady_states(params, domain_size)
    if ss.coexistence is None:
        raise ValueError(
            f"no coexistence state: gamma={params.gamma} >= threshold {ss.gamma_threshold:.6g}"
        )
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    size = domain_size
    mass = params.mu_C * ss.coexistence[0] + params.mu_T * ss.coexistence[1]
    band = []
    thresholds = []
    for m in range(1, m_max + 1):
        k = m * math.pi / size
        s = _sinc(k * theta)
        # strict negativity up to sin() rounding, so a mode sitting exactly
        # on a node (k*theta a multiple of 2*pi) never sneaks into the band
        if s < -1e-12:
            band.append(m)
            thresholds.append(-s * mass / (k * k * size))
        elif band:
            break
    if not band:
        return PatternBound(
            bound=None,
            modes=(),
            verdict=None,
            note=f"no mode with a sign-flipped window average among m <= {m_max}",
        )
    bound = min(thresholds)
    verdict = None if diffusivity is None else bool(diffusivity < bound)
    return PatternBound(
        bound=bound,
        modes=tuple(band),
        verdict=verdict,
        note=f"band modes {band[0]}..{band[-1]}, minimising mode m={band[int(np.argmin(thresholds))]}",
    )


def average_immune_score(trajectory) -> float:
    """Time-averaged CTL-to-tumour ratio over the recorded steps.

    Uses the right-endpoint rule (steps 1..H); steps after tumour
    extinction carry an infinite score and are excluded, so the average
    covers the lifetime of the tumour.  Returns inf if the tumour was
    extinct from the first step on.
    """
    scores = np.asarray(trajectory.immune_score, dtype=float)[1:]
    if scores.size == 0:
        raise ValueError("trajectory has no recorded steps after t=0")
    finite = np.isfinite(scores)
    if not np.any(finite):
        return math.inf
    return float(scores[finite].mean())


@dataclass(frozen=True)
class Classification:
    """Immune-score label of one finished run."""

    label: str        # "eradication" | "hot" | "altered" | "cold"
    mean_score: float


def classify(trajectory, hot_threshold: float = 10.0, cold_threshold: float = 1.0) -> Classification:
    """Label a trajectory by its average immune score.

    Tumour extinction overrides the score bands: the scenario is
    "eradication".  Otherwise hot means mean score >= hot_threshold, cold
    means < cold_threshold, altered in between.
    """
    if not 0 < cold_threshold <= hot_threshold:
        raise ValueError("need 0 < cold_threshold <= hot_threshold")
    mean = average_immune_score(trajectory)
    if getattr(trajectory, "terminal", "") == "tumour_extinct":
        return Classification("eradication", mean)
    if mean >= hot_threshold:
        label = "hot"
    elif mean < cold_threshold:
        label = "cold"
    else:
        label = "altered"
    return Classification(label, mean)


def count_peaks(
    values: np.ndarray,
    smooth_frac: float = 0.05,
    min_height_frac: float = 0.2,
    min_prominence_frac: float = 0.1,
) -> int:
    """Number of interior density peaks, robust to demographic noise.

    The profile is smoothed with a centred moving average whose width is
    max(3, round(smooth_frac * n)) sites (forced odd), then strict local
    maxima are counted if they reach min_height_frac of the smoothed
    maximum and have at least min_prominence_frac of the smoothed
    contrast as topographic prominence.  The prominence requirement stops
    residual demographic noise riding on top of a wide hump from
    splitting it into several counted peaks; measured noise prominences
    stay below 0.05 of contrast while genuine pattern humps exceed 0.15.
    A profile whose smoothed contrast (max - min) stays below the height
    threshold has no peaks: every local maximum of an essentially flat
    profile would otherwise clear a threshold measured from zero.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise ValueError("values must be a 1-D array")
    n = values.size
    if n < 3:
        return 0
    width = max(3, int(round(smooth_frac * n)))
    if width % 2 == 0:
        width += 1
    smoothed = uniform_filter1d(values, size=width, mode="nearest")
    top = smoothed.max()
    contrast = top - smoothed.min()
    if top <= 0 or contrast <= min_height_frac * top:
        return 0
    peaks, _ = find_peaks(
        smoothed, height=min_height_frac * top, prominence=min_prominence_frac * contrast
    )
    return int(peaks.size)
