"""Flat key=value experiment configuration.

One experiment is a model parameter set plus grid, initial profile,
engine choice and replicate/seed bookkeeping.  The file format is one
``key = value`` per line, ``#`` comments and blank lines ignored.  Every
key except ``gamma`` has a default; ``gamma`` sets the strength of the
tumour/CTL interaction and must always be given.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

from .core import ConfigurationError, ModelParams, PhenotypeGrid

__all__ = ["ExperimentConfig", "parse_config_text", "load_config", "config_text"]

_ENGINES = ("ibm", "pde", "both")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment byte for byte."""

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
    L: float = 1.0
    n_sites: int = 1500
    a: float = 0.0
    A: float = 5.0
    engine: str = "both"
    replicates: int = 5
    seed: int = 2024
    snapshot_times: Tuple[float, ...] = (0.4, 4.0, 10.0, 16.0, 30.0)
    out_dir: str = "out"

    def __post_init__(self):
        if self.engine not in _ENGINES:
            raise ConfigurationError(f"engine must be one of {_ENGINES}, got {self.engine!r}")
        if self.replicates < 1:
            raise ConfigurationError(f"replicates must be >= 1, got {self.replicates}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be >= 0, got {self.seed}")
        if not 0.0 <= self.a <= 1.0:
            raise ConfigurationError(
                f"a={self.a} outside [0, 1]; a > 1 would make the initial tumour density negative"
            )
        if not self.A > 0:
            raise ConfigurationError(f"A must be positive, got {self.A}")
        if any(t < 0 for t in self.snapshot_times):
            raise ConfigurationError("snapshot times must be >= 0")
        # Grid and params constructors run their own checks.
        grid = self.grid()
        self.params().validate_radii(grid.domain_size)

    def params(self) -> ModelParams:
        names = [f.name for f in dataclasses.fields(ModelParams) if f.init]
        return ModelParams(**{n: getattr(self, n) for n in names})

    def grid(self) -> PhenotypeGrid:
        return PhenotypeGrid(half_width=self.L, n_sites=self.n_sites)

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)


_FIELD_NAMES = [f.name for f in dataclasses.fields(ExperimentConfig)]
_INT_KEYS = {"n_sites", "replicates", "seed"}
_STR_KEYS = {"engine", "out_dir"}


def _parse_value(key: str, raw: str):
    try:
        if key in _STR_KEYS:
            return raw
        if key in _INT_KEYS:
            return int(raw)
        if key == "snapshot_times":
            raw = raw.strip()
            if not raw:
                return ()
            return tuple(float(p) for p in raw.split(","))
        return float(raw)
    except ValueError as exc:
        raise ConfigurationError(f"bad value for {key}: {raw!r}") from exc


def parse_config_text(text: str, **overrides) -> ExperimentConfig:
    """Parse key=value lines into a validated ExperimentConfig.

    Unknown and duplicate keys are errors.  ``overrides`` (e.g. from CLI
    flags) are applied on top of the file values.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"line {lineno}: expected key = value, got {line.rstrip()!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _FIELD_NAMES:
            raise ConfigurationError(f"line {lineno}: unknown config key {key!r}")
        if key in values:
            raise ConfigurationError(f"line {lineno}: duplicate config key {key!r}")
        values[key] = _parse_value(key, raw)
    values.update(overrides)
    if "gamma" not in values:
        raise ConfigurationError("gamma required")
    return ExperimentConfig(**values)


def load_config(path, **overrides) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text(), **overrides)


def config_text(config: ExperimentConfig) -> str:
    """Serialize so that parse_config_text round-trips exactly."""
    lines = []
    for f in dataclasses.fields(ExperimentConfig):
        v = getattr(config, f.name)
        if f.name == "snapshot_times":
            v = ",".join(repr(t) for t in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
