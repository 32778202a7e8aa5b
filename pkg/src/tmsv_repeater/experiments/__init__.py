"""Deterministic experiments with CSV and SVG output."""

from .config import ConfigError, ExperimentConfig, load_config
from .definitions import EXPERIMENTS, Experiment, NumericalError
from .output import Check, ExperimentResult, render_csv, render_svg


def configure(name: str, path=None, seed: int | None = None) -> ExperimentConfig:
    """Resolve the configuration of experiment ``name``."""
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}")
    return load_config(name, EXPERIMENTS[name].schema, path, seed)


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    return EXPERIMENTS[cfg.name].run(cfg, threads)


__all__ = [
    "Check",
    "ConfigError",
    "EXPERIMENTS",
    "Experiment",
    "ExperimentConfig",
    "ExperimentResult",
    "NumericalError",
    "configure",
    "load_config",
    "render_csv",
    "render_svg",
    "run_experiment",
]
