"""Experiment runner: quadrature-error tables, servo sweeps, and the CLI."""

from .config import ControlExperimentConfig, QuadExperimentConfig
from .experiments import (
    best_alphas,
    run_quad_fixed,
    run_quad_products,
    run_quad_stochastic,
    run_servo_curves,
    run_servo_sweep,
)
from .results import ResultRow, read_csv, write_csv

__all__ = [
    "ControlExperimentConfig",
    "QuadExperimentConfig",
    "ResultRow",
    "best_alphas",
    "read_csv",
    "run_quad_fixed",
    "run_quad_products",
    "run_quad_stochastic",
    "run_servo_curves",
    "run_servo_sweep",
    "write_csv",
]
