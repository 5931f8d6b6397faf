"""Numerical laboratory for variable-exponent Lebesgue and Morrey-type norms,
the classical operators acting on them, and embedding experiments on bounded
domains."""

from . import conditions, exponents, fields, geometry, moments, norms, operators
from ._kernels import active_backend, set_backend
from .experiments import (ExperimentConfig, ExperimentReport, run_experiment,
                          standard_test_family)
from .geometry import DomainSpec, RadialLadder, build_grid

__version__ = "0.1.0"

__all__ = [
    "DomainSpec", "RadialLadder", "build_grid", "ExperimentConfig",
    "ExperimentReport", "run_experiment", "standard_test_family",
    "active_backend", "set_backend", "conditions", "exponents", "fields",
    "geometry", "moments", "norms", "operators",
]
