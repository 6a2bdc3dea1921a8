"""Inverse method of separation of variables, classical and quantum."""

from .errors import ImsvError
from .model import (
    EnergyMap,
    ExampleParams,
    ModelSpec,
    PhasePoint,
    PolynomialF,
    SpectralPoint,
    build_example_model,
    compose_energy,
    eval_f,
    solve_y_branch,
)

__all__ = [
    "EnergyMap",
    "ExampleParams",
    "ImsvError",
    "ModelSpec",
    "PhasePoint",
    "PolynomialF",
    "SpectralPoint",
    "build_example_model",
    "compose_energy",
    "eval_f",
    "solve_y_branch",
]
