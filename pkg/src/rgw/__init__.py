"""Reinforced Galton-Watson processes."""

from .kernels import BACKEND
from .model import (
    OffspringLaw,
    ReproductionLaw,
    TypeMeasure,
    mean_gw,
    mean_offspring,
    offspring_law,
    size_biased,
    validate_law,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "OffspringLaw",
    "ReproductionLaw",
    "TypeMeasure",
    "mean_gw",
    "mean_offspring",
    "offspring_law",
    "size_biased",
    "validate_law",
]
