"""Certified spectral computations for Pick matrices, Hankel sections and Carleson boxes."""

from .errors import (
    DimensionError,
    EscalationExhausted,
    IndeterminateComparison,
    InvalidParameter,
    InvariantViolation,
    PickregError,
)
from .numerics import ComplexEnclosure, Enclosure, PrecisionContext, default_context

__version__ = "0.1.0"

__all__ = [
    "ComplexEnclosure",
    "DimensionError",
    "Enclosure",
    "EscalationExhausted",
    "IndeterminateComparison",
    "InvalidParameter",
    "InvariantViolation",
    "PickregError",
    "PrecisionContext",
    "default_context",
]
