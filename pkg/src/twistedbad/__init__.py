"""Weighted twisted Diophantine approximation for systems of linear forms.

Exact arithmetic over Q and Q(sqrt d), Minkowski box searches for
best-approximation vectors, lacunary partitions, a Schmidt game engine and
finite-horizon badness verifiers.
"""
from .core import FormsMatrix, IntVector, PrecisionBudget, WeightVector, rank_classify
from .errors import (
    AuditFailure,
    BoxTooLarge,
    DegenerateRank,
    DimensionError,
    IllegalMove,
    MixedFieldError,
    NoPoint,
    TwistedBadError,
    Undecidable,
)
from .scalar import PowScalar, Scalar

__version__ = "0.1.0"

__all__ = [
    "AuditFailure", "BoxTooLarge", "DegenerateRank", "DimensionError", "FormsMatrix",
    "IllegalMove", "IntVector", "MixedFieldError", "NoPoint", "PowScalar", "PrecisionBudget",
    "Scalar", "TwistedBadError", "Undecidable", "WeightVector", "rank_classify",
]
