"""Constructive series extension of bounded functions on finite metric spaces."""

from .engine import (
    ExtensionResult,
    Residual,
    Term,
    evaluate,
    extend,
    extend_positive,
    normalize,
    partial_sums,
    threshold_sets,
    truncation_length,
)
from .separation import ContractViolation, SeparatingSet, complement, separate
from .space import (
    AmbientSpace,
    ClassLabel,
    SampledFunction,
    SubsetMask,
    ValidationError,
    build_space,
    dist_to_set,
    sup_norm,
)

__all__ = [
    "AmbientSpace", "ClassLabel", "ContractViolation", "ExtensionResult", "Residual",
    "SampledFunction", "SeparatingSet", "SubsetMask", "Term", "ValidationError",
    "build_space", "complement", "dist_to_set", "evaluate", "extend", "extend_positive",
    "normalize", "partial_sums", "separate", "sup_norm", "threshold_sets", "truncation_length",
]
