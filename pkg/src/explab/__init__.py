"""explab: exact classification of time-dependent phase exponents on Lie
algebras, with group-level and PDE-level verification tools."""

__version__ = "0.1.0"

from .classify import (are_equivalent, classify, realizable_subspace,
                       verify_milne_structure)
from .cochain import OneCochain, TwoCochain, coboundary, is_cocycle, jacobi_residual
from .lie import LieAlgebra, galilean, milne, phase_space
from .ratpoly import RatPoly

__all__ = [
    "LieAlgebra",
    "OneCochain",
    "RatPoly",
    "TwoCochain",
    "__version__",
    "are_equivalent",
    "classify",
    "coboundary",
    "galilean",
    "is_cocycle",
    "jacobi_residual",
    "milne",
    "phase_space",
    "realizable_subspace",
    "verify_milne_structure",
]
