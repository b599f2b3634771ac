"""Optimal-reconstruction distributed storage over unidirectional rings."""

__version__ = "0.1.0"

from .algebra import FieldSpec, FieldElement, Matrix
from .construct import build_cauchy_mds, build_ed_matrix, greedy_mds_columns
from .protocol import (
    execute_reconstruction,
    execute_repair,
    plan_reconstruction,
    plan_repair,
)
from .scheme import Scheme, encode, make_scheme, validate_ordss

__all__ = [
    "FieldElement",
    "FieldSpec",
    "Matrix",
    "Scheme",
    "build_cauchy_mds",
    "build_ed_matrix",
    "encode",
    "execute_reconstruction",
    "execute_repair",
    "greedy_mds_columns",
    "make_scheme",
    "plan_reconstruction",
    "plan_repair",
    "validate_ordss",
]
