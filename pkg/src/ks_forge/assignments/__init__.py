"""Admissible partial value assignments and their solver."""

from ._backend import BACKEND
from .solver import (
    Assignment,
    Branch,
    Closure,
    Conflict,
    Premise,
    Step,
    Verdict,
    boolean_frame_function_exists,
    check_admissible,
    check_value_indefinite,
    definite,
    enumerate_frame_functions,
    exists_admissible,
    one,
    propagate,
    zero,
)

__all__ = [
    "BACKEND", "Assignment", "Branch", "Closure", "Conflict", "Premise", "Step", "Verdict",
    "boolean_frame_function_exists", "check_admissible", "check_value_indefinite", "definite",
    "enumerate_frame_functions", "exists_admissible", "one", "propagate", "zero",
]
