"""Sparse LP representation, revised simplex solver, file formats and test oracle."""
from .problem import (
    EQ,
    GE,
    INFEASIBLE,
    ITERATION_LIMIT,
    LE,
    NUMERICAL_ERROR,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    Solution,
    SolverOptions,
)
from .residuals import ResidualReport, check_residuals
from .simplex import solve

__all__ = [
    "EQ", "GE", "LE", "INFEASIBLE", "ITERATION_LIMIT", "NUMERICAL_ERROR", "OPTIMAL", "UNBOUNDED",
    "LinearProgram", "Solution", "SolverOptions", "ResidualReport", "check_residuals", "solve",
]
