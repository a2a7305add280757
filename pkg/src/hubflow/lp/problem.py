"""Sparse linear program and solver result containers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"
NUMERICAL_ERROR = "numerical_error"

EQ, LE, GE = "E", "L", "G"


class LinearProgram:
    """``min c.x + offset`` subject to row constraints and column bounds.

    Rows are ``A[i] . x (=|<=|>=) rhs[i]`` with ``senses[i]`` in ``"E"``,
    ``"L"``, ``"G"``. The matrix is kept in CSC form with duplicates summed
    and explicit zeros dropped.
    """

    def __init__(self, A, rhs, objective, lower=None, upper=None, senses=None,
                 offset: float = 0.0, col_names=None, row_names=None, name: str = "hubflow"):
        A = sp.csc_matrix(A, dtype=float)
        A.sum_duplicates()
        A.eliminate_zeros()
        A.sort_indices()
        self.A = A
        m, n = A.shape
        self.rhs = np.asarray(rhs, dtype=float).reshape(m)
        self.objective = np.asarray(objective, dtype=float).reshape(n)
        self.lower = np.zeros(n) if lower is None else np.asarray(lower, dtype=float).reshape(n)
        self.upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float).reshape(n)
        self.senses = np.array([EQ] * m if senses is None else list(senses), dtype="<U1").reshape(m)
        self.offset = float(offset)
        self.col_names = None if col_names is None else list(col_names)
        self.row_names = None if row_names is None else list(row_names)
        self.name = name
        self._check()

    def _check(self):
        if not np.all(np.isfinite(self.rhs)):
            raise ValueError("right-hand sides must be finite")
        if not np.all(np.isfinite(self.objective)):
            raise ValueError("objective coefficients must be finite")
        if np.any(self.lower > self.upper):
            j = int(np.argmax(self.lower > self.upper))
            raise ValueError(f"column {j}: lower bound {self.lower[j]} exceeds upper bound {self.upper[j]}")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise ValueError("bounds must not exclude every finite value")
        if not set(np.unique(self.senses)) <= {EQ, LE, GE}:
            raise ValueError("row senses must be E, L or G")

    @property
    def shape(self):
        return self.A.shape

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def nnz(self) -> int:
        return self.A.nnz

    def with_objective(self, objective) -> "LinearProgram":
        return LinearProgram(self.A, self.rhs, objective, self.lower, self.upper, self.senses,
                             self.offset, self.col_names, self.row_names, self.name)

    def evaluate(self, x) -> float:
        return float(self.objective @ np.asarray(x, dtype=float)) + self.offset


@dataclass
class SolverOptions:
    max_iterations: Optional[int] = None  # default 50 * (n + m)
    feasibility_tol: float = 1e-6  # scaled by 1 + |rhs|_inf
    optimality_tol: float = 1e-9
    pivot_tol: float = 1e-9
    refactor_interval: int = 100
    stall_window: int = 50
    dense_threshold: int = 400  # dense LU below this many rows
    kernels: Optional[str] = None  # "compiled" | "python" | None for the default


@dataclass
class Solution:
    status: str
    x: np.ndarray
    objective: float
    iterations: int = 0
    phase1_iterations: int = 0
    max_residual: float = 0.0
    max_bound_violation: float = 0.0
    min_reduced_cost: float = 0.0  # over nonbasic columns, signed so >= 0 certifies optimality
    infeasibility: float = 0.0  # phase-1 objective at termination
    message: str = ""
    worst_row: Optional[int] = None  # row carrying the largest infeasibility
    reduced_costs: Optional[np.ndarray] = field(default=None, repr=False)
    duals: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL
