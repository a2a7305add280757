"""Basis factorization with product-form updates.

The basis matrix is factorized from scratch (dense LU for small bases,
SuperLU otherwise) and each pivot appends one eta column. Memory is
``O(nnz(L+U) + etas)`` for the sparse path and ``m**2`` for the dense one.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class SingularBasis(RuntimeError):
    pass


class BasisFactor:
    def __init__(self, A_full: sp.csc_matrix, kern, dense_threshold: int = 400, singular_tol: float = 1e-11):
        self.A = A_full
        self.m = A_full.shape[0]
        self.kern = kern
        self.dense = self.m <= dense_threshold
        self.singular_tol = singular_tol
        self._lu = None
        cap = 64
        self.rows = np.zeros(cap, dtype=np.int64)
        self.pivots = np.zeros(cap)
        self.starts = np.zeros(cap + 1, dtype=np.int64)
        self.idx = np.zeros(max(cap, self.m), dtype=np.int64)
        self.vals = np.zeros(max(cap, self.m))
        self.count = 0
        self.factorizations = 0

    def refactor(self, basis) -> None:
        self.count = 0
        self.factorizations += 1
        if self.m == 0:
            return
        B = self.A[:, basis]
        if self.dense:
            lu, piv = la.lu_factor(B.toarray(), check_finite=False)
            diag = np.abs(np.diag(lu))
            if diag.min() <= self.singular_tol * max(1.0, diag.max()):
                raise SingularBasis("basis matrix is numerically singular")
            self._lu = (lu, piv)
        else:
            try:
                lu = spla.splu(sp.csc_matrix(B), permc_spec="COLAMD")
            except RuntimeError as exc:
                raise SingularBasis(str(exc)) from None
            diag = np.abs(lu.U.diagonal())
            if diag.size and diag.min() <= self.singular_tol * max(1.0, diag.max()):
                raise SingularBasis("basis matrix is numerically singular")
            self._lu = lu

    def _solve(self, b, trans: bool):
        if self.dense:
            return la.lu_solve(self._lu, b, trans=1 if trans else 0, check_finite=False)
        return self._lu.solve(b, trans="T" if trans else "N")

    def ftran(self, a: np.ndarray) -> np.ndarray:
        """Solve ``B x = a`` for the current (updated) basis."""
        if self.m == 0:
            return np.zeros(0)
        x = np.ascontiguousarray(self._solve(a, False), dtype=float)
        if self.count:
            self.kern.eta_ftran(x, self.rows, self.pivots, self.starts, self.idx, self.vals, self.count)
        return x

    def btran(self, c: np.ndarray) -> np.ndarray:
        """Solve ``B^T y = c`` for the current (updated) basis."""
        if self.m == 0:
            return np.zeros(0)
        y = np.array(c, dtype=float)
        if self.count:
            self.kern.eta_btran(y, self.rows, self.pivots, self.starts, self.idx, self.vals, self.count)
        return np.ascontiguousarray(self._solve(y, True), dtype=float)

    def push(self, r: int, alpha: np.ndarray) -> None:
        """Record the replacement of basis position ``r`` by a column with FTRAN image ``alpha``."""
        k = self.count
        if k + 1 >= self.rows.shape[0]:
            cap = 2 * self.rows.shape[0]
            self.rows = np.resize(self.rows, cap)
            self.pivots = np.resize(self.pivots, cap)
            self.starts = np.resize(self.starts, cap + 1)
        nz = np.flatnonzero(alpha)
        nz = nz[nz != r]
        s = self.starts[k]
        e = s + nz.size
        if e > self.idx.shape[0]:
            cap = max(2 * self.idx.shape[0], e)
            self.idx = np.resize(self.idx, cap)
            self.vals = np.resize(self.vals, cap)
        self.idx[s:e] = nz
        self.vals[s:e] = alpha[nz]
        self.rows[k] = r
        self.pivots[k] = alpha[r]
        self.starts[k + 1] = e
        self.count = k + 1
