"""Two-phase revised simplex for bounded variables.

Nonbasic columns sit at a finite bound (or at zero when free). Inequality
rows get a slack column; every row not covered by a feasible slack gets an
artificial column, and phase 1 minimises the sum of artificials. Pricing
is Dantzig (most negative reduced cost) and falls back to Bland's rule once
``stall_window`` consecutive degenerate pivots have been made; the first
strictly improving pivot switches back.
"""
from __future__ import annotations

import logging
import time

import numpy as np
import scipy.sparse as sp

from . import kernels
from .factor import BasisFactor, SingularBasis
from .problem import (
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

log = logging.getLogger(__name__)

AT_LOWER, AT_UPPER, FREE, BASIC, FIXED = (kernels.AT_LOWER, kernels.AT_UPPER, kernels.FREE,
                                          kernels.BASIC, kernels.FIXED)

TIE_TOL = 1e-12
DEGENERATE_STEP = 1e-12


class _Simplex:
    def __init__(self, lp: LinearProgram, opts: SolverOptions):
        self.lp = lp
        self.opts = opts
        self.kern = kernels.get(opts.kernels)
        m, n = lp.shape
        self.m, self.n = m, n
        b = lp.rhs
        self.b = b
        self.feas_tol = opts.feasibility_tol * (1.0 + (np.abs(b).max() if m else 0.0))

        slack_rows = np.flatnonzero(lp.senses != "E")
        slack_sign = np.where(lp.senses[slack_rows] == LE, 1.0, -1.0)
        self.n_slack = ns = slack_rows.size
        S = sp.csc_matrix((slack_sign, (slack_rows, np.arange(ns))), shape=(m, ns))

        lo = np.concatenate([lp.lower, np.zeros(ns), np.zeros(m)])
        up = np.concatenate([lp.upper, np.full(ns, np.inf), np.full(m, np.inf)])

        # nonbasic starting values
        x = np.zeros(n + ns + m)
        state = np.full(n + ns + m, AT_LOWER, dtype=np.int8)
        fin_lo = np.isfinite(lp.lower)
        fin_up = np.isfinite(lp.upper)
        x[:n] = np.where(fin_lo, lp.lower, np.where(fin_up, lp.upper, 0.0))
        state[:n] = np.where(fin_lo, AT_LOWER, np.where(fin_up, AT_UPPER, FREE))
        state[:n][fin_lo & fin_up & (lp.lower == lp.upper)] = FIXED

        resid = b - lp.A @ x[:n] if m else np.zeros(0)
        art_sign = np.where(resid >= 0, 1.0, -1.0)
        basis = np.arange(n + ns, n + ns + m, dtype=np.int64)
        # crash: a slack that absorbs the residual with the right sign starts basic
        slack_of_row = np.full(m, -1, dtype=np.int64)
        slack_of_row[slack_rows] = np.arange(ns)
        for i in range(m):
            k = slack_of_row[i]
            if k >= 0:
                v = resid[i] * (1.0 if lp.senses[i] == LE else -1.0)
                if v >= 0:
                    basis[i] = n + k
        art = n + ns + np.arange(m)
        self.art_start = n + ns
        A_art = sp.csc_matrix((art_sign, (np.arange(m), np.arange(m))), shape=(m, m))
        self.A = sp.hstack([lp.A, S, A_art], format="csc")
        self.A.sort_indices()
        self.AT = self.A.T.tocsr()

        state[basis] = BASIC
        used_art = basis >= self.art_start
        idle_art = np.setdiff1d(art, basis[used_art])
        up[idle_art] = 0.0
        state[idle_art] = FIXED

        self.lo, self.up, self.x, self.state = lo, up, x, state
        self.basis = basis
        self.factor = BasisFactor(self.A, self.kern, opts.dense_threshold)
        self.iterations = 0
        self.phase1_iterations = 0
        self.max_iterations = opts.max_iterations if opts.max_iterations is not None else 50 * (n + m)
        self.breakdown = ""

    # -- linear algebra helpers -------------------------------------------------
    def column(self, j):
        A = self.A
        col = np.zeros(self.m)
        s, e = A.indptr[j], A.indptr[j + 1]
        col[A.indices[s:e]] = A.data[s:e]
        return col

    def refactor(self):
        self.factor.refactor(self.basis)
        xn = self.x.copy()
        xn[self.basis] = 0.0
        rhs = self.b - self.A @ xn
        self.xb = self.factor.ftran(rhs)
        self.lb = np.ascontiguousarray(self.lo[self.basis])
        self.ub = np.ascontiguousarray(self.up[self.basis])

    def reduced_costs(self, cost):
        y = self.factor.btran(cost[self.basis])
        return y, cost - self.AT @ y

    # -- main loop ----------------------------------------------------------------
    def run(self, cost) -> str:
        opts = self.opts
        kern = self.kern
        stall = 0
        bland = False
        verify_rounds = 0
        self.refactor()
        while True:
            if self.factor.count >= opts.refactor_interval:
                self.refactor()
            y, d = self.reduced_costs(cost)
            q = kern.select_entering(d, self.state, opts.optimality_tol, bland)
            if q < 0:
                # confirm on a fresh factorization before declaring optimality
                if self.factor.count == 0 or verify_rounds >= 3:
                    self.y, self.d = y, d
                    return OPTIMAL
                verify_rounds += 1
                self.refactor()
                continue
            if self.iterations >= self.max_iterations:
                return ITERATION_LIMIT
            direction = 1.0 if d[q] < 0 else -1.0
            alpha = self.factor.ftran(self.column(q))
            r, theta, to_upper = kern.ratio_test(self.xb, self.lb, self.ub, alpha, direction,
                                                 opts.pivot_tol, self.basis, TIE_TOL)
            span = self.up[q] - self.lo[q]
            self.iterations += 1
            if r < 0 and not np.isfinite(span):
                self.ray = (q, direction, alpha)
                return UNBOUNDED
            if span <= theta:
                # entering column hits its own opposite bound: no basis change
                theta = span
                self.xb -= (direction * theta) * alpha
                if direction > 0:
                    self.x[q] = self.up[q]
                    self.state[q] = AT_UPPER
                else:
                    self.x[q] = self.lo[q]
                    self.state[q] = AT_LOWER
            else:
                step = direction * theta
                self.xb -= step * alpha
                leaving = self.basis[r]
                if to_upper:
                    self.x[leaving] = self.ub[r]
                    self.state[leaving] = AT_UPPER
                else:
                    self.x[leaving] = self.lb[r]
                    self.state[leaving] = AT_LOWER
                if leaving >= self.art_start or self.lb[r] == self.ub[r]:
                    self.state[leaving] = FIXED
                    if leaving >= self.art_start:
                        self.x[leaving] = 0.0
                        self.up[leaving] = 0.0
                self.x[q] += step
                self.basis[r] = q
                self.state[q] = BASIC
                self.xb[r] = self.x[q]
                self.lb[r] = self.lo[q]
                self.ub[r] = self.up[q]
                self.factor.push(r, alpha)
            if theta <= DEGENERATE_STEP:
                stall += 1
                if stall >= opts.stall_window:
                    bland = True
            else:
                stall = 0
                bland = False

    def values(self):
        x = self.x.copy()
        x[self.basis] = self.xb
        return x


def solve(lp: LinearProgram, options: SolverOptions | None = None) -> Solution:
    """Solve ``lp`` to optimality, or report infeasibility/unboundedness."""
    opts = options or SolverOptions()
    t0 = time.perf_counter()
    m, n = lp.shape
    if m == 0:
        return _solve_bounds_only(lp)
    s = _Simplex(lp, opts)
    try:
        status, sol = _two_phase(s, lp)
    except SingularBasis as exc:
        x = s.values()[:n]
        status, sol = NUMERICAL_ERROR, Solution(NUMERICAL_ERROR, x, float("nan"), s.iterations,
                                                 s.phase1_iterations, message=f"numerical breakdown: {exc}")
    log.debug("solve: %s after %d iterations (%d in phase 1) in %.3fs",
              status, sol.iterations, sol.phase1_iterations, time.perf_counter() - t0)
    return sol


def _two_phase(s: _Simplex, lp: LinearProgram):
    n, m = s.n, s.m
    N = s.A.shape[1]
    art = np.arange(s.art_start, N)
    if np.any(s.state[art] == BASIC):
        cost1 = np.zeros(N)
        cost1[art] = 1.0
        status = s.run(cost1)
        s.phase1_iterations = s.iterations
        xs = s.values()
        infeas = float(xs[art].sum())
        if status == ITERATION_LIMIT:
            return status, _result(s, lp, ITERATION_LIMIT, "iteration limit reached in phase 1", infeas)
        if infeas > s.feas_tol:
            worst = int(np.argmax(xs[art]))
            sol = _result(s, lp, INFEASIBLE, f"phase 1 stopped with total infeasibility {infeas:.6g}", infeas)
            sol.worst_row = worst
            return INFEASIBLE, sol
        # remaining artificials are pinned to zero for phase 2
        s.up[art] = 0.0
        nb = s.state[art] != BASIC
        s.state[art[nb]] = FIXED
        s.x[art[nb]] = 0.0
    cost2 = np.zeros(N)
    cost2[:n] = lp.objective
    status = s.run(cost2)
    if status == UNBOUNDED:
        return status, _result(s, lp, UNBOUNDED, "objective decreases without bound along a feasible ray")
    if status == ITERATION_LIMIT:
        return status, _result(s, lp, ITERATION_LIMIT, "iteration limit reached in phase 2")
    sol = _result(s, lp, OPTIMAL, "")
    if sol.max_residual > s.feas_tol or sol.max_bound_violation > 1e-9:
        sol.status = NUMERICAL_ERROR
        sol.message = (f"final point violates tolerances (residual {sol.max_residual:.3g}, "
                       f"bound {sol.max_bound_violation:.3g})")
    return sol.status, sol


def _result(s: _Simplex, lp: LinearProgram, status: str, message: str, infeas: float = 0.0) -> Solution:
    from .residuals import check_residuals

    n = s.n
    x = s.values()[:n]
    if status == OPTIMAL:
        # snap values within tolerance onto their bounds
        x = np.minimum(np.maximum(x, lp.lower), lp.upper)
    rep = check_residuals(lp, x)
    sol = Solution(status, x, lp.evaluate(x) if status == OPTIMAL else float("nan"), s.iterations,
                   s.phase1_iterations, rep.max_residual, rep.max_bound_violation,
                   infeasibility=infeas, message=message)
    if status == OPTIMAL:
        d = s.d
        st = s.state
        signed = np.where(st == AT_UPPER, -d, np.where(st == FREE, -np.abs(d), d))
        mask = (st == AT_LOWER) | (st == AT_UPPER) | (st == FREE)
        sol.min_reduced_cost = float(signed[mask].min()) if mask.any() else 0.0
        sol.reduced_costs = d[:n].copy()
        sol.duals = s.y.copy()
    return sol


def _solve_bounds_only(lp: LinearProgram) -> Solution:
    c, lo, up = lp.objective, lp.lower, lp.upper
    x = np.where(np.isfinite(lo), lo, np.where(np.isfinite(up), up, 0.0))
    x = np.where(c < 0, up, np.where(c > 0, lo, x))
    if not np.all(np.isfinite(x)):
        return Solution(UNBOUNDED, np.where(np.isfinite(x), x, 0.0), float("nan"),
                        message="objective decreases without bound along a feasible ray")
    d = c.copy()
    # fixed columns certify nothing either way
    signed = np.where(lo == up, np.abs(d), np.where(x == up, -d, d))
    return Solution(OPTIMAL, x, lp.evaluate(x), min_reduced_cost=float(signed.min()) if x.size else 0.0,
                    reduced_costs=d)
