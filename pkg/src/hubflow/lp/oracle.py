"""Brute-force reference solver for tiny LPs.

Enumerates every basic solution in the original variable space: each
candidate vertex is the solution of a square system made of the equality
rows plus a choice of active inequality rows and bounds. Feasible candidates
are filtered and the best one returned. Unboundedness is detected by
enumerating the extreme rays of the recession cone (normalised so the
components sum to one). Cost is exponential; intended for tests only.
"""
from __future__ import annotations

from itertools import combinations

import numpy as np

from .problem import EQ, GE, INFEASIBLE, LE, OPTIMAL, UNBOUNDED, LinearProgram, Solution

MAX_COLUMNS = 10
MAX_ROWS = 12
_CHUNK = 20000


def _independent_rows(E: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    keep = []
    basis = np.zeros((0, E.shape[1]))
    for i, row in enumerate(E):
        trial = np.vstack([basis, row])
        if np.linalg.matrix_rank(trial, tol=tol) > basis.shape[0]:
            basis = trial
            keep.append(i)
    return np.array(keep, dtype=int)


def _vertices(E, e, G, g, tol):
    """All points with ``E x = e``, ``G x <= g`` that are basic solutions."""
    n = E.shape[1] if E.size else G.shape[1]
    sel = _independent_rows(E) if E.shape[0] else np.zeros(0, dtype=int)
    Es, es = E[sel], e[sel]
    need = n - sel.size
    if need < 0 or need > G.shape[0]:
        return np.zeros((0, n))
    scale_e = tol * (1.0 + np.abs(e))
    scale_g = tol * (1.0 + np.abs(g))
    found = []
    combos = combinations(range(G.shape[0]), need)
    while True:
        rows = [c for _, c in zip(range(_CHUNK), combos)]
        if not rows:
            break
        chunk = np.array(rows, dtype=int).reshape(len(rows), need)
        M = np.concatenate([np.broadcast_to(Es, (chunk.shape[0],) + Es.shape), G[chunk]], axis=1)
        rhs = np.concatenate([np.broadcast_to(es, (chunk.shape[0], es.size)), g[chunk]], axis=1)
        sv = np.linalg.svd(M, compute_uv=False)
        ok = sv[:, -1] > 1e-10 * np.maximum(1.0, sv[:, 0])
        if not ok.any():
            continue
        X = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
        feas = np.ones(X.shape[0], dtype=bool)
        if E.shape[0]:
            feas &= np.all(np.abs(X @ E.T - e) <= scale_e, axis=1)
        feas &= np.all(X @ G.T - g <= scale_g, axis=1)
        if feas.any():
            found.append(X[feas])
    return np.concatenate(found) if found else np.zeros((0, n))


def oracle_enumerate(lp: LinearProgram, tol: float = 1e-9) -> Solution:
    """Solve ``lp`` by exhaustive vertex enumeration (``n <= 10``, ``m <= 12``)."""
    m, n = lp.shape
    if n > MAX_COLUMNS or m > MAX_ROWS:
        raise ValueError(f"oracle limited to n <= {MAX_COLUMNS}, m <= {MAX_ROWS}; got n={n}, m={m}")
    if not np.all(np.isfinite(lp.lower)):
        raise ValueError("oracle requires finite lower bounds")
    if n == 0:
        feasible = np.all(np.where(lp.senses == EQ, lp.rhs == 0,
                                   np.where(lp.senses == LE, 0 <= lp.rhs, 0 >= lp.rhs)))
        return Solution(OPTIMAL if feasible else INFEASIBLE, np.zeros(0), lp.offset if feasible else float("nan"))
    A = lp.A.toarray()
    s = lp.senses
    E, e = A[s == EQ], lp.rhs[s == EQ]
    fin_up = np.isfinite(lp.upper)
    eye = np.eye(n)
    G = np.vstack([A[s == LE], -A[s == GE], -eye, eye[fin_up]])
    g = np.concatenate([lp.rhs[s == LE], -lp.rhs[s == GE], -lp.lower, lp.upper[fin_up]])

    verts = _vertices(E, e, G, g, tol)
    if verts.shape[0] == 0:
        return Solution(INFEASIBLE, np.zeros(n), float("nan"), message="no basic feasible solution")
    # recession cone, normalised by sum(d) = 1 (d >= 0 holds because lower bounds are finite)
    E_r = np.vstack([E, np.ones((1, n))])
    e_r = np.concatenate([np.zeros(E.shape[0]), [1.0]])
    rays = _vertices(E_r, e_r, G, np.zeros(G.shape[0]), tol)
    if rays.shape[0] and np.min(rays @ lp.objective) < -tol:
        return Solution(UNBOUNDED, verts[0], float("nan"), message="improving extreme ray found")
    vals = verts @ lp.objective
    k = int(np.argmin(vals))
    return Solution(OPTIMAL, verts[k], float(vals[k]) + lp.offset)
