"""Pure-numpy versions of the simplex inner kernels.

Same signatures as the compiled module ``hubflow.lp._ckernels``. Results
agree up to summation order inside the transposed eta products.
"""
import numpy as np

AT_LOWER = 1
AT_UPPER = 2
FREE = 3


def eta_ftran(x, rows, pivots, starts, idx, vals, count):
    """Apply ``count`` product-form eta factors to ``x`` in order (in place)."""
    for k in range(count):
        r = rows[k]
        xr = x[r] / pivots[k]
        x[r] = xr
        if xr != 0.0:
            s, e = starts[k], starts[k + 1]
            x[idx[s:e]] -= vals[s:e] * xr


def eta_btran(y, rows, pivots, starts, idx, vals, count):
    """Apply the transposed eta factors to ``y`` in reverse order (in place)."""
    for k in range(count - 1, -1, -1):
        r = rows[k]
        s, e = starts[k], starts[k + 1]
        y[r] = (y[r] - vals[s:e] @ y[idx[s:e]]) / pivots[k]


def select_entering(d, state, tol, bland):
    """Index of the entering column or -1 when no candidate improves."""
    cand = ((state == AT_LOWER) & (d < -tol)) | ((state == AT_UPPER) & (d > tol)) | \
        ((state == FREE) & (np.abs(d) > tol))
    nz = np.flatnonzero(cand)
    if nz.size == 0:
        return -1
    if bland:
        return int(nz[0])
    scores = np.abs(d[nz])
    return int(nz[np.argmax(scores)])


def ratio_test(xb, lb, ub, alpha, direction, pivot_tol, basis, tie_tol):
    """Bounded-variable ratio test.

    Returns ``(row, theta, to_upper)``; ``row == -1`` with ``theta == inf``
    means no basic variable blocks the move.
    """
    a = direction * alpha
    dec = a > pivot_tol
    inc = a < -pivot_tol
    ratios = np.full(a.shape[0], np.inf)
    m1 = dec & np.isfinite(lb)
    ratios[m1] = (xb[m1] - lb[m1]) / a[m1]
    m2 = inc & np.isfinite(ub)
    ratios[m2] = (ub[m2] - xb[m2]) / (-a[m2])
    np.maximum(ratios, 0.0, out=ratios)
    best = ratios.min() if ratios.size else np.inf
    if not np.isfinite(best):
        return -1, np.inf, False
    ties = np.flatnonzero(ratios <= best + tie_tol * max(1.0, best))
    r = int(ties[np.argmin(basis[ties])])
    return r, float(ratios[r]), bool(inc[r])
