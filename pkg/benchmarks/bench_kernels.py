"""Compiled vs numpy simplex kernels.

Times each kernel on synthetic inputs sized like the full case study, then
solves the bundled case study truncated to ``--hours`` with both kernel
sets. Objectives agree; iteration counts can differ by a few pivots because
the two ``eta_btran`` versions sum dot products in a different order.

    python benchmarks/bench_kernels.py --hours 24
"""
import argparse
import time

import numpy as np

from hubflow.builder import build
from hubflow.casestudy import load_case_study
from hubflow.lp import SolverOptions, kernels, solve
from hubflow.lp import _pykernels


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def micro(m=20000, n=40000, etas=100, fill=40, repeat=20, seed=0):
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, m, etas).astype(np.int64)
    pivots = rng.uniform(0.5, 2.0, etas)
    starts = np.arange(0, (etas + 1) * fill, fill, dtype=np.int64)
    idx = rng.integers(0, m, etas * fill).astype(np.int64)
    vals = rng.normal(size=etas * fill)
    d = rng.normal(size=n)
    state = rng.integers(0, 4, n).astype(np.int8)
    xb = rng.uniform(0, 10, m)
    lb = np.zeros(m)
    ub = np.where(rng.random(m) < 0.5, 20.0, np.inf)
    alpha = np.where(rng.random(m) < 0.05, rng.normal(size=m), 0.0)
    basis = rng.permutation(n)[:m].astype(np.int64)
    x0 = rng.normal(size=m)

    sets = [("python", _pykernels)]
    if kernels.COMPILED_AVAILABLE:
        sets.insert(0, ("compiled", kernels.get("compiled")))
    results = {}
    for name, k in sets:
        results[name] = {
            "eta_ftran": _time(lambda: k.eta_ftran(x0.copy(), rows, pivots, starts, idx, vals, etas), repeat),
            "eta_btran": _time(lambda: k.eta_btran(x0.copy(), rows, pivots, starts, idx, vals, etas), repeat),
            "select_entering": _time(lambda: k.select_entering(d, state, 1e-9, False), repeat),
            "select_bland": _time(lambda: k.select_entering(d, state, 1e-9, True), repeat),
            "ratio_test": _time(lambda: k.ratio_test(xb, lb, ub, alpha, 1.0, 1e-9, basis, 1e-12), repeat),
        }
    return results


def end_to_end(hours):
    lp, _, _ = build(load_case_study(hours))
    out = {}
    names = ["python"] + (["compiled"] if kernels.COMPILED_AVAILABLE else [])
    for name in names:
        t0 = time.perf_counter()
        sol = solve(lp, SolverOptions(kernels=name))
        out[name] = (time.perf_counter() - t0, sol.objective, sol.iterations)
    return lp.shape, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--hours", type=int, default=24)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    print(f"compiled kernels available: {kernels.COMPILED_AVAILABLE}")
    res = micro(repeat=args.repeat)
    names = list(res)
    print(f"{'kernel':<18s}" + "".join(f"{n + ' (us)':>16s}" for n in names) + f"{'speedup':>10s}")
    for k in res[names[-1]]:
        row = [res[n][k] * 1e6 for n in names]
        speed = f"{row[-1] / row[0]:9.1f}x" if len(row) == 2 else ""
        print(f"{k:<18s}" + "".join(f"{v:16.1f}" for v in row) + f"{speed:>10s}")

    shape, out = end_to_end(args.hours)
    print(f"\ncase study T={args.hours}: {shape[0]} rows x {shape[1]} columns")
    for name, (secs, obj, its) in out.items():
        print(f"  {name:<9s} {secs:8.2f} s  objective {obj!r}  iterations {its}")
    if len(out) == 2:
        (a, b) = out.values()
        rel = abs(a[1] - b[1]) / max(1.0, abs(b[1]))
        print(f"  objective relative difference {rel:.2e}, speedup {a[0] / b[0]:.1f}x")


if __name__ == "__main__":
    main()
