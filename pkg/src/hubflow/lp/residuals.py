"""Constraint residuals and bound violations of a candidate point."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .problem import GE, LE, LinearProgram


@dataclass
class ResidualReport:
    row_residuals: np.ndarray  # |a.x - b| for E rows, violation amount for L/G rows
    bound_violations: np.ndarray  # per column, 0 when within bounds
    by_tag: dict = field(default_factory=dict)  # tag -> (max residual, worst row label)

    @property
    def max_residual(self) -> float:
        return float(self.row_residuals.max()) if self.row_residuals.size else 0.0

    @property
    def max_bound_violation(self) -> float:
        return float(self.bound_violations.max()) if self.bound_violations.size else 0.0

    def worst(self, k: int = 5):
        order = np.argsort(-self.row_residuals, kind="stable")[:k]
        return [(int(i), float(self.row_residuals[i])) for i in order if self.row_residuals[i] > 0]


def check_residuals(lp: LinearProgram, x, constraints=None) -> ResidualReport:
    """Evaluate ``x`` against every row and bound of ``lp``.

    With a constraint catalog, residuals are also grouped per equation tag
    and the worst row of each tag is labelled, e.g. ``EQ6, hub2, heat, t=17``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (lp.n,):
        raise ValueError(f"expected {lp.n} values, got {x.shape}")
    ax = lp.A @ x if lp.m else np.zeros(0)
    diff = ax - lp.rhs
    res = np.abs(diff)
    le = lp.senses == LE
    ge = lp.senses == GE
    res[le] = np.maximum(diff[le], 0.0)
    res[ge] = np.maximum(-diff[ge], 0.0)
    viol = np.maximum(np.maximum(lp.lower - x, x - lp.upper), 0.0)
    report = ResidualReport(res, viol)
    if constraints is not None and lp.m:
        tags = np.array([k.tag for k in constraints.keys])
        for tag in dict.fromkeys(tags):
            rows = np.flatnonzero(tags == tag)
            i = rows[np.argmax(res[rows])]
            report.by_tag[tag] = (float(res[i]), constraints.describe(int(i)))
    return report
