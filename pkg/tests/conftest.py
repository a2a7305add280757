import resource
import time

import pytest

from hubflow.builder import build
from hubflow.casestudy import load_case_study
from hubflow.lp import solve


class Solved:
    def __init__(self, T):
        self.scenario = load_case_study(T)
        t0 = time.perf_counter()
        self.lp, self.variables, self.constraints = build(self.scenario)
        self.build_seconds = time.perf_counter() - t0
        t0 = time.perf_counter()
        self.solution = solve(self.lp)
        self.solve_seconds = time.perf_counter() - t0
        self.peak_rss_bytes = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024

    @property
    def catalogs(self):
        return self.variables, self.constraints


@pytest.fixture(scope="session")
def case24():
    return Solved(24)


@pytest.fixture(scope="session")
def case168():
    return Solved(168)
