import tracemalloc

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import boiler, random_lp
from hubflow.builder import build
from hubflow.lp import (
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    SolverOptions,
    check_residuals,
    solve,
)
from hubflow.lp import kernels
from hubflow.lp.kernels import AT_LOWER, AT_UPPER, BASIC, FREE
from hubflow.lp.oracle import oracle_enumerate
from hubflow.model import Port
from dataclasses import replace

KERNELS = ["python"] + (["compiled"] if kernels.COMPILED_AVAILABLE else [])


def lp1(A, rhs, c, lo=None, up=None, senses=None):
    return LinearProgram(np.atleast_2d(np.asarray(A, dtype=float)), rhs, c, lo, up, senses)


# -- trivial instances ------------------------------------------------------------


def test_single_bounded_variable():
    lp = LinearProgram(sp.csc_matrix((0, 1)), [], [-1.0], [0.0], [5.0])
    sol = solve(lp)
    assert sol.status == OPTIMAL and sol.x[0] == 5.0 and sol.objective == -5.0


def test_single_bounded_variable_with_a_row():
    sol = solve(lp1([[1.0]], [3.0], [-1.0], up=[5.0], senses="L"))
    assert sol.status == OPTIMAL and sol.objective == pytest.approx(-3.0)


def test_contradictory_rows_infeasible():
    sol = solve(lp1([[1.0], [1.0]], [1.0, 0.0], [0.0], senses="GL"))
    assert sol.status == INFEASIBLE
    assert oracle_enumerate(lp1([[1.0], [1.0]], [1.0, 0.0], [0.0], senses="GL")).status == INFEASIBLE


def test_unbounded_ray():
    lp = LinearProgram(sp.csc_matrix((0, 1)), [], [-1.0])
    assert solve(lp).status == UNBOUNDED
    sol = solve(lp1([[1.0, -1.0]], [0.0], [-1.0, 0.0]))
    assert sol.status == UNBOUNDED
    assert oracle_enumerate(lp1([[1.0, -1.0]], [0.0], [-1.0, 0.0])).status == UNBOUNDED


def test_empty_lp():
    lp = LinearProgram(sp.csc_matrix((0, 0)), [], [])
    sol = solve(lp)
    assert sol.status == OPTIMAL and sol.objective == 0.0 and sol.x.size == 0


def test_feasible_slack_start_skips_phase_one():
    # x + y <= 4 with x, y >= 0: the slack basis is feasible from the start
    sol = solve(lp1([[1.0, 1.0]], [4.0], [-1.0, -2.0], senses="L"))
    assert sol.status == OPTIMAL and sol.phase1_iterations == 0
    assert sol.objective == pytest.approx(-8.0)


def test_unit_simplex_oracle():
    lp = lp1([[1.0, 1.0]], [1.0], [-1.0, -1.0], up=[1.0, 1.0], senses="L")
    ref = oracle_enumerate(lp)
    assert ref.status == OPTIMAL and ref.objective == pytest.approx(-1.0)
    assert solve(lp).objective == pytest.approx(-1.0)


def test_oracle_rejects_large_instances():
    with pytest.raises(ValueError):
        oracle_enumerate(LinearProgram(sp.csc_matrix((1, 11)), [0.0], np.zeros(11)))


def test_capped_sources_report_infeasibility_amount():
    s = boiler(load=10.0, eff=1.0)
    s = replace(s, ports=(Port("h", "gas", "import", price=(1.0,), max_flow=(8.0,)), s.ports[1]))
    lp, _, rows = build(s)
    sol = solve(lp)
    assert sol.status == INFEASIBLE
    assert sol.infeasibility >= 2.0 - 1e-9
    assert sol.worst_row is not None and 0 <= sol.worst_row < lp.m


def test_iteration_limit():
    rng = np.random.default_rng(3)
    n = 30
    A = rng.uniform(0.1, 1.0, size=(20, n))
    lp = lp1(A, np.ones(20) * 10, -rng.uniform(1, 2, n), senses="L" * 20)
    sol = solve(lp, SolverOptions(max_iterations=2))
    assert sol.status == ITERATION_LIMIT
    assert solve(lp).status == OPTIMAL


def test_ge_rows_and_free_columns():
    # min x + y, x - y = 1, x >= 0, y free, y >= -3 via a G row; x >= 0 binds first
    lp = lp1([[1.0, -1.0], [0.0, 1.0]], [1.0, -3.0], [1.0, 1.0], lo=[0.0, -np.inf], senses="EG")
    sol = solve(lp)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(-1.0)
    assert sol.x == pytest.approx([0.0, -1.0])
    # drop x >= 0 and the G row binds instead
    lp = lp1([[1.0, -1.0], [0.0, 1.0]], [1.0, -3.0], [1.0, 1.0], lo=[-np.inf, -np.inf], senses="EG")
    sol = solve(lp)
    assert sol.objective == pytest.approx(-5.0)
    assert sol.x == pytest.approx([-2.0, -3.0])


def test_objective_offset_is_carried():
    lp = LinearProgram(np.array([[1.0]]), [2.0], [3.0], offset=1.5)
    assert solve(lp).objective == pytest.approx(7.5)


# -- pivoting ---------------------------------------------------------------------


@pytest.mark.parametrize("name", KERNELS)
def test_most_negative_reduced_cost_enters(name):
    k = kernels.get(name)
    state = np.full(3, AT_LOWER, dtype=np.int8)
    assert k.select_entering(np.array([-3.0, -1.0, 0.0]), state, 1e-9, False) == 0
    assert k.select_entering(np.array([-1.0, -3.0, 0.0]), state, 1e-9, False) == 1
    assert k.select_entering(np.array([-1.0, -3.0, 0.0]), state, 1e-9, True) == 0


@pytest.mark.parametrize("name", KERNELS)
def test_no_candidate_means_optimal(name):
    k = kernels.get(name)
    state = np.array([AT_LOWER, AT_UPPER, FREE, BASIC], dtype=np.int8)
    d = np.array([-1e-10, 1e-10, 5e-10, -7.0])
    assert k.select_entering(d, state, 1e-9, False) == -1
    assert k.select_entering(d, state, 1e-9, True) == -1


@pytest.mark.parametrize("name", KERNELS)
def test_entering_respects_bound_state(name):
    k = kernels.get(name)
    state = np.array([AT_UPPER, AT_LOWER, FREE], dtype=np.int8)
    # at upper a positive reduced cost improves; free columns use |d|
    assert k.select_entering(np.array([2.0, 1.0, -1.5]), state, 1e-9, False) == 0
    assert k.select_entering(np.array([-2.0, 1.0, -1.5]), state, 1e-9, False) == 2


@pytest.mark.parametrize("name", KERNELS)
def test_ratio_test_ties_break_on_lowest_variable(name):
    k = kernels.get(name)
    xb = np.array([2.0, 4.0, 1.0])
    lb = np.zeros(3)
    ub = np.full(3, np.inf)
    alpha = np.array([1.0, 2.0, 0.0])
    basis = np.array([7, 3, 1], dtype=np.int64)
    r, theta, up = k.ratio_test(xb, lb, ub, alpha, 1.0, 1e-9, basis, 1e-12)
    assert (r, theta, up) == (1, 2.0, False)


def beale():
    """Beale's cycling example: Dantzig pricing with naive ties cycles forever."""
    A = [[0.25, -8.0, -1.0, 9.0], [0.5, -12.0, -0.5, 3.0], [0.0, 0.0, 1.0, 0.0]]
    return lp1(A, [0.0, 0.0, 1.0], [-0.75, 20.0, -0.5, 6.0], senses="LLL")


def klee_minty(n):
    A = np.zeros((n, n))
    for i in range(n):
        for j in range(i):
            A[i, j] = 2.0 ** (i - j + 1)
        A[i, i] = 1.0
    c = -np.array([2.0 ** (n - 1 - j) for j in range(n)])
    return lp1(A, [5.0 ** (i + 1) for i in range(n)], c, senses="L" * n)


@pytest.mark.parametrize("window", [0, 1, 50])
def test_degenerate_fixture_terminates(window):
    lp = beale()
    sol = solve(lp, SolverOptions(stall_window=window))
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(oracle_enumerate(lp).objective, abs=1e-9)
    assert sol.objective == pytest.approx(-1.25)


@pytest.mark.parametrize("n", [3, 6, 8])
def test_klee_minty_terminates(n):
    lp = klee_minty(n)
    sol = solve(lp, SolverOptions(stall_window=1))
    assert sol.status == OPTIMAL
    assert sol.iterations <= 50 * (lp.n + lp.m)
    assert sol.objective == pytest.approx(-(5.0 ** n), rel=1e-12)


# -- residuals --------------------------------------------------------------------


def test_exact_solution_has_zero_residuals():
    lp, _, rows = build(boiler())
    sol = solve(lp)
    rep = check_residuals(lp, sol.x, rows)
    assert rep.max_residual == 0.0 and rep.max_bound_violation == 0.0
    assert set(rep.by_tag) == {"EQ3", "EQ4", "EQ5", "EQ6", "EQ7", "EQ8", "EQ9", "EQ10", "EQ11"}


def test_perturbation_hits_exactly_the_incident_rows():
    lp, variables, rows = build(boiler())
    sol = solve(lp)
    for j in range(lp.n):
        x = sol.x.copy()
        x[j] += 1e-3
        rep = check_residuals(lp, x, rows)
        expected = np.zeros(lp.m)
        col = lp.A[:, [j]].tocoo()
        expected[col.row] = np.abs(col.data) * 1e-3
        assert np.allclose(rep.row_residuals, expected, rtol=1e-9, atol=1e-15)
        assert np.count_nonzero(rep.row_residuals) == col.nnz


def test_residual_groups_name_the_row():
    lp, variables, rows = build(boiler())
    sol = solve(lp)
    x = sol.x.copy()
    x[variables.select(kind="OUT_TOTAL")[0]] += 1.0
    rep = check_residuals(lp, x, rows)
    assert rep.by_tag["EQ6"] == (1.0, "EQ6, h, heat, t=0")


def test_empty_residual_report():
    lp = LinearProgram(sp.csc_matrix((0, 0)), [], [])
    rep = check_residuals(lp, np.zeros(0))
    assert rep.max_residual == 0.0 and rep.max_bound_violation == 0.0 and rep.worst() == []


def test_bound_violation_reported():
    lp = lp1([[1.0]], [1.0], [0.0], up=[2.0])
    rep = check_residuals(lp, np.array([3.0]))
    assert rep.max_bound_violation == 1.0


# -- oracle agreement -------------------------------------------------------------


@pytest.mark.parametrize("name", KERNELS)
def test_random_lps_match_oracle(name):
    rng = np.random.default_rng(20240601)
    checked = 0
    for _ in range(250):
        lp = random_lp(rng)
        ref = oracle_enumerate(lp)
        sol = solve(lp, SolverOptions(kernels=name))
        assert sol.status == ref.status, (lp.A.toarray(), lp.rhs, lp.senses)
        if ref.status == OPTIMAL:
            assert abs(sol.objective - ref.objective) <= 1e-8
            assert sol.max_residual <= 1e-6 * (1 + np.abs(lp.rhs).max(initial=0.0))
            assert sol.max_bound_violation <= 1e-9
            assert sol.min_reduced_cost >= -1e-9
            checked += 1
    assert checked >= 50


def test_oracle_agrees_on_five_hundred_instances():
    rng = np.random.default_rng(7)
    for _ in range(500):
        lp = random_lp(rng, max_n=6, max_m=6)
        ref, sol = oracle_enumerate(lp), solve(lp)
        assert ref.status == sol.status
        if ref.status == OPTIMAL:
            assert sol.objective == pytest.approx(ref.objective, abs=1e-8)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.5, 2.0, 10.0]))
def test_objective_scaling(seed, lam):
    lp = random_lp(np.random.default_rng(seed))
    a = solve(lp)
    b = solve(lp.with_objective(lam * lp.objective))
    assert a.status == b.status
    if a.status == OPTIMAL:
        assert b.objective == pytest.approx(lam * a.objective, rel=1e-9, abs=1e-9)
        assert lp.evaluate(b.x) == pytest.approx(a.objective, rel=1e-9, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_solve_is_deterministic(seed):
    lp = random_lp(np.random.default_rng(seed))
    a, b = solve(lp), solve(lp)
    assert a.status == b.status and a.iterations == b.iterations
    assert np.array_equal(a.x, b.x)
    if a.status == OPTIMAL:
        assert a.objective == b.objective


def test_optimal_point_is_feasible_and_certified(case24):
    sol = case24.solution
    lp = case24.lp
    assert sol.status == OPTIMAL
    assert sol.max_residual <= 1e-6 * (1 + np.abs(lp.rhs).max())
    assert sol.max_bound_violation <= 1e-9
    assert sol.min_reduced_cost >= -1e-9


def test_solver_never_holds_a_dense_constraint_matrix(case24):
    lp = case24.lp
    tracemalloc.start()
    try:
        solve(lp)
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    dense = lp.m * lp.n * 8
    assert peak < dense / 4, (peak, dense)
