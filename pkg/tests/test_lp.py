import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rmovecut.baselines import exact_brute_force
from rmovecut.graph import Instance, WeightedGraph
from rmovecut.instances import gen_integrality_gap, random_instance
from rmovecut.lp import (EQ, GE, LE, FractionalAssignment, LpExtractionError, LpProblem,
                         LpSolution, build_ckr_lp, build_lagrangian_lp, build_rmove2_lp,
                         build_rmove_lp, distance, extract_assignment, lp_cost, solve_lp,
                         solve_rmove_relaxation)

from suites import brute_min_st_cut, small_suite, t1


def solve_both(problem):
    a = solve_lp(problem, "simplex")
    b = solve_lp(problem, "highs")
    assert a.status == b.status
    if a.status == "optimal":
        assert a.objective == pytest.approx(b.objective, rel=1e-7, abs=1e-7)
    return a


def assert_valid_optimum(problem, sol):
    assert sol.status == "optimal"
    assert problem.max_violation(sol.values) <= 1e-7
    assert sol.objective == pytest.approx(problem.evaluate(sol.values), rel=1e-9, abs=1e-12)


def test_simplex_examples():
    p = LpProblem()
    x = p.add_var("x", cost=1.0)
    p.add_constraint({x: 1.0}, GE, 1.0)
    sol = solve_both(p)
    assert sol.values[x] == pytest.approx(1.0) and sol.objective == pytest.approx(1.0)

    p.add_constraint({x: 1.0}, LE, 0.0)
    assert solve_both(p).status == "infeasible"

    q = LpProblem()
    x, y = q.add_var(cost=1.0), q.add_var(cost=1.0)
    q.add_constraint({x: 1.0, y: 1.0}, GE, 2.0)
    assert solve_both(q).objective == pytest.approx(2.0)


def test_unbounded_and_free_variables():
    p = LpProblem()
    x = p.add_var(cost=-1.0)
    p.add_constraint({x: 1.0}, GE, 0.0)
    assert solve_both(p).status == "unbounded"
    q = LpProblem()
    z = q.add_var(cost=1.0, lb=-math.inf)
    q.add_constraint({z: 1.0}, GE, -3.5)
    sol = solve_both(q)
    assert sol.values[z] == pytest.approx(-3.5)
    r = LpProblem()
    w = r.add_var(cost=-1.0, lb=1.0, ub=4.0)
    assert solve_both(r).values[w] == pytest.approx(4.0)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 5), st.integers(1, 6), st.data())
def test_simplex_agrees_with_highs(nv, nc, data):
    coef = st.integers(-3, 3)
    p = LpProblem()
    for _ in range(nv):
        p.add_var(cost=data.draw(coef))
    for _ in range(nc):
        row = {j: data.draw(coef) for j in range(nv)}
        p.add_constraint(row, data.draw(st.sampled_from([LE, EQ, GE])), data.draw(coef))
    sol = solve_both(p)
    if sol.status == "optimal":
        assert_valid_optimum(p, sol)


def test_simplex_is_deterministic():
    p = build_rmove_lp(t1())
    a, b = solve_lp(p, "simplex"), solve_lp(p, "simplex")
    assert np.array_equal(a.values, b.values) and a.iterations == b.iterations


def test_rmove_lp_layout():
    inst = t1()
    p = build_rmove_lp(inst)
    n, m, k = inst.n, inst.graph.m, inst.k
    assert p.num_vars == n * k + m * k + m
    names = [c[3] for c in p.constraints]
    assert names.count("C7") == 1
    assert sum(x.startswith("C2") for x in names) == m * k
    assert sum(x.startswith("C5") for x in names) == k * k


def test_gap_instance_lp_value():
    inst = gen_integrality_gap(2, 0.1, 5)
    sol = solve_both(build_rmove_lp(inst))
    assert sol.objective == pytest.approx(0.1 / 3, abs=1e-6)


@pytest.mark.parametrize("inst", small_suite(12, seed=3), ids=lambda i: f"n{i.n}k{i.k}r{i.r}")
def test_relaxation_orderings(inst):
    rm = solve_both(build_rmove_lp(inst))
    assert_valid_optimum(build_rmove_lp(inst), rm)
    ckr = solve_both(build_ckr_lp(inst))
    assert ckr.objective <= rm.objective + 1e-7
    slack = solve_both(build_rmove_lp(inst.with_r(inst.n)))
    assert slack.objective == pytest.approx(ckr.objective, abs=1e-7)
    assert rm.objective <= inst.initial_cut() + 1e-7
    assert rm.objective <= exact_brute_force(inst).cut_value + 1e-7


def test_ckr_examples():
    path = Instance(WeightedGraph(3, [(0, 1, 1.0), (1, 2, 1.0)]), [1, 1, 2], (0, 2), 0)
    assert solve_both(build_ckr_lp(path)).objective == pytest.approx(1.0)
    edge = Instance(WeightedGraph(2, [(0, 1, 2.5)]), [1, 2], (0, 1), 0)
    assert solve_both(build_ckr_lp(edge)).objective == pytest.approx(2.5)


@pytest.mark.parametrize("inst", [t1()] + small_suite(10, seed=5, k_choices=(2,), r_max=4),
                         ids=lambda i: f"n{i.n}r{i.r}")
def test_two_partition_lps(inst):
    full = solve_both(build_rmove_lp(inst)).objective
    scalar = solve_both(build_rmove2_lp(inst)).objective
    assert scalar == pytest.approx(full, abs=1e-6)
    assert scalar <= inst.initial_cut() + 1e-7
    s, t = inst.terminals
    mincut = brute_min_st_cut(inst.graph, s, t)
    assert solve_both(build_rmove2_lp(inst.with_r(inst.n))).objective == pytest.approx(mincut)
    assert solve_both(build_lagrangian_lp(inst, 0.0)).objective == pytest.approx(mincut)


def test_lagrangian_large_alpha_moves_nothing():
    inst = t1()
    alpha = 2 * inst.graph.total_weight
    p = build_lagrangian_lp(inst, alpha)
    sol = solve_both(p)
    x = sol.values[: inst.n]
    mass = sum(1 - x[v] if inst.initial[v] == 1 else x[v] for v in range(inst.n))
    assert mass == pytest.approx(0.0, abs=1e-9)
    assert sol.objective == pytest.approx(inst.initial_cut())


def test_extract_assignment_examples():
    inst = t1().with_r(0)
    rel = solve_rmove_relaxation(inst)
    X = rel.assignment
    assert X.is_integral()
    assert np.array_equal(X.to_labeling(), inst.initial)
    assert X.values[0].tolist() == [1.0, 0.0] and X.values[3].tolist() == [0.0, 1.0]

    n, k = inst.n, inst.k
    vals = np.zeros(build_rmove_lp(inst).num_vars)
    X0 = np.array([[1, 0], [0.5 + 5e-8, 0.5], [0.25, 0.75], [0, 1]])
    vals[: n * k] = X0.ravel()
    out = extract_assignment(inst.with_r(1), LpSolution("optimal", vals, 0.0, "test", 0))
    assert out.values.sum(axis=1) == pytest.approx(np.ones(n), abs=1e-15)

    vals[2] = 0.7
    with pytest.raises(LpExtractionError):
        extract_assignment(inst, LpSolution("optimal", vals, 0.0, "test", 0))
    with pytest.raises(LpExtractionError):
        extract_assignment(inst, LpSolution("infeasible", vals, 0.0, "test", 0))


def test_distance_examples():
    X = np.array([[0.5, 0.5], [1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
    assert distance(X, 0, 3) == 0.0
    assert distance(X, 1, 2) == 1.0
    assert distance(X, 0, 1) == 0.5


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_assignment_lemmas_on_solved_lps(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 4))
    inst = random_instance(rng, int(rng.integers(k + 1, 9)), k, int(rng.integers(0, 4)))
    rel = solve_rmove_relaxation(inst)
    M = rel.assignment.values
    assert rel.assignment.violations(inst) == []
    assert lp_cost(inst.graph, M) == pytest.approx(rel.objective, abs=1e-7)
    own = M[np.arange(inst.n), inst.initial - 1]
    for lam in (0.0, 0.25, 0.5, 0.75, 0.9):
        # fewer than r/(1-lam) nodes keep less than lam of their own partition
        assert np.count_nonzero(own < lam - 1e-9) < inst.r / (1 - lam) + 1e-6 or inst.r == 0
        if inst.r == 0:
            assert np.count_nonzero(own < lam - 1e-6) == 0
    for u, v, _ in inst.graph.edges:
        assert distance(M, u, v) >= np.abs(M[u] - M[v]).max() - 1e-12
    a, b, c = rng.integers(0, inst.n, size=3)
    assert distance(M, a, c) <= distance(M, a, b) + distance(M, b, c) + 1e-12


def test_fractional_assignment_violations():
    inst = t1()
    bad = FractionalAssignment([[1, 0], [0.3, 0.3], [0, 1], [0, 1]])
    assert any("C4" in x for x in bad.violations(inst))
    moved = FractionalAssignment([[1, 0], [0, 1], [1, 0], [0, 1]])
    assert any("C7" in x for x in moved.violations(inst))
    term = FractionalAssignment([[0.5, 0.5], [1, 0], [0, 1], [0, 1]])
    assert any("C5" in x for x in term.violations(inst))


def test_dump_has_one_line_per_constraint():
    p = build_rmove_lp(t1())
    lines = p.dump().splitlines()
    assert lines[0] == f"VARS {p.num_vars}"
    assert sum(1 for x in lines if x.startswith("R")) == len(p.constraints)
