import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rmovecut.bicriteria import (BicriteriaParamError, SubdivisionRequiredError,
                                 bicriteria_round, ckr_round, cut_factor, differing_entries,
                                 move_bound, sigma_order, subdivide)
from rmovecut.graph import WeightedGraph, cut_value
from rmovecut.instances import random_instance
from rmovecut.lp import FractionalAssignment, distance, lp_cost, solve_rmove_relaxation

from suites import small_suite, t1


def test_subdivide_worked_example():
    X = np.array([[0.5, 0.3, 0.2], [0.2, 0.5, 0.3]])
    sub = subdivide(WeightedGraph(2, [(0, 1, 2.0)]), X)
    assert sub.original_count == 2 and sub.added == 1
    assert sub.X.values[2] == pytest.approx([0.4, 0.3, 0.3])
    assert sorted((u, v) for u, v, _ in sub.graph.edges) == [(0, 2), (1, 2)]
    assert all(w == 2.0 for _, _, w in sub.graph.edges)
    M = sub.X.values
    assert distance(M, 0, 2) + distance(M, 2, 1) == pytest.approx(distance(X, 0, 1))
    assert distance(X, 0, 1) == pytest.approx(0.3)


def test_subdivide_leaves_short_edges():
    X = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 1.0, 0]])
    g = WeightedGraph(3, [(0, 1, 1.0), (1, 2, 1.0)])
    sub = subdivide(g, X)
    assert sub.graph == g and sub.added == 0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.integers(3, 5))
def test_subdivision_preserves_objective(seed, k):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    X = rng.dirichlet(np.ones(k) * 0.7, size=n)
    X[rng.random((n, k)) < 0.2] = 0.0
    X[X.sum(axis=1) == 0, 0] = 1.0
    X /= X.sum(axis=1, keepdims=True)
    g = random_instance(rng, n, 2, 0).graph
    sub = subdivide(g, X)
    assert lp_cost(sub.graph, sub.X) == pytest.approx(lp_cost(g, X), abs=1e-7)
    M = sub.X.values
    assert np.allclose(M[:n], X)
    for u, v, _ in sub.graph.edges:
        assert differing_entries(M[u], M[v]) <= 2
    assert np.allclose(M.sum(axis=1), 1.0)


def test_ckr_examples():
    X = np.array([[0.6, 0.2, 0.2], [0.2, 0.6, 0.2], [0.2, 0.2, 0.6]])
    g = WeightedGraph(3)
    assert ckr_round(g, X, 0.9, (1, 2, 3)).tolist() == [3, 3, 3]
    E = np.eye(3)
    for rho in (0.1, 0.5, 0.99):
        assert ckr_round(g, E, rho, (2, 1, 3)).tolist() == [1, 2, 3]
    # node 0 lies in both B(0.1, 1) and B(0.1, 2): the sweep order decides
    Y = np.array([[0.5, 0.5, 0.0]])
    assert ckr_round(WeightedGraph(1), Y, 0.1, (1, 2, 3)).tolist() == [1]
    assert ckr_round(WeightedGraph(1), Y, 0.1, (2, 1, 3)).tolist() == [2]


def test_ckr_requires_subdivision():
    X = np.array([[0.5, 0.3, 0.2], [0.2, 0.5, 0.3]])
    with pytest.raises(SubdivisionRequiredError):
        ckr_round(WeightedGraph(2, [(0, 1, 1.0)]), X, 0.3, (1, 2, 3))


def test_ckr_edge_cut_iff_rho_in_intervals():
    # endpoints differ in entries i=1, j=2; L_1 = (0.3, 0.6), L_2 = (0.2, 0.5)
    X = np.array([[0.6, 0.2, 0.2], [0.3, 0.5, 0.2]])
    g = WeightedGraph(2, [(0, 1, 1.0)])
    for rho in np.arange(0.005, 1.0, 0.01):
        lab = ckr_round(g, X, rho, (2, 1, 3))
        cut = lab[0] != lab[1]
        assert cut == bool(0.3 < rho < 0.6 or 0.2 < rho < 0.5)


def test_ckr_per_edge_probability():
    rng = np.random.default_rng(0)
    X = np.array([[0.6, 0.1, 0.3], [0.35, 0.35, 0.3]])
    g = WeightedGraph(2, [(0, 1, 1.0)])
    trials = 4000
    cuts = 0
    for _ in range(trials):
        lab = ckr_round(g, X, rng.uniform(0, 1), sigma_order(3, bool(rng.random() < 0.5)))
        cuts += lab[0] != lab[1]
    assert cuts / trials <= 1.5 * distance(X, 0, 1) * 1.1


def test_params_and_formulas():
    assert move_bound(3, 0.75) == 12
    assert cut_factor(0.75) == pytest.approx(10)
    rel = solve_rmove_relaxation(t1())
    for gamma in (0.5, 1.0, 0.2):
        with pytest.raises(BicriteriaParamError):
            bicriteria_round(t1(), rel.assignment, gamma, 0)


def test_integral_input_is_reproduced():
    inst = t1()
    lab = np.array([1, 2, 2, 2])
    X = FractionalAssignment.from_labeling(lab, 2)
    for seed in range(20):
        res = bicriteria_round(inst, X, 0.75, seed)
        assert res.labeling.tolist() == lab.tolist() and res.moved == {1}


@pytest.mark.parametrize("gamma", [0.6, 0.75, 0.9])
def test_move_bound_and_pinning(gamma):
    for inst in small_suite(15, seed=23, r_min=1, k_choices=(2, 3, 4)):
        rel = solve_rmove_relaxation(inst)
        sub = subdivide(inst.graph, rel.assignment)
        for seed in range(20):
            res = bicriteria_round(inst, rel.assignment, gamma, seed, subdivided=sub)
            assert res.moves <= move_bound(inst.r, gamma)
            lam = res.info["lam"]
            assert (gamma + 1) / 3 <= lam <= gamma and 0 <= res.info["rho"] <= lam
            assert np.all((sub.X.values >= lam).sum(axis=1) <= 1)
            assert res.cut_value == pytest.approx(cut_value(inst.graph, res.labeling))
