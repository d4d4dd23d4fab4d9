import logging

import numpy as np
import pytest

from rmovecut.baselines import exact_brute_force
from rmovecut.graph import WeightedGraph, cut_value
from rmovecut.instances import (CapacityError, InstanceFormatError, SbmParams,
                                densest_reduction_layout, gen_densest_reduction,
                                gen_integrality_gap, gen_sbm, load_labeled_edgelist)
from rmovecut.lp import solve_rmove_relaxation


def test_sbm_block_structure():
    inst = gen_sbm(SbmParams(12, 3, 1.0, 0.0, "keep", 1))
    assert inst.initial_cut() == 0.0
    assert inst.terminals == (0, 4, 8)
    assert inst.initial.tolist() == [1] * 4 + [2] * 4 + [3] * 4


def test_sbm_complete_graph_cross_pairs():
    n, k = 12, 3
    inst = gen_sbm(SbmParams(n, k, 1.0, 1.0, "keep", 0))
    assert inst.graph.m == n * (n - 1) // 2
    lab = inst.initial
    cross = sum(1 for u in range(n) for v in range(u + 1, n) if lab[u] != lab[v])
    assert inst.initial_cut() == cross == (n * n - n * (n // k)) // 2


def test_sbm_seeded_and_relabel():
    p = SbmParams(30, 3, 0.3, 0.1, "uniform", 7)
    a, b = gen_sbm(p), gen_sbm(p)
    assert a == b
    assert [a.initial[s] for s in a.terminals] == [1, 2, 3]
    assert gen_sbm(SbmParams(30, 3, 0.3, 0.1, "uniform", 8)) != a


def test_sbm_params_validation():
    with pytest.raises(ValueError):
        SbmParams(10, 3, 0.3, 0.1)
    with pytest.raises(ValueError):
        SbmParams(9, 3, 0.1, 0.3)


def test_gap_instance_shape():
    inst = gen_integrality_gap(2, 0.1, 5)
    assert inst.n == 9 and inst.k == 2
    assert inst.initial_cut() == pytest.approx(0.1)
    assert inst.terminals == (0, 8)
    with pytest.raises(ValueError):
        gen_integrality_gap(0, 1.0, 3)
    with pytest.raises(ValueError):
        gen_integrality_gap(2, 1.0, 0)


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_gap_ratio(r):
    inst = gen_integrality_gap(r, 1.0, 6)
    lp = solve_rmove_relaxation(inst).objective
    ex = exact_brute_force(inst)
    assert ex.cut_value == 1.0 and ex.moved == frozenset()
    assert ex.cut_value / lp == pytest.approx(r + 1, rel=1e-4)


def triangle():
    return WeightedGraph(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)])


def test_reduction_initial_cut_and_layout():
    dsg = triangle()
    inst = gen_densest_reduction(dsg, 2)
    L = densest_reduction_layout(3)
    assert inst.n == 3 + 1 + L.b_size + 1
    assert inst.terminals == (L.t, L.s)
    assert inst.initial_cut() == 2 * dsg.m + dsg.n


def test_reduction_moves_lower_cut_by_twice_induced_edges():
    rng = np.random.default_rng(2)
    dsg = WeightedGraph(5, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 2, 1), (3, 4, 1)])
    inst = gen_densest_reduction(dsg, 3)
    c0 = inst.initial_cut()
    for _ in range(20):
        X = rng.choice(5, size=int(rng.integers(0, 4)), replace=False)
        lab = np.array(inst.initial)
        lab[X] = 2
        induced = sum(1 for u, v, _ in dsg.edges if u in X and v in X)
        assert cut_value(inst.graph, lab) == c0 - 2 * induced


def test_reduction_triangle_optimum():
    inst = gen_densest_reduction(triangle(), 2)
    ex = exact_brute_force(inst, max_work=10**6)
    assert ex.moves == 2 and set(ex.moved) <= {0, 1, 2}
    assert ex.cut_value == inst.initial_cut() - 2


def test_reduction_capacity():
    with pytest.raises(CapacityError):
        gen_densest_reduction(WeightedGraph(16), 1)


def write(path, text):
    path.write_text(text)
    return path


def test_load_two_blocks(tmp_path):
    edges = write(tmp_path / "e.txt", "10 11\n11 12\n12 20\n20 21\n21 30\n")
    members = write(tmp_path / "m.txt", "10 7\n11 7\n12 7\n20 3\n21 3\n30 9\n")
    inst = load_labeled_edgelist(edges, members, 2)
    assert inst.k == 2 and inst.n == 5
    assert inst.initial.tolist() == [1, 1, 1, 2, 2]
    assert inst.terminals == (0, 3)
    assert sorted((u, v) for u, v, _ in inst.graph.edges) == [(0, 1), (1, 2), (2, 3), (3, 4)]


def test_load_errors_and_self_loops(tmp_path, caplog):
    edges = write(tmp_path / "e.txt", "1 1\n1 2\n2 2\n")
    members = write(tmp_path / "m.txt", "1 0\n2 1\n")
    with caplog.at_level(logging.WARNING):
        inst = load_labeled_edgelist(edges, members, 2)
    assert "dropped 2 self-loop" in caplog.text
    assert inst.graph.m == 1
    with pytest.raises(InstanceFormatError):
        load_labeled_edgelist(edges, members, 3)
    bad = write(tmp_path / "e2.txt", "1 5\n")
    with pytest.raises(InstanceFormatError, match="no label"):
        load_labeled_edgelist(bad, members, 2)
