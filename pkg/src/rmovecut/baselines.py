"""Greedy heuristics and the exhaustive oracle."""
from __future__ import annotations

from itertools import combinations, product
from math import comb

import numpy as np

from .graph import CutResult, GraphError, Instance, make_result

DEFAULT_MAX_WORK = 2_000_000


class OracleCapacityError(GraphError):
    """The exhaustive search would exceed its work bound."""


def _affinity(W: np.ndarray, lab: np.ndarray, k: int) -> np.ndarray:
    """``A[v, j]`` = weight from ``v`` to nodes currently labeled ``j+1``."""
    onehot = np.zeros((len(lab), k))
    onehot[np.arange(len(lab)), lab - 1] = 1.0
    return W @ onehot


def greedy_best_move(instance: Instance) -> CutResult:
    """Repeatedly make the single move that lowers the cut the most.

    Each moved node is frozen afterwards. Stops after ``r`` moves or when no
    move strictly lowers the cut. Ties go to the lowest node, then the lowest
    partition.
    """
    W = instance.graph.dense()
    k = instance.k
    tol = instance.graph.tolerance()
    lab = np.array(instance.initial)
    movable = ~instance.terminal_mask
    for _ in range(instance.r):
        A = _affinity(W, lab, k)
        gain = A[np.arange(instance.n), lab - 1][:, None] - A
        gain[np.arange(instance.n), lab - 1] = np.inf
        gain[~movable] = np.inf
        v, j = np.unravel_index(np.argmin(gain), gain.shape)
        if not gain[v, j] < -tol:
            break
        lab[v] = j + 1
        movable[v] = False
    return make_result(instance, lab, "greedy-best")


def greedy_boundary(instance: Instance) -> CutResult:
    """Move the node with the heaviest crossing weight to its best partition.

    The node is picked first and its target second; the run stops as soon as
    the picked move would raise the cut. Moved nodes are frozen.
    """
    W = instance.graph.dense()
    k = instance.k
    lab = np.array(instance.initial)
    movable = ~instance.terminal_mask
    for _ in range(instance.r):
        A = _affinity(W, lab, k)
        same = A[np.arange(instance.n), lab - 1]
        boundary = A.sum(axis=1) - same
        boundary[~movable] = -np.inf
        if not movable.any():
            break
        v = int(np.argmax(boundary))
        row = A[v].copy()
        row[lab[v] - 1] = -np.inf
        j = int(np.argmax(row))
        if same[v] - row[j] > 0:
            break
        lab[v] = j + 1
        movable[v] = False
    return make_result(instance, lab, "greedy-boundary")


def brute_force_work(instance: Instance) -> int:
    N = instance.n - instance.k
    return sum(comb(N, i) * (instance.k - 1) ** i for i in range(min(instance.r, N) + 1))


def exact_brute_force(instance: Instance, max_work: int = DEFAULT_MAX_WORK) -> CutResult:
    """Optimal r-move labeling by trying every move set of size at most r.

    Move sets are visited by size, then lexicographically, and a candidate
    replaces the incumbent only if strictly better, so ties go to fewer moves
    and then the lexicographically first choice.
    """
    work = brute_force_work(instance)
    if work > max_work:
        raise OracleCapacityError(f"{work} labelings exceed the bound {max_work}")
    g = instance.graph
    tol = g.tolerance()
    base = np.array(instance.initial)
    k = instance.k
    best_cut = instance.initial_cut()
    best = base
    nodes = instance.non_terminals()
    for size in range(1, min(instance.r, len(nodes)) + 1):
        for subset in combinations(nodes, size):
            idx = list(subset)
            options = [[j for j in range(1, k + 1) if j != base[v]] for v in subset]
            for targets in product(*options):
                lab = base.copy()
                lab[idx] = targets
                c = float(g.ew[lab[g.eu] != lab[g.ev]].sum())
                if c < best_cut - tol:
                    best_cut, best = c, lab
    return make_result(instance, best, "exact")
