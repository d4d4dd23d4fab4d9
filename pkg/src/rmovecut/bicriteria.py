"""Edge subdivision and the threshold-then-sweep bicriteria rounding.

The rounding pins every node with an LP entry of at least ``lambda`` and
assigns the rest by a permutation sweep over the sets
``B(rho, i) = {v : X_v^i > rho}``. The sweep's per-edge analysis needs the
two endpoint rows to differ in at most two entries, which ``subdivide``
arranges by inserting interpolated nodes.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import floor
from typing import Optional, Sequence

import numpy as np

from .graph import CutResult, GraphError, Instance, WeightedGraph, make_result
from .lp import FractionalAssignment

DIFF_TOL = 1e-12


class SubdivisionRequiredError(GraphError):
    """An edge's endpoint rows differ in more than two entries."""


class BicriteriaParamError(GraphError):
    pass


@dataclass(frozen=True)
class SubdividedInstance:
    graph: WeightedGraph
    X: FractionalAssignment
    original_count: int

    @property
    def added(self) -> int:
        return self.graph.n - self.original_count


def _rows(X) -> np.ndarray:
    return X.values if isinstance(X, FractionalAssignment) else np.asarray(X, dtype=float)


def differing_entries(a: np.ndarray, b: np.ndarray) -> int:
    return int(np.count_nonzero(np.abs(a - b) > DIFF_TOL))


def subdivide(graph: WeightedGraph, X) -> SubdividedInstance:
    """Split edges until every edge's endpoint rows differ in at most two entries.

    For an edge whose rows differ in more places, take the smallest nonzero
    gap (lowest index ``i``), orient the edge so ``X_u^i < X_v^i``, and insert
    ``w`` equal to ``X_u`` except ``X_w^i = X_v^i`` and ``X_w^j = X_u^j - gap``
    for the lowest ``j`` with ``X_u^j - X_v^j >= gap``. Both halves keep the
    edge weight; then continue on ``(w, v)``.
    """
    M = _rows(X)
    rows = [row for row in M]
    edges = []
    for u0, v0, c in graph.edges:
        u, v = u0, v0
        while True:
            diff = rows[u] - rows[v]
            nz = np.abs(diff) > DIFF_TOL
            if np.count_nonzero(nz) <= 2:
                edges.append((u, v, c))
                break
            gaps = np.where(nz, np.abs(diff), np.inf)
            i = int(np.argmin(gaps))
            if rows[u][i] > rows[v][i]:
                u, v = v, u
                diff = -diff
            gap = rows[v][i] - rows[u][i]
            js = np.flatnonzero(diff >= gap - DIFF_TOL)
            js = js[js != i]
            if js.size == 0:
                raise GraphError(f"no partner coordinate when splitting edge ({u0}, {v0})")
            j = int(js[0])
            w_row = rows[u].copy()
            w_row[i] = rows[v][i]
            w_row[j] = rows[u][j] - gap
            rows.append(w_row)
            w = len(rows) - 1
            edges.append((u, w, c))
            u = w
    return SubdividedInstance(WeightedGraph(len(rows), edges),
                              FractionalAssignment(np.array(rows).reshape(len(rows), M.shape[1])),
                              graph.n)


def sigma_order(k: int, forward: bool) -> tuple[int, ...]:
    head = list(range(1, k)) if forward else list(range(k - 1, 0, -1))
    return tuple(head + [k])


def ckr_round(graph: WeightedGraph, X, rho: float, sigma: Sequence[int],
              pinned: Optional[np.ndarray] = None) -> np.ndarray:
    """Permutation sweep: nodes in ``B(rho, sigma(1))`` first, then the next set.

    ``pinned`` (label per node, 0 for free) fixes nodes beforehand. Free nodes
    left after ``sigma(k-1)`` go to partition ``k``.
    """
    M = _rows(X)
    n, k = M.shape
    if graph.m:
        counts = np.count_nonzero(np.abs(M[graph.eu] - M[graph.ev]) > DIFF_TOL, axis=1)
        if np.any(counts > 2):
            e = int(np.argmax(counts > 2))
            raise SubdivisionRequiredError(
                f"edge ({graph.eu[e]}, {graph.ev[e]}) differs in {counts[e]} entries")
    if sorted(sigma) != list(range(1, k + 1)) or sigma[-1] != k:
        raise BicriteriaParamError(f"bad permutation {tuple(sigma)}")
    lab = np.zeros(n, dtype=np.int64) if pinned is None else np.array(pinned, dtype=np.int64)
    for j in sigma[:-1]:
        take = (lab == 0) & (M[:, j - 1] > rho)
        lab[take] = j
    lab[lab == 0] = k
    return lab


def move_bound(r: int, gamma: float) -> int:
    return floor(r / (1 - gamma) + 1e-9)


def cut_factor(gamma: float) -> float:
    return 5.0 / (2 * gamma - 1)


def bicriteria_round(instance: Instance, X, gamma: float, seed: int,
                     subdivided: Optional[SubdividedInstance] = None) -> CutResult:
    """Pin nodes with an entry of at least lambda, sweep the rest.

    Draws, in order from ``default_rng(seed)``: ``lambda`` uniform on
    ``[(gamma+1)/3, gamma]``, ``rho`` uniform on ``[0, lambda]``, and a fair
    coin choosing the forward or reversed sweep order.
    """
    if not 0.5 < gamma < 1:
        raise BicriteriaParamError(f"gamma={gamma} outside (1/2, 1)")
    fa = X if isinstance(X, FractionalAssignment) else FractionalAssignment(X)
    fa.check(instance)
    rng = np.random.default_rng(seed)
    lam = float(rng.uniform((gamma + 1) / 3, gamma))
    rho = float(rng.uniform(0.0, lam))
    forward = bool(rng.random() < 0.5)
    sub = subdivided or subdivide(instance.graph, fa)
    M = sub.X.values
    top = M.argmax(axis=1)
    pinned = np.where(M[np.arange(len(M)), top] >= lam, top + 1, 0)
    lab = ckr_round(sub.graph, sub.X, rho, sigma_order(instance.k, forward), pinned)
    return make_result(instance, lab[: instance.n], "bicriteria", seed,
                       gamma=gamma, lam=lam, rho=rho, forward=forward,
                       move_bound=move_bound(instance.r, gamma), factor=cut_factor(gamma))
