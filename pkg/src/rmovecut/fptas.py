"""(1+eps)-approximation by branching on nodes with heavy crossing weight.

A node whose crossing weight is below ``((alpha-1)/(r alpha)) c(C0)`` cannot
matter much; the heavy ones (at most ``2 r alpha/(alpha-1)`` of them) are each
tried in every other partition by contracting them into that terminal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CutResult, GraphError, Instance, boundary_weights, make_result


@dataclass(frozen=True)
class FptasParams:
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise GraphError("epsilon must be positive")

    @property
    def alpha(self) -> float:
        return 1.0 + self.epsilon


def candidate_threshold(alpha: float, r: int, c0: float) -> float:
    return (alpha - 1) / (r * alpha) * c0


def candidate_set(instance: Instance, alpha: float) -> list[int]:
    """Non-terminals whose initial crossing weight reaches the threshold."""
    if instance.r == 0:
        return []
    thr = candidate_threshold(alpha, instance.r, instance.initial_cut())
    bw = boundary_weights(instance)
    tol = instance.graph.tolerance()
    return [v for v in instance.non_terminals() if bw[v] >= thr - tol]


class _State:
    """Contracted instance kept as a dense weight matrix over original ids.

    Contracting ``v`` into ``s_j`` folds row and column ``v`` into ``s_j`` and
    records ``v``'s label as ``j``; ``v`` then has no edges and never reappears.
    """

    def __init__(self, W: np.ndarray, labels: np.ndarray, alive: np.ndarray,
                 terminals: tuple[int, ...]):
        self.W = W
        self.labels = labels
        self.alive = alive
        self.terminals = terminals

    def cut(self) -> float:
        cross = self.labels[:, None] != self.labels[None, :]
        return 0.5 * float(self.W[cross].sum())

    def boundary(self) -> np.ndarray:
        cross = self.labels[:, None] != self.labels[None, :]
        return (self.W * cross).sum(axis=1)

    def contract(self, v: int, j: int) -> "_State":
        W = self.W.copy()
        sj = self.terminals[j - 1]
        W[sj] += W[v]
        W[:, sj] += W[:, v]
        W[sj, sj] = 0.0
        W[v] = 0.0
        W[:, v] = 0.0
        labels = self.labels.copy()
        labels[v] = j
        alive = self.alive.copy()
        alive[v] = False
        return _State(W, labels, alive, self.terminals)


def fptas_solve(instance: Instance, epsilon: float) -> CutResult:
    """Search move sequences over heavy nodes to depth r; keep the best labeling.

    Ties keep the earliest candidate in (node, partition) order, with the
    unmoved labeling first.
    """
    alpha = FptasParams(epsilon).alpha
    tol = instance.graph.tolerance()
    alive = ~instance.terminal_mask
    root = _State(instance.graph.dense().copy(), np.array(instance.initial), alive,
                  instance.terminals)
    stats = {"nodes": 0}

    def solve(state: _State, r: int) -> tuple[float, np.ndarray]:
        stats["nodes"] += 1
        c0 = state.cut()
        best = (c0, state.labels)
        if r == 0 or c0 <= tol:
            return best
        thr = candidate_threshold(alpha, r, c0)
        bw = state.boundary()
        for v in np.flatnonzero(state.alive & (bw >= thr - tol)):
            for j in range(1, instance.k + 1):
                if j == state.labels[v]:
                    continue
                cand = solve(state.contract(int(v), j), r - 1)
                if cand[0] < best[0] - tol:
                    best = cand
        return best

    _, lab = solve(root, instance.r)
    return make_result(instance, lab, "fptas", epsilon=epsilon, search_nodes=stats["nodes"])
