"""Two-partition tools: exact min s-t cut, the G^alpha family, breakpoints.

For k=2 the source is ``s_1`` and the sink ``s_2``. ``G^alpha`` adds weight
``alpha`` between every non-terminal and its initial side's terminal, so a
min cut of ``G^alpha`` trades moves against cut weight at price ``alpha``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .graph import CutResult, GraphError, Instance, WeightedGraph, cut_value, make_result


class PartitionCountError(GraphError):
    """An algorithm that needs exactly two partitions got another k."""


def _require_two(instance: Instance) -> None:
    if instance.k != 2:
        raise PartitionCountError(f"need k=2, got k={instance.k}")


def min_st_cut(graph: WeightedGraph, s: int, t: int) -> tuple[float, frozenset]:
    """Minimum s-t cut by Dinic's algorithm.

    Returns the cut value and the minimal source side (nodes reachable from
    ``s`` in the final residual network).
    """
    if s == t:
        raise GraphError("source and sink coincide")
    n = graph.n
    for x in (s, t):
        if not 0 <= x < n:
            raise GraphError(f"node {x} out of range")
    # arc 2e is u->v, arc 2e+1 is v->u; both carry capacity w
    to = []
    cap = []
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v, w in graph.edges:
        adj[u].append(len(to)); to.append(v); cap.append(w)
        adj[v].append(len(to)); to.append(u); cap.append(w)
    eps = 1e-13 * max(1.0, graph.total_weight)

    def levels():
        level = [-1] * n
        level[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for a in adj[v]:
                w = to[a]
                if level[w] < 0 and cap[a] > eps:
                    level[w] = level[v] + 1
                    queue.append(w)
        return level

    while True:
        level = levels()
        if level[t] < 0:
            break
        it = [0] * n
        path: list[int] = []
        v = s
        while True:
            if v == t:
                f = min(cap[a] for a in path)
                for a in path:
                    cap[a] -= f
                    cap[a ^ 1] += f
                path.clear()
                v = s
                continue
            arcs = adj[v]
            while it[v] < len(arcs):
                a = arcs[it[v]]
                if cap[a] > eps and level[to[a]] == level[v] + 1:
                    break
                it[v] += 1
            if it[v] < len(arcs):
                a = arcs[it[v]]
                path.append(a)
                v = to[a]
                continue
            if v == s:
                break
            level[v] = -1
            a = path.pop()
            v = to[a ^ 1]
            it[v] += 1
    side = levels()
    source = frozenset(v for v in range(n) if side[v] >= 0)
    mask = np.zeros(n, dtype=bool)
    mask[list(source)] = True
    value = float(graph.ew[mask[graph.eu] != mask[graph.ev]].sum()) if graph.m else 0.0
    return value, source


def build_alpha_graph(instance: Instance, alpha: float) -> WeightedGraph:
    """``G`` plus weight ``alpha`` tying each non-terminal to its initial terminal."""
    _require_two(instance)
    if alpha < 0:
        raise GraphError("alpha must be non-negative")
    s, t = instance.terminals
    edges = list(instance.graph.edges)
    if alpha > 0:
        for v in instance.non_terminals():
            edges.append((s, v, alpha) if instance.initial[v] == 1 else (v, t, alpha))
    return WeightedGraph(instance.n, edges)


def labeling_of_side(instance: Instance, source_side) -> np.ndarray:
    lab = np.full(instance.n, 2, dtype=np.int64)
    lab[list(source_side)] = 1
    return lab


def moved_of_cut(instance: Instance, source_side) -> frozenset:
    """Non-terminals whose side of the cut differs from their initial label."""
    lab = labeling_of_side(instance, source_side)
    return frozenset(int(v) for v in np.flatnonzero(lab != instance.initial))


def labeling_moving(instance: Instance, moved) -> np.ndarray:
    lab = np.array(instance.initial)
    idx = list(moved)
    lab[idx] = 3 - lab[idx]
    return lab


def delta(instance: Instance, moved) -> float:
    """Cut value of the labeling that moves exactly ``moved``."""
    return cut_value(instance.graph, labeling_moving(instance, moved))


def alpha_cut(instance: Instance, alpha: float) -> tuple[float, frozenset]:
    """Min cut value of ``G^alpha`` and the moved set of its minimal source side."""
    s, t = instance.terminals
    value, side = min_st_cut(build_alpha_graph(instance, alpha), s, t)
    return value, moved_of_cut(instance, side)


@dataclass(frozen=True)
class Breakpoint:
    r: int
    moved: frozenset
    delta: float
    witness_alpha: float


@dataclass
class BreakpointList:
    points: list[Breakpoint]
    mincut_calls: int = 0
    c_inf: float = 0.0

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    @property
    def sizes(self) -> list[int]:
        return [p.r for p in self.points]


def find_breakpoints(instance: Instance) -> BreakpointList:
    """Every moved-set size realised by a min cut of ``G^alpha``, alpha >= 0.

    Returned in decreasing size ``r_0 > r_1 > ... > 0`` with increasing cut.
    An interval ``(S, S')`` with ``|S| < |S'|`` is refined at the alpha where
    both sets cost the same in ``G^alpha``; if the min cut there is no cheaper
    the pair is final, otherwise the new set splits it.
    """
    _require_two(instance)
    c_inf = instance.graph.total_weight
    _, s0 = alpha_cut(instance, 0.0)
    calls = 1
    empty = Breakpoint(0, frozenset(), instance.initial_cut(), 2 * c_inf)
    if not s0:
        return BreakpointList([empty], calls, c_inf)
    found = {0: empty, len(s0): Breakpoint(len(s0), s0, delta(instance, s0), 0.0)}
    active = [(0, len(s0))]
    while active:
        lo, hi = active.pop()
        a, b = found[lo], found[hi]
        alpha = (a.delta - b.delta) / (b.r - a.r)
        value, mid = alpha_cut(instance, alpha)
        calls += 1
        line = a.r * alpha + a.delta
        if value >= line - 1e-9 * (1 + abs(value)):
            continue
        if not lo < len(mid) < hi:
            # numerically the new set lands on an endpoint: nothing left to split
            continue
        found[len(mid)] = Breakpoint(len(mid), mid, delta(instance, mid), alpha)
        active += [(len(mid), hi), (lo, len(mid))]
    # at alpha=0 the canonical cut may include free moves (e.g. isolated nodes);
    # a set with the same cut but more moves than a smaller one is dropped
    points = []
    for r in sorted(found):
        p = found[r]
        if not points or p.delta < points[-1].delta - 1e-9 * (1 + abs(p.delta)):
            points.append(p)
    return BreakpointList(points[::-1], calls, c_inf)


def two_part_solve(instance: Instance, breakpoints: BreakpointList | None = None) -> CutResult:
    """Largest breakpoint set that fits the move budget."""
    _require_two(instance)
    bps = find_breakpoints(instance) if breakpoints is None else breakpoints
    chosen = next(p for p in bps.points if p.r <= instance.r)
    return make_result(instance, labeling_moving(instance, chosen.moved), "two-part",
                       breakpoint_r=chosen.r, breakpoints=bps.sizes,
                       mincut_calls=bps.mincut_calls)
