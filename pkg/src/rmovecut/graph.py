"""Weighted graphs, labelings, cut primitives and the instance file format.

Node ids are 0-based everywhere. Partition ids are 1-based (``1..k``).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np


class GraphError(ValueError):
    pass


class InvalidLabelingError(GraphError):
    pass


class TerminalMovedError(GraphError):
    pass


class TerminalContractError(GraphError):
    pass


class InstanceParseError(GraphError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class WeightedGraph:
    """Undirected graph with non-negative weights; parallel edges are merged.

    Edges are stored canonically as ``u < v`` and sorted lexicographically.
    """

    __slots__ = ("n", "eu", "ev", "ew", "_dense", "_adj")

    def __init__(self, n: int, edges: Iterable[tuple[int, int, float]] = ()):
        n = int(n)
        if n < 0:
            raise GraphError("node count must be non-negative")
        merged: dict[tuple[int, int], float] = {}
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if not np.isfinite(w) or w < 0:
                raise GraphError(f"edge ({u},{v}) has invalid weight {w}")
            key = (u, v) if u < v else (v, u)
            merged[key] = merged.get(key, 0.0) + w
        keys = sorted(merged)
        self.n = n
        self.eu = _frozen(np.array([a for a, _ in keys], dtype=np.int64))
        self.ev = _frozen(np.array([b for _, b in keys], dtype=np.int64))
        self.ew = _frozen(np.array([merged[key] for key in keys], dtype=float))
        self._dense = None
        self._adj = None

    @classmethod
    def from_dense(cls, W: np.ndarray) -> "WeightedGraph":
        W = np.asarray(W, dtype=float)
        iu, iv = np.nonzero(np.triu(W, 1))
        return cls(W.shape[0], zip(iu.tolist(), iv.tolist(), W[iu, iv].tolist()))

    @property
    def m(self) -> int:
        return len(self.ew)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.eu.tolist(), self.ev.tolist(), self.ew.tolist()))

    @property
    def total_weight(self) -> float:
        return float(self.ew.sum())

    def dense(self) -> np.ndarray:
        """Symmetric ``n x n`` weight matrix (read-only, cached)."""
        if self._dense is None:
            W = np.zeros((self.n, self.n))
            W[self.eu, self.ev] = self.ew
            W[self.ev, self.eu] = self.ew
            self._dense = _frozen(W)
        return self._dense

    def neighbors(self, v: int) -> dict[int, float]:
        if self._adj is None:
            adj: list[dict[int, float]] = [dict() for _ in range(self.n)]
            for u, w_, c in self.edges:
                adj[u][w_] = c
                adj[w_][u] = c
            self._adj = adj
        return self._adj[v]

    def weight(self, u: int, v: int) -> float:
        return self.neighbors(u).get(v, 0.0)

    def tolerance(self) -> float:
        """Absolute tolerance for comparing cut values on this graph."""
        return 1e-9 * max(1.0, self.total_weight)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.eu, other.eu)
                and np.array_equal(self.ev, other.ev)
                and np.array_equal(self.ew, other.ew))

    def __hash__(self):
        return hash((self.n, self.eu.tobytes(), self.ev.tobytes(), self.ew.tobytes()))

    def __repr__(self) -> str:
        return f"WeightedGraph(n={self.n}, m={self.m})"


def check_labeling(labeling, n: int, k: Optional[int] = None) -> np.ndarray:
    lab = np.asarray(labeling, dtype=np.int64)
    if lab.shape != (n,):
        raise InvalidLabelingError(f"labeling has shape {lab.shape}, expected ({n},)")
    if n and lab.min() < 1:
        raise InvalidLabelingError("labels must be >= 1")
    if k is not None and n and lab.max() > k:
        raise InvalidLabelingError(f"label {int(lab.max())} outside 1..{k}")
    return lab


def cut_value(graph: WeightedGraph, labeling, k: Optional[int] = None) -> float:
    """Total weight of edges whose endpoints carry different labels."""
    lab = check_labeling(labeling, graph.n, k)
    if graph.m == 0:
        return 0.0
    crossing = lab[graph.eu] != lab[graph.ev]
    return float(graph.ew[crossing].sum())


@dataclass(frozen=True, eq=False)
class Instance:
    """An r-move k-partitioning instance."""

    graph: WeightedGraph
    initial: np.ndarray
    terminals: tuple[int, ...]
    r: int

    def __post_init__(self):
        terminals = tuple(int(s) for s in self.terminals)
        object.__setattr__(self, "terminals", terminals)
        k = len(terminals)
        if k < 2:
            raise GraphError("need at least two terminals")
        if len(set(terminals)) != k:
            raise GraphError("terminals must be distinct")
        if int(self.r) < 0:
            raise GraphError("move budget r must be non-negative")
        object.__setattr__(self, "r", int(self.r))
        lab = check_labeling(self.initial, self.graph.n, k).copy()
        for i, s in enumerate(terminals, start=1):
            if not 0 <= s < self.graph.n:
                raise GraphError(f"terminal {s} out of range")
            if lab[s] != i:
                raise GraphError(f"terminal s_{i}={s} has initial label {lab[s]}")
        object.__setattr__(self, "initial", _frozen(lab))

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def k(self) -> int:
        return len(self.terminals)

    @property
    def terminal_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[list(self.terminals)] = True
        return mask

    def non_terminals(self) -> list[int]:
        ts = set(self.terminals)
        return [v for v in range(self.n) if v not in ts]

    def with_r(self, r: int) -> "Instance":
        return Instance(self.graph, self.initial, self.terminals, r)

    def initial_cut(self) -> float:
        return cut_value(self.graph, self.initial, self.k)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.graph == other.graph and self.terminals == other.terminals
                and self.r == other.r and np.array_equal(self.initial, other.initial))

    def __hash__(self):
        return hash((self.graph, self.terminals, self.r, self.initial.tobytes()))


def moved_set(instance: Instance, labeling) -> frozenset[int]:
    """Non-terminal nodes whose label differs from the initial one.

    Raises TerminalMovedError if any terminal is relabeled.
    """
    lab = check_labeling(labeling, instance.n, instance.k)
    for i, s in enumerate(instance.terminals, start=1):
        if lab[s] != i:
            raise TerminalMovedError(f"terminal s_{i}={s} relabeled to {lab[s]}")
    return frozenset(np.flatnonzero(lab != instance.initial).tolist())


@dataclass(frozen=True, eq=False)
class CutResult:
    labeling: np.ndarray
    cut_value: float
    moved: frozenset
    algorithm: str
    seed: Optional[int] = None
    info: dict = field(default_factory=dict)

    @property
    def moves(self) -> int:
        return len(self.moved)


def make_result(instance: Instance, labeling, algorithm: str,
                seed: Optional[int] = None, **info) -> CutResult:
    lab = _frozen(check_labeling(labeling, instance.n, instance.k).copy())
    moved = moved_set(instance, lab)
    return CutResult(lab, cut_value(instance.graph, lab), moved, algorithm, seed, info)


def boundary_weight(instance: Instance, v: int) -> float:
    """Weight of the edges at ``v`` that cross the initial partitioning."""
    lv = instance.initial[v]
    return float(sum(c for u, c in instance.graph.neighbors(v).items()
                     if instance.initial[u] != lv))


def boundary_weights(instance: Instance) -> np.ndarray:
    g = instance.graph
    out = np.zeros(g.n)
    crossing = instance.initial[g.eu] != instance.initial[g.ev]
    np.add.at(out, g.eu[crossing], g.ew[crossing])
    np.add.at(out, g.ev[crossing], g.ew[crossing])
    return out


def contract_into_terminal(instance: Instance, v: int, j: int) -> tuple[Instance, np.ndarray]:
    """Merge non-terminal ``v`` into terminal ``s_j``.

    Returns the contracted instance and ``node_map`` with ``node_map[x]`` the
    id of original node ``x`` in the new instance (``v`` maps to ``s_j``), so a
    labeling ``L`` of the new instance lifts back as ``L[node_map]``.
    """
    if v in instance.terminals:
        raise TerminalContractError(f"node {v} is a terminal")
    if not 1 <= j <= instance.k:
        raise GraphError(f"partition {j} outside 1..{instance.k}")
    n = instance.n
    sj = instance.terminals[j - 1]
    node_map = np.empty(n, dtype=np.int64)
    keep = [x for x in range(n) if x != v]
    node_map[keep] = np.arange(n - 1)
    node_map[v] = node_map[sj]
    edges = []
    for a, b, c in instance.graph.edges:
        a2, b2 = node_map[a], node_map[b]
        if a2 != b2:
            edges.append((a2, b2, c))
    graph = WeightedGraph(n - 1, edges)
    initial = instance.initial[keep]
    terminals = tuple(int(node_map[s]) for s in instance.terminals)
    return Instance(graph, initial, terminals, instance.r), _frozen(node_map)


# -- instance files ---------------------------------------------------------

def format_instance(instance: Instance) -> str:
    lines = [f"{instance.n} {instance.graph.m} {instance.k} {instance.r}",
             " ".join(map(str, instance.terminals)),
             " ".join(map(str, instance.initial.tolist()))]
    lines += [f"{u} {v} {w!r}" for u, v, w in instance.graph.edges]
    return "\n".join(lines) + "\n"


def save_instance(instance: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_instance(instance))


def parse_instance(text: str, path="<string>") -> Instance:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            rows.append((lineno, line.split()))

    def fail(lineno, msg):
        raise InstanceParseError(path, lineno, msg)

    if not rows:
        fail(1, "empty instance file")
    lineno, head = rows[0]
    if len(head) != 4:
        fail(lineno, "header must be 'n m k r'")
    try:
        n, m, k, r = (int(x) for x in head)
    except ValueError:
        fail(lineno, "header fields must be integers")
    if n < 0 or m < 0 or k < 2 or r < 0:
        fail(lineno, "header values out of range")
    if len(rows) != 3 + m:
        fail(rows[-1][0], f"expected {3 + m} data lines, found {len(rows)}")

    def ints(lineno, toks, count, what):
        if len(toks) != count:
            fail(lineno, f"expected {count} {what}, found {len(toks)}")
        try:
            return [int(t) for t in toks]
        except ValueError:
            fail(lineno, f"non-integer {what}")

    t_line, toks = rows[1]
    terminals = ints(t_line, toks, k, "terminal ids")
    for s in terminals:
        if not 0 <= s < n:
            fail(t_line, f"terminal {s} out of range")
    if len(set(terminals)) != k:
        fail(t_line, "terminals must be distinct")
    l_line, toks = rows[2]
    labels = ints(l_line, toks, n, "labels")
    for x in labels:
        if not 1 <= x <= k:
            fail(l_line, f"label {x} outside 1..{k}")
    for i, s in enumerate(terminals, start=1):
        if labels[s] != i:
            fail(l_line, f"terminal s_{i}={s} must have label {i}, has {labels[s]}")
    edges = []
    for lineno, toks in rows[3:]:
        if len(toks) != 3:
            fail(lineno, "edge line must be 'u v w'")
        try:
            u, v, w = int(toks[0]), int(toks[1]), float(toks[2])
        except ValueError:
            fail(lineno, "malformed edge")
        if not (0 <= u < n and 0 <= v < n):
            fail(lineno, f"edge endpoint out of range")
        if u == v:
            fail(lineno, "self-loop")
        if not np.isfinite(w) or w < 0:
            fail(lineno, f"invalid weight {toks[2]}")
        edges.append((u, v, w))
    return Instance(WeightedGraph(n, edges), np.array(labels), tuple(terminals), r)


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read(), os.fspath(path))
