"""Instance generators and a labeled edge-list loader."""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from .graph import GraphError, Instance, WeightedGraph

log = logging.getLogger(__name__)


class InstanceFormatError(GraphError):
    pass


class CapacityError(GraphError):
    pass


@dataclass(frozen=True)
class SbmParams:
    n: int
    k: int
    p_in: float
    p_out: float
    relabel: str = "keep"
    seed: int = 0
    r: int = 0

    def __post_init__(self):
        if self.k < 2 or self.n < self.k or self.n % self.k:
            raise ValueError(f"k={self.k} must be >= 2 and divide n={self.n}")
        if not 0 <= self.p_out <= self.p_in <= 1:
            raise ValueError("need 0 <= p_out <= p_in <= 1")
        if self.relabel not in ("keep", "uniform"):
            raise ValueError("relabel must be 'keep' or 'uniform'")


def gen_sbm(params: SbmParams) -> Instance:
    """Stochastic block model with equal blocks and unit weights.

    Block ``b`` holds nodes ``b*n/k .. (b+1)*n/k - 1``; its lowest id is the
    terminal of partition ``b+1``. With ``relabel="uniform"`` every
    non-terminal gets a uniformly random initial label.
    """
    n, k = params.n, params.k
    rng = np.random.default_rng(params.seed)
    size = n // k
    block = np.arange(n) // size
    iu, iv = np.triu_indices(n, 1)
    prob = np.where(block[iu] == block[iv], params.p_in, params.p_out)
    keep = rng.random(len(iu)) < prob
    edges = zip(iu[keep].tolist(), iv[keep].tolist(), [1.0] * int(keep.sum()))
    terminals = tuple(b * size for b in range(k))
    labels = block + 1
    if params.relabel == "uniform":
        labels = rng.integers(1, k + 1, size=n)
        labels[list(terminals)] = np.arange(1, k + 1)
    return Instance(WeightedGraph(n, edges), labels, terminals, params.r)


def gen_integrality_gap(r: int, epsilon: float, tail_len: int) -> Instance:
    """Path of r+2 nodes (first edge weight epsilon) plus a disjoint unit path.

    Node 0 is terminal 1; the last node of the tail path is terminal 2. Every
    node except node 0 starts in partition 2.
    """
    if r < 1 or tail_len < 1:
        raise ValueError("need r >= 1 and tail_len >= 1")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    head = r + 2
    n = head + tail_len
    edges = [(0, 1, float(epsilon))]
    edges += [(i, i + 1, 1.0) for i in range(1, head - 1)]
    edges += [(i, i + 1, 1.0) for i in range(head, n - 1)]
    labels = np.full(n, 2)
    labels[0] = 1
    return Instance(WeightedGraph(n, edges), labels, (0, n - 1), r)


@dataclass(frozen=True)
class ReductionLayout:
    """Node-id layout of a densest-subgraph reduction instance."""

    n: int          # nodes of the input graph, ids 0..n-1 (part A)
    t: int          # terminal of part A (partition 1)
    b_start: int    # first clique node; the first m clique nodes are edge nodes
    b_size: int
    s: int          # terminal of part B (partition 2)


def densest_reduction_layout(n: int) -> ReductionLayout:
    b_size = 2 * n * n + n
    return ReductionLayout(n, n, n + 1, b_size, n + 1 + b_size)


def gen_densest_reduction(dsg_graph: WeightedGraph, r: int,
                          max_input_nodes: int = 15) -> Instance:
    """Reduce a densest r-subgraph instance to r-move 2-partitioning.

    Part A is a copy of the input plus terminal ``t`` joined to every copy
    node; part B is a clique of ``2n^2+n`` nodes whose first ``m`` members
    stand for the input edges, plus terminal ``s`` joined to every node of B
    and every copy node. Edge node ``e=(u,v)`` is joined to ``u`` and ``v``.
    A is partition 1, B is partition 2. All weights are 1.
    """
    n, m = dsg_graph.n, dsg_graph.m
    if n > max_input_nodes:
        raise CapacityError(f"input has {n} nodes; limit is {max_input_nodes}")
    L = densest_reduction_layout(n)
    if m > L.b_size:
        raise CapacityError("more edges than clique nodes")
    edges = [(u, v, 1.0) for u, v, _ in dsg_graph.edges]
    edges += [(v, L.t, 1.0) for v in range(n)]
    b_nodes = range(L.b_start, L.b_start + L.b_size)
    edges += [(a, b, 1.0) for a, b in combinations(b_nodes, 2)]
    edges += [(b, L.s, 1.0) for b in b_nodes]
    edges += [(v, L.s, 1.0) for v in range(n)]
    for e, (u, v, _) in enumerate(dsg_graph.edges):
        edges += [(u, L.b_start + e, 1.0), (v, L.b_start + e, 1.0)]
    total = L.s + 1
    labels = np.full(total, 2)
    labels[: L.t + 1] = 1
    return Instance(WeightedGraph(total, edges), labels, (L.t, L.s), r)


def load_labeled_edgelist(edges_path, membership_path, top_blocks: int,
                          r: int = 0) -> Instance:
    """Induced subgraph on the ``top_blocks`` largest labels of a membership file.

    ``edges_path`` holds ``u v`` lines, ``membership_path`` holds
    ``node label`` lines. Partitions are numbered by decreasing block size
    (ties by smaller label id); nodes are renumbered densely in id order and
    the lowest id in each partition becomes its terminal. Self-loops are
    dropped with a logged warning.
    """
    membership: dict[int, int] = {}
    for lineno, toks in _data_lines(membership_path):
        if len(toks) < 2:
            raise InstanceFormatError(f"{membership_path}:{lineno}: expected 'node label'")
        try:
            membership[int(toks[0])] = int(toks[1])
        except ValueError:
            raise InstanceFormatError(f"{membership_path}:{lineno}: non-integer field")
    raw_edges = []
    loops = 0
    for lineno, toks in _data_lines(edges_path):
        if len(toks) < 2:
            raise InstanceFormatError(f"{edges_path}:{lineno}: expected 'u v'")
        try:
            u, v = int(toks[0]), int(toks[1])
        except ValueError:
            raise InstanceFormatError(f"{edges_path}:{lineno}: non-integer field")
        if u == v:
            loops += 1
            continue
        for x in (u, v):
            if x not in membership:
                raise InstanceFormatError(f"{edges_path}:{lineno}: node {x} has no label")
        raw_edges.append((u, v))
    if loops:
        log.warning("dropped %d self-loop line(s) from %s", loops, edges_path)
    sizes = Counter(membership.values())
    if top_blocks < 2:
        raise InstanceFormatError("need at least two blocks")
    if top_blocks > len(sizes):
        raise InstanceFormatError(f"asked for {top_blocks} blocks, only {len(sizes)} labels")
    chosen = sorted(sizes, key=lambda lab: (-sizes[lab], lab))[:top_blocks]
    part_of = {lab: i + 1 for i, lab in enumerate(chosen)}
    nodes = sorted(v for v, lab in membership.items() if lab in part_of)
    index = {v: i for i, v in enumerate(nodes)}
    labels = np.array([part_of[membership[v]] for v in nodes])
    terminals = []
    for p in range(1, top_blocks + 1):
        members = np.flatnonzero(labels == p)
        if members.size == 0:
            raise InstanceFormatError(f"induced block {p} is empty")
        terminals.append(int(members[0]))
    edges = [(index[u], index[v], 1.0) for u, v in raw_edges if u in index and v in index]
    return Instance(WeightedGraph(len(nodes), edges), labels, tuple(terminals), r)


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line and not line.startswith("#"):
                yield lineno, line.split()


def random_instance(rng: np.random.Generator, n: int, k: int, r: int,
                    p: float = 0.5, weights=(0.5, 1.0, 1.5, 2.0, 3.0, 4.0)) -> Instance:
    """Small random instance for property tests: random graph, random labels."""
    iu, iv = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    w = rng.choice(np.asarray(weights, dtype=float), size=int(keep.sum()))
    terminals = tuple(int(x) for x in rng.choice(n, size=k, replace=False))
    labels = rng.integers(1, k + 1, size=n)
    for i, s in enumerate(terminals, start=1):
        labels[s] = i
    return Instance(WeightedGraph(n, zip(iu[keep].tolist(), iv[keep].tolist(), w.tolist())),
                    labels, terminals, r)
