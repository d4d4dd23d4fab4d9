"""Grid rounding of an r-move LP solution, and threshold-component rounding.

Grid rounding shifts every LP entry by a shared ``rho`` and floors it to a
multiple of ``g = (k-1)/(k(r+1))``. Nodes with identical rounded rows form a
group; each group moves as a whole to one partition.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .graph import GraphError, Instance, CutResult, make_result
from .lp import FractionalAssignment, edge_distances

DEDUP_TOL = 1e-12


class RoundingError(GraphError):
    """Invalid rounding parameter or a broken rounding invariant."""


def rounding_g(k: int, r: int) -> float:
    return (k - 1) / (k * (r + 1))


@dataclass(frozen=True)
class RoundingParams:
    g: float
    rho: float
    seed: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.rho < self.g:
            raise RoundingError(f"rho={self.rho} outside (0, {self.g})")


@dataclass(frozen=True)
class GroupStats:
    members: tuple[int, ...]
    r_z: float
    chosen: int


def _matrix(X) -> np.ndarray:
    return X.values if isinstance(X, FractionalAssignment) else np.asarray(X, dtype=float)


def grid_keys(X, g: float, rho: float) -> np.ndarray:
    """Integer multipliers ``floor((X + rho)/g)``."""
    if not 0 < rho < g:
        raise RoundingError(f"rho={rho} outside (0, {g})")
    return np.floor((_matrix(X) + rho) / g).astype(np.int64)


def grid_round(X, g: float, rho: float) -> np.ndarray:
    """Entrywise ``g * floor((X + rho)/g)``."""
    return g * grid_keys(X, g, rho)


def _groups(keys: np.ndarray) -> np.ndarray:
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    return inverse.reshape(-1)


def _assign_by_group(instance: Instance, group: np.ndarray) -> np.ndarray:
    """Give each group its terminal's partition, else its majority initial label."""
    k = instance.k
    count = group.max() + 1 if group.size else 0
    anchor = np.zeros(count, dtype=np.int64)
    for i, s in enumerate(instance.terminals, start=1):
        z = group[s]
        if anchor[z]:
            raise RoundingError(f"terminals s_{anchor[z]} and s_{i} share a group")
        anchor[z] = i
    tally = np.zeros((count, k), dtype=np.int64)
    np.add.at(tally, (group, instance.initial - 1), 1)
    chosen = np.where(anchor > 0, anchor, np.argmax(tally, axis=1) + 1)
    return chosen[group]


def assign_groups(instance: Instance, keys) -> np.ndarray:
    """Labeling from rounded rows (integer multipliers or their float multiples)."""
    keys = np.asarray(keys)
    if keys.dtype.kind == "f":
        # float rows from grid_round: exact equality groups exactly as keys do
        _, keys = np.unique(keys, axis=0, return_inverse=True)
        keys = keys.reshape(-1, 1)
    return _assign_by_group(instance, _groups(keys))


def group_stats(instance: Instance, X, keys) -> list[GroupStats]:
    M = _matrix(X)
    group = _groups(np.asarray(keys))
    labels = _assign_by_group(instance, group)
    own = 1.0 - M[np.arange(instance.n), instance.initial - 1]
    out = []
    for z in range(group.max() + 1):
        members = np.flatnonzero(group == z)
        out.append(GroupStats(tuple(members.tolist()), float(own[members].sum()),
                              int(labels[members[0]])))
    return out


def _check_feasible(instance: Instance, X) -> FractionalAssignment:
    fa = X if isinstance(X, FractionalAssignment) else FractionalAssignment(X)
    return fa.check(instance)


def draw_rho(rng: np.random.Generator, g: float) -> float:
    rho = 0.0
    while rho == 0.0:
        rho = float(rng.uniform(0.0, g))
    return rho


def round_at(instance: Instance, X, rho: float) -> np.ndarray:
    g = rounding_g(instance.k, instance.r)
    return _assign_by_group(instance, _groups(grid_keys(X, g, rho)))


def round_randomized(instance: Instance, X, seed: int) -> CutResult:
    fa = _check_feasible(instance, X)
    g = rounding_g(instance.k, instance.r)
    rho = draw_rho(np.random.default_rng(seed), g)
    lab = round_at(instance, fa, rho)
    return make_result(instance, lab, "lp-round", seed, rho=rho, g=g)


def rho_candidates(X, g: float) -> np.ndarray:
    """Sorted shifts in (0, g) at which some entry crosses a multiple of g."""
    c = np.mod(-_matrix(X).ravel(), g)
    c = np.sort(c[(c > DEDUP_TOL) & (c < g - DEDUP_TOL)])
    if c.size:
        c = c[np.concatenate(([True], np.diff(c) > DEDUP_TOL))]
    return c


def sweep_points(X, g: float) -> np.ndarray:
    """One shift strictly inside each interval between consecutive candidates."""
    edges = np.concatenate(([0.0], rho_candidates(X, g), [g]))
    return 0.5 * (edges[:-1] + edges[1:])


def round_derandomized(instance: Instance, X) -> CutResult:
    """Best grid rounding over every distinct rounding pattern.

    ``info["sweep"]`` lists ``(rho, cut, moves)`` for each evaluated shift.
    Ties on the cut keep the smaller shift.
    """
    fa = _check_feasible(instance, X)
    g = rounding_g(instance.k, instance.r)
    tol = instance.graph.tolerance()
    best = None
    sweep = []
    for rho in sweep_points(fa, g):
        res = make_result(instance, round_at(instance, fa, rho), "lp-round-derand")
        sweep.append((float(rho), res.cut_value, res.moves))
        if best is None or res.cut_value < best[1].cut_value - tol:
            best = (float(rho), res)
    rho, res = best
    return make_result(instance, res.labeling, "lp-round-derand", rho=rho, g=g, sweep=sweep)


def component_g(k: int, r: int) -> float:
    return 1.0 / (10 * k * r * (r + 2))


def component_round(instance: Instance, X) -> CutResult:
    """Join endpoints of LP-short edges and move each component as a whole.

    Edges with ``d_X < 1/(10 k r (r+2))`` are kept; every connected component
    takes its terminal's partition or else its majority initial label.
    """
    if instance.r == 0:
        return make_result(instance, instance.initial, "component-round")
    fa = _check_feasible(instance, X)
    g = instance.graph
    gp = component_g(instance.k, instance.r)
    short = edge_distances(g, fa) < gp
    adj = coo_matrix((np.ones(int(short.sum())), (g.eu[short], g.ev[short])), shape=(g.n, g.n))
    _, comp = connected_components(adj, directed=False)
    lab = _assign_by_group(instance, comp)
    return make_result(instance, lab, "component-round", g=gp)
