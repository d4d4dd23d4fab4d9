"""Shared fixtures-as-functions: spec example instances and seeded suites."""
from itertools import product

import numpy as np

from rmovecut.graph import Instance, WeightedGraph, cut_value
from rmovecut.instances import SbmParams, gen_sbm, random_instance


def t1(r=1):
    # s=0, a=1, b=2, t=3
    g = WeightedGraph(4, [(0, 1, 2.0), (1, 2, 1.0), (2, 3, 2.0), (1, 3, 0.5)])
    return Instance(g, [1, 1, 2, 2], (0, 3), r)


def star(r=1):
    # center 0 (label 1) joined to s1=1 and to s2=2, u2=3, u3=4 (label 2)
    g = WeightedGraph(5, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0)])
    return Instance(g, [1, 1, 2, 2, 2], (1, 2), r)


def small_suite(count, seed, k_choices=(2, 3), n_max=12, r_max=3, r_min=0):
    """Random instances with n <= n_max, weights in {0.5, ..., 4}."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        k = int(rng.choice(k_choices))
        n = int(rng.integers(k + 1, n_max + 1))
        r = int(rng.integers(r_min, r_max + 1))
        p = float(rng.uniform(0.2, 0.7))
        out.append(random_instance(rng, n, k, r, p=p))
    return out


def sbm_suite(count=50, r_values=(1, 2, 3, 4)):
    """The n=15, k=3 SBM suite with uniform relabeling, one graph per seed."""
    return [gen_sbm(SbmParams(15, 3, 0.3, 0.1, "uniform", seed, r))
            for seed in range(count) for r in r_values]


def enumerate_optimum(instance):
    """Minimum cut over every labeling that keeps terminals and moves at most r."""
    best = np.inf
    free = instance.non_terminals()
    lab = np.array(instance.initial)
    for choice in product(range(1, instance.k + 1), repeat=len(free)):
        lab[free] = choice
        if np.count_nonzero(lab != instance.initial) <= instance.r:
            best = min(best, cut_value(instance.graph, lab))
    return best


def brute_min_st_cut(graph, s, t):
    """Minimum over all 2^(n-2) bipartitions with s on side 1 and t on side 2."""
    others = [v for v in range(graph.n) if v not in (s, t)]
    best = np.inf
    lab = np.ones(graph.n, dtype=np.int64)
    lab[t] = 2
    for bits in product((1, 2), repeat=len(others)):
        lab[others] = bits
        best = min(best, cut_value(graph, lab))
    return best
