"""Command-line driver: generate instances, solve them, sweep parameter grids.

Seeds: ``solve --seed S`` hands ``S`` straight to the randomized algorithm.
``sweep`` runs each randomized algorithm once per listed seed, and
generator specs build graph ``i`` from ``derive_seed(base, i)``.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .baselines import OracleCapacityError, exact_brute_force, greedy_best_move, greedy_boundary
from .bicriteria import bicriteria_round, move_bound
from .fptas import fptas_solve
from .graph import (GraphError, Instance, WeightedGraph, format_instance, load_instance,
                    save_instance)
from .instances import (CapacityError, SbmParams, gen_densest_reduction, gen_integrality_gap,
                        gen_sbm, load_labeled_edgelist)
from .lp import (LpExtractionError, build_ckr_lp, build_lagrangian_lp, build_rmove2_lp,
                 build_rmove_lp, solve_rmove_relaxation)
from .rounding import component_round, round_derandomized, round_randomized
from .twopart import PartitionCountError, two_part_solve

log = logging.getLogger("rmovecut")

EXIT_USAGE = 2
EXIT_K_MISMATCH = 3
EXIT_CAPACITY = 4

COLUMNS = ["instance", "alg", "n", "m", "k", "r", "seed", "cut", "lp_obj", "moves",
           "ratio", "time_ms", "bound"]

RANDOMIZED = {"lp-round", "bicriteria"}
ALGORITHMS = ["lp", "lp-round", "lp-round-derand", "component-round", "fptas", "bicriteria",
              "two-part", "greedy-best", "greedy-boundary", "exact"]


class UsageError(Exception):
    pass


def derive_seed(base: int, *keys: int) -> int:
    """Independent 64-bit child seed for ``keys`` under ``base``."""
    ss = np.random.SeedSequence(entropy=base, spawn_key=tuple(keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def fmt_num(x: Optional[float]) -> str:
    if x is None:
        return ""
    return repr(float(f"{x:.12g}"))


class LpCache:
    """One r-move LP solve per distinct instance (graph, labels, r)."""

    def __init__(self, method: str = "auto"):
        self.method = method
        self._store: dict[Instance, object] = {}

    def get(self, instance: Instance):
        if instance not in self._store:
            self._store[instance] = solve_rmove_relaxation(instance, self.method)
        return self._store[instance]


def run_algorithm(instance: Instance, alg: str, cache: LpCache, seed: Optional[int],
                  epsilon: float, gamma: float, max_work: int):
    """Run one algorithm; returns (cut, moves or None, move bound)."""
    bound = instance.r
    if alg == "lp":
        return cache.get(instance).objective, None, bound
    if alg == "lp-round":
        res = round_randomized(instance, cache.get(instance).assignment, seed or 0)
    elif alg == "lp-round-derand":
        res = round_derandomized(instance, cache.get(instance).assignment)
    elif alg == "component-round":
        res = component_round(instance, cache.get(instance).assignment)
    elif alg == "bicriteria":
        res = bicriteria_round(instance, cache.get(instance).assignment, gamma, seed or 0)
        bound = move_bound(instance.r, gamma)
    elif alg == "fptas":
        res = fptas_solve(instance, epsilon)
    elif alg == "two-part":
        res = two_part_solve(instance)
    elif alg == "greedy-best":
        res = greedy_best_move(instance)
    elif alg == "greedy-boundary":
        res = greedy_boundary(instance)
    elif alg == "exact":
        res = exact_brute_force(instance, max_work=max_work)
    else:
        raise UsageError(f"unknown algorithm {alg!r}")
    return res.cut_value, res.moves, bound


def make_row(name: str, instance: Instance, alg: str, seed: Optional[int], cache: LpCache,
             args, with_lp: bool) -> dict:
    t0 = time.perf_counter()
    cut, moves, bound = run_algorithm(instance, alg, cache, seed, args.eps, args.gamma,
                                      args.max_work)
    elapsed = (time.perf_counter() - t0) * 1000
    lp_obj = cache.get(instance).objective if with_lp or alg == "lp" else None
    ratio = None
    if lp_obj is not None and lp_obj > 1e-12:
        ratio = cut / lp_obj
    elif lp_obj is not None and cut <= 1e-12:
        ratio = 1.0
    if moves is not None and moves > bound:
        log.error("%s on %s moved %d > bound %d", alg, name, moves, bound)
    return {
        "instance": name, "alg": alg, "n": instance.n, "m": instance.graph.m,
        "k": instance.k, "r": instance.r, "seed": "" if seed is None else seed,
        "cut": fmt_num(cut), "lp_obj": fmt_num(lp_obj),
        "moves": "" if moves is None else moves, "ratio": fmt_num(ratio),
        "time_ms": f"{elapsed:.3f}" if args.timing else "", "bound": bound,
    }


def write_rows(rows: list[dict], out, header: bool = True) -> None:
    w = csv.DictWriter(out, fieldnames=COLUMNS, lineterminator="\n")
    if header:
        w.writeheader()
    w.writerows(rows)


# -- commands ---------------------------------------------------------------

def read_edge_graph(path) -> WeightedGraph:
    """Unweighted ``u v`` edge list; node count is the largest id plus one."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            toks = raw.split("#", 1)[0].split()
            if not toks:
                continue
            try:
                u, v = int(toks[0]), int(toks[1])
            except (ValueError, IndexError):
                raise UsageError(f"{path}:{lineno}: expected 'u v'")
            pairs.append((u, v))
    n = 1 + max((max(p) for p in pairs), default=-1)
    return WeightedGraph(n, [(u, v, 1.0) for u, v in pairs])


def cmd_gen(args) -> int:
    if args.family == "sbm":
        inst = gen_sbm(SbmParams(args.n, args.k, args.pin, args.pout, args.relabel,
                                 args.seed, args.r))
    elif args.family == "gap":
        tail = args.tail if args.tail is not None else 6
        inst = gen_integrality_gap(args.r, args.eps, tail)
    elif args.family == "reduction":
        inst = gen_densest_reduction(read_edge_graph(args.input), args.r, args.max_nodes)
    else:
        inst = load_labeled_edgelist(args.edges, args.membership, args.top_blocks, args.r)
    if args.out in (None, "-"):
        sys.stdout.write(format_instance(inst))
    else:
        save_instance(inst, args.out)
    return 0


def instance_name(path) -> str:
    return Path(path).stem.replace(",", "_")


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    if args.r is not None:
        inst = inst.with_r(args.r)
    if args.alg == "two-part" and inst.k != 2:
        raise PartitionCountError(f"two-part needs k=2, instance has k={inst.k}")
    seed = args.seed if args.alg in RANDOMIZED else None
    row = make_row(instance_name(args.instance), inst, args.alg, seed,
                   LpCache(args.lp_method), args, not args.no_lp)
    write_rows([row], sys.stdout, header=not args.no_header)
    return 0


def parse_int_list(text: str) -> list[int]:
    """``"1,3,5"`` or ``"1-4"`` or a mix of both."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def expand_source(spec: str, base_seed: int) -> list[tuple[str, Instance]]:
    """Instance file path, or a generator spec ``family:key=value,...``.

    ``sbm:n=15,k=3,pin=0.3,pout=0.1,relabel=uniform,graphs=5`` and
    ``gap:eps=1,tail=6`` are understood; ``r`` comes from the sweep grid.
    """
    if ":" not in spec or Path(spec).exists():
        return [(instance_name(spec), load_instance(spec))]
    family, _, rest = spec.partition(":")
    kv = dict(item.split("=", 1) for item in rest.split(",") if item)
    try:
        if family == "sbm":
            n, k = int(kv["n"]), int(kv["k"])
            pin, pout = float(kv.get("pin", 0.3)), float(kv.get("pout", 0.1))
            relabel = kv.get("relabel", "uniform")
            graphs = int(kv.get("graphs", 1))
            return [(f"sbm-n{n}-k{k}-g{i}",
                     gen_sbm(SbmParams(n, k, pin, pout, relabel, derive_seed(base_seed, i))))
                    for i in range(graphs)]
        if family == "gap":
            eps, tail = float(kv.get("eps", 1.0)), int(kv.get("tail", 6))
            # the path length depends on r, so this source is rebuilt per r
            return [(f"gap-eps{eps:g}", _GapFamily(eps, tail))]
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad generator spec {spec!r}: {exc}")
    raise UsageError(f"unknown generator family {family!r}")


class _GapFamily:
    def __init__(self, eps: float, tail: int):
        self.eps, self.tail = eps, tail

    def with_r(self, r: int) -> Instance:
        return gen_integrality_gap(r, self.eps, self.tail)


def cmd_sweep(args) -> int:
    algs = [a for a in args.algs.split(",") if a]
    if not algs:
        raise UsageError("empty algorithm list")
    for a in algs:
        if a not in ALGORITHMS:
            raise UsageError(f"unknown algorithm {a!r}")
    rs = parse_int_list(args.r)
    seeds = parse_int_list(args.seeds)
    if not rs or not seeds:
        raise UsageError("empty r or seed list")
    sources = []
    for spec in args.sources:
        sources.extend(expand_source(spec, args.seed))
    cache = LpCache(args.lp_method)
    rows = []
    for name, base in sources:
        for r in rs:
            inst = base.with_r(r)
            for alg in algs:
                if alg == "two-part" and inst.k != 2:
                    log.warning("skipping two-part on %s (k=%d)", name, inst.k)
                    continue
                for seed in (seeds if alg in RANDOMIZED else [None]):
                    try:
                        rows.append(make_row(name, inst, alg, seed, cache, args, not args.no_lp))
                    except OracleCapacityError as exc:
                        log.warning("skipping exact on %s r=%d: %s", name, r, exc)
    rows.sort(key=lambda d: (d["instance"], d["alg"], d["r"],
                             -1 if d["seed"] == "" else d["seed"]))
    if args.out in (None, "-"):
        write_rows(rows, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_rows(rows, fh)
    return 0


def cmd_lp_dump(args) -> int:
    inst = load_instance(args.instance)
    if args.r is not None:
        inst = inst.with_r(args.r)
    builders: dict[str, Callable] = {
        "rmove": build_rmove_lp, "ckr": build_ckr_lp, "rmove2": build_rmove2_lp,
        "lagrangian": lambda i: build_lagrangian_lp(i, args.alpha),
    }
    sys.stdout.write(builders[args.kind](inst).dump())
    return 0


# -- argument parsing -------------------------------------------------------

def _add_solver_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps", type=float, default=0.5, help="FPTAS epsilon")
    p.add_argument("--gamma", type=float, default=0.75, help="bicriteria gamma in (1/2, 1)")
    p.add_argument("--max-work", type=int, default=2_000_000,
                   help="labelings the exact oracle may try")
    p.add_argument("--lp-method", choices=["auto", "simplex", "highs"], default="auto")
    p.add_argument("--no-lp", action="store_true",
                   help="skip the LP for non-LP algorithms (lp_obj and ratio left blank)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rmovecut",
                                 description="r-move k-partitioning solvers and experiments")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write an instance file")
    fam = gen.add_subparsers(dest="family", required=True)
    p = fam.add_parser("sbm", help="stochastic block model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--pin", type=float, required=True)
    p.add_argument("--pout", type=float, required=True)
    p.add_argument("--relabel", choices=["keep", "uniform"], default="uniform")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--r", type=int, default=0)
    p = fam.add_parser("gap", help="integrality-gap path pair")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--tail", type=int, default=None, help="second path length (default 6)")
    p = fam.add_parser("reduction", help="densest-subgraph reduction of an edge list")
    p.add_argument("--input", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--max-nodes", type=int, default=15)
    p = fam.add_parser("load", help="labeled edge list, top blocks")
    p.add_argument("--edges", required=True)
    p.add_argument("--membership", required=True)
    p.add_argument("--top-blocks", type=int, default=3)
    p.add_argument("--r", type=int, default=0)
    for p in fam.choices.values():
        p.add_argument("-o", "--out", default=None)
        p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="run one algorithm, print one CSV row")
    p.add_argument("instance")
    p.add_argument("--alg", choices=ALGORITHMS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--r", type=int, default=None, help="override the file's move budget")
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--no-timing", dest="timing", action="store_false")
    _add_solver_opts(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="cross product of sources, algorithms, r, seeds")
    p.add_argument("sources", nargs="+", help="instance files or generator specs")
    p.add_argument("--algs", required=True, help="comma-separated algorithm names")
    p.add_argument("--r", required=True, help="r values, e.g. 1-4 or 45,50,55")
    p.add_argument("--seeds", default="0", help="seeds for randomized algorithms")
    p.add_argument("--seed", type=int, default=0, help="base seed for generator specs")
    p.add_argument("--timing", action="store_true",
                   help="fill time_ms (makes output run-dependent)")
    p.add_argument("-o", "--out", default=None)
    _add_solver_opts(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("lp-dump", help="print an LP in readable form")
    p.add_argument("instance")
    p.add_argument("--kind", choices=["rmove", "ckr", "rmove2", "lagrangian"], default="rmove")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--r", type=int, default=None)
    p.set_defaults(func=cmd_lp_dump)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except PartitionCountError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_K_MISMATCH
    except (OracleCapacityError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (UsageError, GraphError, LpExtractionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
