"""Linear programs for r-move partitioning and a small exact simplex solver.

Variable layout of the r-move k-partitioning LP (``build_rmove_lp``) with
``n`` nodes, ``m`` edges and ``k`` partitions::

    X[v, i]  -> v*k + i                 (node assignment)
    Y[e, i]  -> n*k + e*k + i           (|X_u^i - X_v^i| per edge)
    d[e]     -> n*k + m*k + e           (edge distance)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .graph import Instance, WeightedGraph

LE, EQ, GE = "<=", "=", ">="

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9

# Dense tableaus larger than this go to HiGHS under method="auto".
SIMPLEX_MAX_ENTRIES = 1_500_000


class LpExtractionError(ValueError):
    pass


@dataclass
class LpProblem:
    """Minimise ``objective . x + constant`` subject to sparse linear rows."""

    num_vars: int = 0
    objective: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)
    lower: list = field(default_factory=list)
    upper: list = field(default_factory=list)
    names: list = field(default_factory=list)
    constant: float = 0.0

    def add_var(self, name: str = "", cost: float = 0.0, lb: float = 0.0,
                ub: float = math.inf) -> int:
        idx = self.num_vars
        self.num_vars += 1
        self.names.append(name or f"x{idx}")
        self.lower.append(float(lb))
        self.upper.append(float(ub))
        if cost:
            self.objective[idx] = float(cost)
        return idx

    def add_constraint(self, coeffs, rel: str, rhs: float, name: str = "") -> None:
        if rel not in (LE, EQ, GE):
            raise ValueError(f"bad relation {rel!r}")
        if not math.isfinite(rhs):
            raise ValueError("rhs must be finite")
        row: dict[int, float] = {}
        for j, a in (coeffs.items() if isinstance(coeffs, dict) else coeffs):
            if not 0 <= j < self.num_vars:
                raise ValueError(f"variable index {j} out of range")
            row[j] = row.get(j, 0.0) + float(a)
        self.constraints.append((row, rel, float(rhs), name))

    def set_cost(self, j: int, cost: float) -> None:
        self.objective[j] = float(cost)

    def cost_vector(self) -> np.ndarray:
        c = np.zeros(self.num_vars)
        for j, a in self.objective.items():
            c[j] += a
        return c

    def matrix(self) -> tuple[np.ndarray, list, np.ndarray]:
        A = np.zeros((len(self.constraints), self.num_vars))
        rels, b = [], np.zeros(len(self.constraints))
        for i, (row, rel, rhs, _) in enumerate(self.constraints):
            for j, a in row.items():
                A[i, j] = a
            rels.append(rel)
            b[i] = rhs
        return A, rels, b

    def evaluate(self, x) -> float:
        return float(self.cost_vector() @ np.asarray(x)) + self.constant

    def max_violation(self, x) -> float:
        x = np.asarray(x, dtype=float)
        worst = 0.0
        for row, rel, rhs, _ in self.constraints:
            lhs = sum(a * x[j] for j, a in row.items())
            if rel == LE:
                worst = max(worst, lhs - rhs)
            elif rel == GE:
                worst = max(worst, rhs - lhs)
            else:
                worst = max(worst, abs(lhs - rhs))
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        worst = max(worst, float(np.max(lo - x, initial=0.0)),
                    float(np.max(x - hi, initial=0.0)))
        return worst

    def dump(self) -> str:
        """Plain tabular text: one objective line, one line per constraint."""
        def fmt(row):
            return " ".join(f"{a:+.12g}*{self.names[j]}" for j, a in sorted(row.items())) or "0"

        out = [f"VARS {self.num_vars}", f"MIN {fmt(self.objective)} {self.constant:+.12g}"]
        for i, (row, rel, rhs, name) in enumerate(self.constraints):
            out.append(f"R{i}\t{name or '-'}\t{fmt(row)}\t{rel}\t{rhs:.12g}")
        for j in range(self.num_vars):
            lo, hi = self.lower[j], self.upper[j]
            if lo != 0.0 or hi != math.inf:
                out.append(f"BOUND\t{self.names[j]}\t{lo:.12g}\t{hi:.12g}")
        return "\n".join(out) + "\n"


@dataclass
class LpSolution:
    status: str
    values: Optional[np.ndarray]
    objective: float
    method: str = "simplex"
    iterations: int = 0


# -- simplex ----------------------------------------------------------------

class _Tableau:
    """Dense tableau with Bland's rule. Row 0..m-1 constraints, last row costs."""

    def __init__(self, A, b, basis):
        self.T = np.hstack([A, b[:, None]]).astype(float)
        self.basis = list(basis)
        self.iterations = 0

    def pivot(self, r, c):
        T = self.T
        T[r] /= T[r, c]
        col = T[:, c].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, c] = 0.0
        T[r, c] = 1.0
        self.basis[r] = c
        self.iterations += 1

    def run(self, cost_row: np.ndarray, allowed: np.ndarray) -> str:
        """Minimise; ``cost_row`` holds reduced costs and -objective in last slot."""
        T = self.T
        m = T.shape[0]
        while True:
            cand = np.flatnonzero((cost_row[:-1] < -OPT_TOL) & allowed)
            if cand.size == 0:
                return "optimal"
            c = int(cand[0])
            col = T[:, c]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                return "unbounded"
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = int(min(tied, key=lambda i: self.basis[i]))
            f = cost_row[c]
            self.pivot(r, c)
            cost_row -= f * T[r]
            cost_row[c] = 0.0


def _standardise(problem: LpProblem):
    """Return (A, b, c, const, recover) for min c.y, Ay = b, y >= 0 in raw columns.

    Slack/surplus columns are appended by the caller.
    """
    A0, rels, b0 = problem.matrix()
    c0 = problem.cost_vector()
    lo = np.asarray(problem.lower, dtype=float)
    hi = np.asarray(problem.upper, dtype=float)
    nv = problem.num_vars
    cols, costs, const = [], [], problem.constant
    # (orig var, column, sign) triples
    parts: list[tuple[int, int, float]] = []
    shift = np.zeros(nv)
    extra_rows = []
    for j in range(nv):
        if math.isfinite(lo[j]):
            shift[j] = lo[j]
            parts.append((j, len(cols), 1.0))
            cols.append(A0[:, j])
            costs.append(c0[j])
            if math.isfinite(hi[j]):
                extra_rows.append((len(cols) - 1, hi[j] - lo[j]))
        elif math.isfinite(hi[j]):
            shift[j] = hi[j]
            parts.append((j, len(cols), -1.0))
            cols.append(-A0[:, j])
            costs.append(-c0[j])
        else:
            parts.append((j, len(cols), 1.0))
            cols.append(A0[:, j])
            costs.append(c0[j])
            parts.append((j, len(cols), -1.0))
            cols.append(-A0[:, j])
            costs.append(-c0[j])
    A = np.column_stack(cols) if cols else np.zeros((len(rels), 0))
    b = b0 - A0 @ shift
    const += float(c0 @ shift)
    rels = list(rels)
    if extra_rows:
        ext = np.zeros((len(extra_rows), A.shape[1]))
        for i, (col, ub) in enumerate(extra_rows):
            ext[i, col] = 1.0
        A = np.vstack([A, ext])
        b = np.concatenate([b, [ub for _, ub in extra_rows]])
        rels += [LE] * len(extra_rows)

    def recover(y):
        x = shift.copy()
        for j, col, sign in parts:
            x[j] += sign * y[col]
        return x

    return A, rels, b, np.asarray(costs, dtype=float), const, recover


def _solve_simplex(problem: LpProblem) -> LpSolution:
    A, rels, b, c, const, recover = _standardise(problem)
    m, ncol = A.shape
    # make rhs non-negative
    for i in range(m):
        if b[i] < 0:
            A[i] *= -1
            b[i] *= -1
            rels[i] = {LE: GE, GE: LE, EQ: EQ}[rels[i]]
    n_slack = sum(r != EQ for r in rels)
    n_art = sum(r != LE for r in rels)
    total = ncol + n_slack + n_art
    M = np.zeros((m, total))
    M[:, :ncol] = A
    basis = [0] * m
    s_col, a_col = ncol, ncol + n_slack
    art_cols = []
    for i, rel in enumerate(rels):
        if rel == LE:
            M[i, s_col] = 1.0
            basis[i] = s_col
            s_col += 1
        else:
            if rel == GE:
                M[i, s_col] = -1.0
                s_col += 1
            M[i, a_col] = 1.0
            basis[i] = a_col
            art_cols.append(a_col)
            a_col += 1
    tab = _Tableau(M, b, basis)
    is_art = np.zeros(total, dtype=bool)
    is_art[art_cols] = True

    if art_cols:
        cost1 = np.zeros(total + 1)
        cost1[art_cols] = 1.0
        for i, bv in enumerate(tab.basis):
            if is_art[bv]:
                cost1 -= tab.T[i]
        tab.run(cost1, np.ones(total, dtype=bool))
        infeas = -cost1[-1]
        if infeas > FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
            return LpSolution("infeasible", None, math.nan, "simplex", tab.iterations)
        # drive remaining artificials out of the basis
        drop = []
        for i in range(m):
            if is_art[tab.basis[i]]:
                row = tab.T[i, :total]
                nz = np.flatnonzero((np.abs(row) > PIVOT_TOL) & ~is_art)
                if nz.size:
                    tab.pivot(i, int(nz[0]))
                else:
                    drop.append(i)
        if drop:
            keep = [i for i in range(m) if i not in set(drop)]
            tab.T = tab.T[keep]
            tab.basis = [tab.basis[i] for i in keep]

    cost2 = np.zeros(total + 1)
    cost2[:ncol] = c
    for i, bv in enumerate(tab.basis):
        if cost2[bv] != 0.0:
            cost2 -= cost2[bv] * tab.T[i]
    status = tab.run(cost2, ~is_art)
    if status == "unbounded":
        return LpSolution("unbounded", None, -math.inf, "simplex", tab.iterations)
    y = np.zeros(total)
    for i, bv in enumerate(tab.basis):
        y[bv] = tab.T[i, -1]
    x = recover(y[:ncol])
    return LpSolution("optimal", x, problem.evaluate(x), "simplex", tab.iterations)


def _solve_highs(problem: LpProblem) -> LpSolution:
    from scipy.optimize import linprog
    from scipy.sparse import coo_matrix

    ub_r, ub_c, ub_v, b_ub = [], [], [], []
    eq_r, eq_c, eq_v, b_eq = [], [], [], []
    for row, rel, rhs, _ in problem.constraints:
        if rel == EQ:
            i = len(b_eq)
            b_eq.append(rhs)
            for j, a in row.items():
                eq_r.append(i); eq_c.append(j); eq_v.append(a)
        else:
            sign = 1.0 if rel == LE else -1.0
            i = len(b_ub)
            b_ub.append(sign * rhs)
            for j, a in row.items():
                ub_r.append(i); ub_c.append(j); ub_v.append(sign * a)
    nv = problem.num_vars
    A_ub = coo_matrix((ub_v, (ub_r, ub_c)), shape=(len(b_ub), nv)).tocsr() if b_ub else None
    A_eq = coo_matrix((eq_v, (eq_r, eq_c)), shape=(len(b_eq), nv)).tocsr() if b_eq else None
    bounds = [(lo if math.isfinite(lo) else None, hi if math.isfinite(hi) else None)
              for lo, hi in zip(problem.lower, problem.upper)]
    res = linprog(problem.cost_vector(), A_ub=A_ub, b_ub=b_ub or None, A_eq=A_eq,
                  b_eq=b_eq or None, bounds=bounds, method="highs-ds",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status == 2:
        # presolve may report "infeasible" for unbounded problems; re-check feasibility
        probe = linprog(np.zeros(nv), A_ub=A_ub, b_ub=b_ub or None, A_eq=A_eq,
                        b_eq=b_eq or None, bounds=bounds, method="highs-ds")
        if probe.status == 0:
            return LpSolution("unbounded", None, -math.inf, "highs", res.nit)
        return LpSolution("infeasible", None, math.nan, "highs", res.nit)
    if res.status == 3:
        return LpSolution("unbounded", None, -math.inf, "highs", res.nit)
    if res.status != 0:
        raise RuntimeError(f"HiGHS failed: {res.message}")
    x = np.asarray(res.x)
    return LpSolution("optimal", x, problem.evaluate(x), "highs", res.nit)


def tableau_size(problem: LpProblem) -> int:
    rows = len(problem.constraints) + sum(math.isfinite(u) for u in problem.upper)
    return rows * (problem.num_vars + 2 * rows + 1)


def solve_lp(problem: LpProblem, method: str = "auto") -> LpSolution:
    """Solve ``problem``.

    ``method`` is ``"simplex"`` (dense two-phase tableau, Bland's rule),
    ``"highs"`` (scipy's HiGHS dual simplex) or ``"auto"``, which uses the
    built-in simplex unless the tableau would exceed ``SIMPLEX_MAX_ENTRIES``.
    """
    if method == "auto":
        method = "simplex" if tableau_size(problem) <= SIMPLEX_MAX_ENTRIES else "highs"
    if method == "simplex":
        return _solve_simplex(problem)
    if method == "highs":
        return _solve_highs(problem)
    raise ValueError(f"unknown LP method {method!r}")


# -- LP builders ------------------------------------------------------------

def _x(v, i, k):
    return v * k + i


def _build_multiway(instance: Instance, with_moves: bool) -> LpProblem:
    g, n, k = instance.graph, instance.n, instance.k
    m = g.m
    lp = LpProblem()
    for v in range(n):
        for i in range(k):
            lp.add_var(f"X[{v},{i + 1}]")
    for e in range(m):
        for i in range(k):
            lp.add_var(f"Y[{g.eu[e]},{g.ev[e]},{i + 1}]")
    for e in range(m):
        lp.add_var(f"d[{g.eu[e]},{g.ev[e]}]", cost=g.ew[e])
    y0, d0 = n * k, n * k + m * k
    for e in range(m):
        u, v = int(g.eu[e]), int(g.ev[e])
        row = {d0 + e: 1.0}
        for i in range(k):
            row[y0 + e * k + i] = -0.5
        lp.add_constraint(row, EQ, 0.0, f"C1[{u},{v}]")
    for e in range(m):
        u, v = int(g.eu[e]), int(g.ev[e])
        for i in range(k):
            yi = y0 + e * k + i
            lp.add_constraint({yi: 1.0, _x(u, i, k): -1.0, _x(v, i, k): 1.0}, GE, 0.0,
                              f"C2[{u},{v},{i + 1}]")
            lp.add_constraint({yi: 1.0, _x(v, i, k): -1.0, _x(u, i, k): 1.0}, GE, 0.0,
                              f"C3[{u},{v},{i + 1}]")
    for v in range(n):
        lp.add_constraint({_x(v, i, k): 1.0 for i in range(k)}, EQ, 1.0, f"C4[{v}]")
    for t, s in enumerate(instance.terminals):
        for i in range(k):
            lp.add_constraint({_x(s, i, k): 1.0}, EQ, 1.0 if i == t else 0.0,
                              f"C5[{s},{i + 1}]")
    if with_moves:
        # sum_v (1 - X_v^{l_v}) <= r  <=>  -sum_v X_v^{l_v} <= r - n
        row = {_x(v, int(instance.initial[v]) - 1, k): -1.0 for v in range(n)}
        lp.add_constraint(row, LE, instance.r - n, "C7")
    return lp


def build_rmove_lp(instance: Instance) -> LpProblem:
    return _build_multiway(instance, with_moves=True)


def build_ckr_lp(instance: Instance) -> LpProblem:
    return _build_multiway(instance, with_moves=False)


def _require_two(instance: Instance) -> None:
    if instance.k != 2:
        raise ValueError("this LP is defined for k = 2 only")


def _build_scalar_two(instance: Instance):
    _require_two(instance)
    g, n = instance.graph, instance.n
    lp = LpProblem()
    for v in range(n):
        # the tables list only x >= 0; without x <= 1 the move mass can go
        # negative and the Lagrangian is unbounded
        lp.add_var(f"x[{v}]", ub=1.0)
    for e in range(g.m):
        lp.add_var(f"y[{g.eu[e]},{g.ev[e]}]", cost=g.ew[e])
    for e in range(g.m):
        u, v = int(g.eu[e]), int(g.ev[e])
        lp.add_constraint({n + e: 1.0, u: -1.0, v: 1.0}, GE, 0.0, f"C1[{u},{v}]")
        lp.add_constraint({n + e: 1.0, v: -1.0, u: 1.0}, GE, 0.0, f"C2[{u},{v}]")
    s, t = instance.terminals
    lp.add_constraint({s: 1.0}, EQ, 1.0, "C3")
    lp.add_constraint({t: 1.0}, EQ, 0.0, "C4")
    return lp


def _move_mass_row(instance: Instance) -> tuple[dict, float]:
    """Coefficients and constant of sum_{l=1}(1-x_v) + sum_{l=2} x_v."""
    row, const = {}, 0.0
    for v in range(instance.n):
        if instance.initial[v] == 1:
            row[v] = -1.0
            const += 1.0
        else:
            row[v] = 1.0
    return row, const


def build_rmove2_lp(instance: Instance) -> LpProblem:
    lp = _build_scalar_two(instance)
    row, const = _move_mass_row(instance)
    lp.add_constraint(row, LE, instance.r - const, "C6")
    return lp


def build_lagrangian_lp(instance: Instance, alpha: float) -> LpProblem:
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    lp = _build_scalar_two(instance)
    row, const = _move_mass_row(instance)
    for v, a in row.items():
        lp.set_cost(v, alpha * a)
    lp.constant = alpha * const
    return lp


# -- fractional assignments -------------------------------------------------

class FractionalAssignment:
    """Row-stochastic ``n x k`` matrix of LP assignment values."""

    __slots__ = ("values",)

    def __init__(self, values):
        X = np.array(values, dtype=float)
        if X.ndim != 2:
            raise ValueError("assignment must be a matrix")
        X.setflags(write=False)
        self.values = X

    @classmethod
    def from_labeling(cls, labeling, k: int) -> "FractionalAssignment":
        lab = np.asarray(labeling)
        X = np.zeros((len(lab), k))
        X[np.arange(len(lab)), lab - 1] = 1.0
        return cls(X)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]

    def is_integral(self, tol: float = 1e-9) -> bool:
        X = self.values
        return bool(np.all((np.abs(X) <= tol) | (np.abs(X - 1) <= tol)))

    def move_mass(self, instance: Instance) -> float:
        return float(np.sum(1.0 - self.values[np.arange(self.n), instance.initial - 1]))

    def violations(self, instance: Instance) -> list[str]:
        X = self.values
        out = []
        if X.shape != (instance.n, instance.k):
            return [f"shape {X.shape} != ({instance.n}, {instance.k})"]
        if np.any(np.abs(X.sum(axis=1) - 1) > 1e-7):
            out.append("row sums differ from 1 (C4)")
        for i, s in enumerate(instance.terminals):
            e = np.zeros(instance.k)
            e[i] = 1.0
            if not np.array_equal(X[s], e):
                out.append(f"terminal row {s} is not e_{i + 1} (C5)")
        if np.any(X < -1e-9):
            out.append("negative entry (C6)")
        if self.move_mass(instance) > instance.r + 1e-6:
            out.append("move constraint exceeded (C7)")
        return out

    def check(self, instance: Instance) -> "FractionalAssignment":
        bad = self.violations(instance)
        if bad:
            raise LpExtractionError("; ".join(bad))
        return self

    def to_labeling(self) -> np.ndarray:
        """Labels of an integral assignment (argmax per row)."""
        return np.argmax(self.values, axis=1) + 1


def extract_assignment(instance: Instance, solution: LpSolution) -> FractionalAssignment:
    """Read the X block of an optimal r-move (or CKR) LP solution."""
    if solution.status != "optimal":
        raise LpExtractionError(f"LP status is {solution.status}")
    n, k = instance.n, instance.k
    X = np.array(solution.values[: n * k], dtype=float).reshape(n, k)
    if np.any(X < -1e-9):
        raise LpExtractionError("entry below -1e-9")
    X[X < 0] = 0.0
    sums = X.sum(axis=1)
    if np.any(np.abs(sums - 1) > 1e-7):
        raise LpExtractionError("row sum differs from 1 by more than 1e-7")
    X /= sums[:, None]
    for i, s in enumerate(instance.terminals):
        X[s] = 0.0
        X[s, i] = 1.0
    fa = FractionalAssignment(X)
    if fa.move_mass(instance) > instance.r + 1e-6:
        raise LpExtractionError("move constraint exceeded after extraction")
    return fa


def distance(X, u: int, v: int) -> float:
    """Half the l1 distance between the assignment rows of ``u`` and ``v``."""
    M = X.values if isinstance(X, FractionalAssignment) else np.asarray(X)
    return 0.5 * float(np.abs(M[u] - M[v]).sum())


def edge_distances(graph: WeightedGraph, X) -> np.ndarray:
    M = X.values if isinstance(X, FractionalAssignment) else np.asarray(X)
    return 0.5 * np.abs(M[graph.eu] - M[graph.ev]).sum(axis=1)


def lp_cost(graph: WeightedGraph, X) -> float:
    """sum_e c_e d_X(e) for an assignment ``X``."""
    return float(graph.ew @ edge_distances(graph, X))


@dataclass
class RelaxationResult:
    objective: float
    assignment: FractionalAssignment
    solution: LpSolution


def solve_rmove_relaxation(instance: Instance, method: str = "auto") -> RelaxationResult:
    """Solve the r-move LP and return its objective with the extracted X."""
    sol = solve_lp(build_rmove_lp(instance), method)
    if sol.status != "optimal":
        raise LpExtractionError(f"r-move LP is {sol.status}")
    return RelaxationResult(sol.objective, extract_assignment(instance, sol), sol)
