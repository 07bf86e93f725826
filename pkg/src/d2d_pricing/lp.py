"""Dense two-phase primal simplex with Bland's rule.

Sized for the small programs built by the differentiated pricing scheme
(a few hundred columns at most); no sparse machinery, no warm starts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LpProblem:
    """``max c.x`` s.t. ``a_ub x <= b_ub``, ``a_eq x = b_eq``, ``x >= 0``."""

    c: np.ndarray
    a_ub: np.ndarray = None
    b_ub: np.ndarray = None
    a_eq: np.ndarray = None
    b_eq: np.ndarray = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        n = c.size
        object.__setattr__(self, "c", c)
        for a_name, b_name in (("a_ub", "b_ub"), ("a_eq", "b_eq")):
            a, b = getattr(self, a_name), getattr(self, b_name)
            a = np.zeros((0, n)) if a is None else np.atleast_2d(np.asarray(a, dtype=float))
            b = np.zeros(0) if b is None else np.asarray(b, dtype=float).ravel()
            if a.size == 0:
                a = a.reshape(0, n)
            if a.shape[1] != n:
                raise ValueError(f"{a_name} has {a.shape[1]} columns, expected {n}")
            if a.shape[0] != b.size:
                raise ValueError(f"{a_name} has {a.shape[0]} rows but {b_name} has {b.size} entries")
            if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
                raise ValueError(f"{a_name}/{b_name} contain non-finite entries")
            object.__setattr__(self, a_name, a)
            object.__setattr__(self, b_name, b)
        if not np.all(np.isfinite(c)):
            raise ValueError("c contains non-finite entries")

    @property
    def n_vars(self) -> int:
        return self.c.size


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: LpStatus
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective: float = float("nan")
    iterations: int = 0


class _Tableau:
    """Rows ``[A | b]`` plus a cost row; ``basis[r]`` is the basic column of row r."""

    def __init__(self, a: np.ndarray, b: np.ndarray, basis: list[int], tol: float):
        self.t = np.hstack([a, b[:, None]])
        self.basis = list(basis)
        self.tol = tol
        self.pivots = 0

    def pivot(self, r: int, col: int, cost: np.ndarray) -> None:
        t = self.t
        t[r] /= t[r, col]
        others = np.abs(t[:, col]) > 0
        others[r] = False
        t[others] -= np.outer(t[others, col], t[r])
        t[r, col] = 1.0
        t[others, col] = 0.0
        cost -= cost[col] * t[r]
        cost[col] = 0.0
        self.basis[r] = col
        self.pivots += 1

    def run(self, cost: np.ndarray) -> bool:
        """Maximize with reduced-cost row ``cost``; False means unbounded.

        ``cost[j] > 0`` means column ``j`` improves the objective.
        """
        t = self.t
        while True:
            # Bland: lowest-index improving column, lowest-index basic variable on ratio ties
            improving = np.flatnonzero(cost[:-1] > self.tol)
            if improving.size == 0:
                return True
            col = int(improving[0])
            column = t[:, col]
            rows = np.flatnonzero(column > self.tol)
            if rows.size == 0:
                return False
            ratios = t[rows, -1] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + self.tol * max(1.0, abs(best))]
            r = min(ties, key=lambda k: self.basis[k])
            self.pivot(int(r), col, cost)


def _reduced(cost_vec: np.ndarray, tab: _Tableau) -> np.ndarray:
    # cost row for objective max cost_vec.x expressed in the current basis
    row = np.append(cost_vec, 0.0)
    for r, col in enumerate(tab.basis):
        if row[col] != 0.0:
            row = row - row[col] * tab.t[r]
    return row


def _resolve_basis(a: np.ndarray, b: np.ndarray, basis: list[int], x: np.ndarray) -> np.ndarray:
    """Recompute the basic values from the unpivoted rows.

    Pivoting accumulates round-off in the tableau's right-hand side; one
    direct solve with the final basis is usually a few digits tighter.
    """
    if not basis:
        return x
    try:
        xb = np.linalg.solve(a[:, basis], b)
    except np.linalg.LinAlgError:
        return x
    fresh = x.copy()
    fresh[basis] = xb
    if np.max(np.abs(a @ fresh - b)) <= np.max(np.abs(a @ x - b)) and np.min(xb) >= -1e-9:
        return fresh
    return x


def solve_lp(prob: LpProblem, tol: float = 1e-9) -> LpSolution:
    """Solve ``prob`` by two-phase simplex; never raises on infeasible/unbounded."""
    n = prob.n_vars
    m_ub, m_eq = prob.a_ub.shape[0], prob.a_eq.shape[0]
    m = m_ub + m_eq

    # row equilibration before slacks are attached; leaves the solution unchanged
    core = np.vstack([prob.a_ub, prob.a_eq])
    b = np.concatenate([prob.b_ub, prob.b_eq])
    scale = np.max(np.abs(np.hstack([core, b[:, None]])), axis=1)
    scale[scale == 0] = 1.0
    a = np.zeros((m, n + m_ub))
    a[:, :n] = core / scale[:, None]
    a[:m_ub, n:] = np.eye(m_ub)
    b = b / scale
    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0

    # the slack of a <= row with b >= 0 is a ready-made basic column
    basis = [n + r if r < m_ub and not neg[r] else -1 for r in range(m)]
    need_art = [r for r in range(m) if basis[r] < 0]
    n_core = n + m_ub
    n_art = len(need_art)
    full = np.zeros((m, n_core + n_art))
    full[:, :n_core] = a
    for k, r in enumerate(need_art):
        full[r, n_core + k] = 1.0
        basis[r] = n_core + k
    tab = _Tableau(full, b, basis, tol)
    rows = list(range(m))

    if n_art:
        phase1 = np.zeros(n_core + n_art)
        phase1[n_core:] = -1.0
        cost = _reduced(phase1, tab)
        tab.run(cost)
        infeas = -float(np.dot(phase1[tab.basis], tab.t[:, -1]))
        if infeas > tol * max(1.0, float(np.max(b, initial=0.0))):
            return LpSolution(LpStatus.INFEASIBLE, iterations=tab.pivots)
        # drive zero-level artificials out; drop rows that are redundant
        keep = []
        for r in range(m):
            if tab.basis[r] >= n_core:
                cand = np.flatnonzero(np.abs(tab.t[r, :n_core]) > tol)
                if cand.size:
                    tab.pivot(r, int(cand[0]), np.zeros(tab.t.shape[1]))
                    keep.append(r)
            else:
                keep.append(r)
        tab.t = np.hstack([tab.t[keep][:, :n_core], tab.t[keep][:, -1:]])
        tab.basis = [tab.basis[r] for r in keep]
        rows = keep

    obj = np.zeros(n_core)
    obj[:n] = prob.c
    cost = _reduced(obj, tab)
    if not tab.run(cost):
        return LpSolution(LpStatus.UNBOUNDED, iterations=tab.pivots)

    x = np.zeros(n_core)
    x[tab.basis] = tab.t[:, -1]
    x = _resolve_basis(a[rows], b[rows], tab.basis, x)[:n]
    x[(x < 0) & (x > -1e-9)] = 0.0
    return LpSolution(LpStatus.OPTIMAL, x=x, objective=float(prob.c @ x), iterations=tab.pivots)
