"""Brute-force references for tests and acceptance runs.

Everything here avoids the production solvers on purpose: NE solves are
batched fixed-point sweeps written out locally, the revenue objective is
re-derived from the raw gains, and the LP oracle enumerates bases.
Ties in every argmax resolve to the lowest grid index.
"""

from __future__ import annotations

import itertools

import numpy as np

from .model import NetworkInstance


def _payoff_grid(inst: NetworkInstance, i: int, powers: np.ndarray, others, price: float) -> np.ndarray:
    interference = sum(others[j] * inst.h[j, i] for j in range(inst.n) if j != i) + inst.sigma2
    return inst.w[i] * np.log(1.0 + powers * inst.h[i, i] / interference) - powers * inst.g[i] * price


def grid_ne_check(inst: NetworkInstance, prices, p_claim, grid_points: int = 10_000) -> float:
    """Largest payoff gain any single user gets by deviating to a grid power."""
    prices = np.broadcast_to(np.asarray(prices, dtype=float), (inst.n,))
    p_claim = np.asarray(p_claim, dtype=float)
    gain = -np.inf
    for i in range(inst.n):
        grid = np.linspace(0.0, inst.p_max[i], grid_points)
        best = np.max(_payoff_grid(inst, i, grid, p_claim, prices[i]))
        current = _payoff_grid(inst, i, p_claim[i : i + 1], p_claim, prices[i])[0]
        gain = max(gain, float(best - current))
    return gain


def batch_uniform_ne(inst: NetworkInstance, prices: np.ndarray, tol: float = 1e-12, max_iter: int = 100_000) -> np.ndarray:
    """NE powers for many uniform prices at once, one row per price, from p = 0."""
    prices = np.asarray(prices, dtype=float)
    h = inst.h
    cross = h - np.diag(np.diag(h))
    with np.errstate(divide="ignore"):
        target = np.where(prices[:, None] > 0, inst.w / (inst.g * prices[:, None]), np.inf)
    p = np.zeros((prices.size, inst.n))
    for _ in range(max_iter):
        nxt = np.clip(target - (p @ cross + inst.sigma2) / np.diag(h), 0.0, inst.p_max)
        done = np.max(np.abs(nxt - p)) <= tol
        p = nxt
        if done:
            break
    return p


def grid_uniform_search(inst: NetworkInstance, price_grid_points: int = 10_000) -> tuple[float, float]:
    """Exhaustive uniform-price search over ``[0, upper bound]``; returns (price, revenue)."""
    upper = float(np.max(inst.w * np.diag(inst.h) / (inst.g * inst.sigma2)))
    prices = np.linspace(0.0, upper, price_grid_points)
    p = batch_uniform_ne(inst, prices)
    interference = p @ inst.g
    revenue = prices * interference
    revenue[interference > inst.i_th] = -np.inf
    k = int(np.argmax(revenue))
    return float(prices[k]), float(revenue[k])


def eq12_objective(inst: NetworkInstance, powers: np.ndarray) -> np.ndarray:
    """Revenue as a function of enforced powers; ``powers`` has shape (..., N)."""
    h = inst.h
    out = 0.0
    for i in range(inst.n):
        denom = inst.sigma2 + sum(powers[..., j] * h[j, i] for j in range(inst.n))
        out = out + inst.w[i] * h[i, i] * powers[..., i] / denom
    return out


def grid_revenue_max(inst: NetworkInstance, per_axis_points: int = 200) -> tuple[np.ndarray, float]:
    """Best enforced-power vector on a box grid cut by the interference cap."""
    if inst.n > 4:
        raise ValueError(f"grid_revenue_max is exhaustive in per_axis_points**N; N={inst.n} > 4 is not supported")
    axes = [np.linspace(0.0, inst.p_max[i], per_axis_points) for i in range(inst.n)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, inst.n)
    obj = eq12_objective(inst, mesh)
    obj[mesh @ inst.g > inst.i_th] = -np.inf
    k = int(np.argmax(obj))
    return mesh[k].copy(), float(obj[k])


def enumerate_lp(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None, tol: float = 1e-9) -> tuple[str, float, np.ndarray | None]:
    """Solve ``max c.x`` over ``a_ub x <= b_ub, a_eq x = b_eq, x >= 0`` by
    enumerating every basic solution of the slack form.

    Unboundedness is decided the same way on the recession cone normalized by
    ``sum(x) = 1``. Returns ``(status, objective, x)``.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    a_ub = np.zeros((0, n)) if a_ub is None else np.asarray(a_ub, dtype=float).reshape(-1, n)
    a_eq = np.zeros((0, n)) if a_eq is None else np.asarray(a_eq, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    m_ub = a_ub.shape[0]
    a = np.vstack([np.hstack([a_ub, np.eye(m_ub)]), np.hstack([a_eq, np.zeros((a_eq.shape[0], m_ub))])])
    b = np.concatenate([b_ub, b_eq])
    cost = np.concatenate([c, np.zeros(m_ub)])

    def best_vertex(a, b, cost):
        cols = a.shape[1]
        if a.shape[0]:
            rank = np.linalg.matrix_rank(a)
            if np.linalg.matrix_rank(np.hstack([a, b[:, None]])) > rank:
                return None
            keep: list[int] = []
            for r in range(a.shape[0]):
                if np.linalg.matrix_rank(a[keep + [r]]) > len(keep):
                    keep.append(r)
            a, b = a[keep], b[keep]
        m = a.shape[0]
        best = None
        for basis in itertools.combinations(range(cols), m):
            sub = a[:, basis]
            if m and abs(np.linalg.det(sub)) < 1e-12:
                continue
            x = np.zeros(cols)
            if m:
                x[list(basis)] = np.linalg.solve(sub, b)
            if np.min(x, initial=0.0) < -tol or np.max(np.abs(a @ x - b), initial=0.0) > 1e-8:
                continue
            val = float(cost @ x)
            if best is None or val > best[0] + 1e-12:
                best = (val, x)
        return best

    feasible = best_vertex(a, b, cost)
    if feasible is None:
        return "infeasible", float("nan"), None
    ray_a = np.vstack([a, np.concatenate([np.ones(n), np.zeros(m_ub)])])
    ray_b = np.concatenate([np.zeros(a.shape[0]), [1.0]])
    ray = best_vertex(ray_a, ray_b, cost)
    if ray is not None and ray[0] > 1e-9:
        return "unbounded", float("inf"), None
    val, x = feasible
    return "optimal", val, x[:n]

