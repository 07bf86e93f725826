"""Uniform interference pricing: price bounds and the descending price sweep."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import DEFAULT_MAX_ITER, DEFAULT_TOL, _iterate, solve_ne
from .model import GameOutcome, NetworkInstance, ipn_all


def price_upper_bound(inst: NetworkInstance) -> float:
    """Smallest uniform price at which every user switches off."""
    return float(np.max(inst.w * inst.direct / (inst.g * inst.sigma2)))


def price_lower_bound(inst: NetworkInstance) -> float:
    """Largest uniform price at which every user still transmits at peak."""
    d = ipn_all(inst, inst.p_max)
    return float(np.min(inst.w * inst.direct / (inst.g * (inst.p_max * inst.direct + d))))


@dataclass(frozen=True)
class SweepPoint:
    price: float
    revenue: float
    interference: float


@dataclass(frozen=True, eq=False)
class UniformResult:
    price: float
    outcome: GameOutcome
    trace: list[SweepPoint]

    @property
    def revenue(self) -> float:
        return self.outcome.revenue


def uniform_outcome(inst: NetworkInstance, price: float, p0=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> GameOutcome:
    """NE of the user subgame under one common price, with its metrics."""
    ne = solve_ne(inst, price, p0=p0, tol=tol, max_iter=max_iter)
    return GameOutcome.evaluate(inst, ne.powers, price, ne.iterations, ne.converged)


def solve_uniform(
    inst: NetworkInstance,
    epsilon: float | None = None,
    *,
    refine: bool = True,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    boundary_rtol: float = 1e-13,
) -> UniformResult:
    """Descend from the upper price bound in steps of ``epsilon``.

    The sweep stops at the first price whose NE interference exceeds
    ``inst.i_th`` or once the lower bound is reached, and returns the feasible
    visited price with the largest revenue (largest price on ties).

    With ``refine`` the lower bound itself is always a candidate, and when the
    sweep stops on an infeasible price (the lower bound included) the bracket
    to the previous feasible price is bisected down to the smallest feasible
    price, which is added as a candidate. Interference is nonincreasing in the
    price on the swept range, so the bisection is well posed.
    """
    hi = price_upper_bound(inst)
    lo = price_lower_bound(inst)
    if epsilon is None:
        epsilon = (hi - lo) / 1000.0
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")

    trace: list[SweepPoint] = []
    best = None  # (price, revenue, powers, iterations, converged)
    p_warm = np.zeros(inst.n)

    def ne(price: float, p0: np.ndarray):
        return _iterate(inst, np.full(inst.n, price), p0, tol, max_iter)

    def visit(price: float) -> float:
        nonlocal best, p_warm
        # unique NE, so warm-starting only changes the iteration count
        p, it, residual = ne(price, p_warm)
        p_warm = p
        interference = float(np.dot(p, inst.g))
        revenue = price * interference
        trace.append(SweepPoint(price, revenue, interference))
        if interference <= inst.i_th and (best is None or revenue > best[1]):
            best = (price, revenue, p, it, residual <= tol)
        return interference

    k = 0
    crossed = None
    while True:
        price = hi - k * epsilon
        if price <= lo:
            if refine and visit(lo) > inst.i_th:
                crossed = lo
            break
        if visit(price) > inst.i_th:
            crossed = price
            break
        k += 1

    if refine and crossed is not None and k > 0:
        a, b = crossed, hi - (k - 1) * epsilon  # infeasible, feasible
        while b - a > boundary_rtol * b:
            mid = 0.5 * (a + b)
            if float(np.dot(ne(mid, np.zeros(inst.n))[0], inst.g)) > inst.i_th:
                a = mid
            else:
                b = mid
        visit(b)

    assert best is not None  # the upper bound always yields zero interference
    price, _, p, it, converged = best
    return UniformResult(price=price, outcome=GameOutcome.evaluate(inst, p, price, it, converged), trace=trace)
