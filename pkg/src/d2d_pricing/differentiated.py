"""Differentiated (per-user) interference pricing.

The optimal scheme expresses BS revenue in terms of the NE powers, solves a
linear program in the substituted variables ``y_i = p_i z_i`` and
``z_i = 1 / (sum_j p_j h[j, i] + sigma2)``, recovers ``p_i = y_i / z_i`` and
prices the users so those powers are their NE. Because every user has its
own denominator ``z_i`` the substitution does not linearize the coupled rows
exactly for N > 1, so each solution is checked against the original power
problem and the NE fixed point and the outcome is reported, not assumed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .game import solve_ne
from .lp import LpProblem, LpStatus, solve_lp
from .model import NetworkInstance, total_interference

log = logging.getLogger(__name__)

Z_FLOOR = 1e-12
FEAS_RTOL = 1e-9


class LpMode(str, Enum):
    AS_WRITTEN = "as_written"
    CROSS_TERM = "cross_term"


def prices_from_powers(inst: NetworkInstance, p_star) -> np.ndarray:
    """Prices under which ``p_star`` solves every user's first-order condition."""
    p = np.asarray(p_star, dtype=float)
    received = p @ inst.h + inst.sigma2  # includes each user's own signal
    return inst.w * inst.direct / (inst.g * received)


def revenue_of_powers(inst: NetworkInstance, p) -> float:
    """BS revenue when the powers ``p`` are enforced by :func:`prices_from_powers`."""
    p = np.asarray(p, dtype=float)
    return float(np.sum(inst.w * inst.direct * p / (p @ inst.h + inst.sigma2)))


def build_lp(inst: NetworkInstance, mode: LpMode | str = LpMode.CROSS_TERM) -> LpProblem:
    """LP over ``x = (y_1..y_N, z_1..z_N)``.

    ``cross_term`` uses ``sum_j h[j, i] y_j + sigma2 z_i = 1`` for each i;
    ``as_written`` uses ``(sum_j h[j, i]) y_i + sigma2 z_i = 1``. The two
    coincide for a single user.
    """
    mode = LpMode(mode)
    n = inst.n
    eye = np.eye(n)
    c = np.concatenate([inst.w * inst.direct, np.zeros(n)])
    interference_rows = np.hstack([np.tile(inst.g, (n, 1)), -inst.i_th * eye])
    peak_rows = np.hstack([eye, -np.diag(inst.p_max)])
    if mode is LpMode.CROSS_TERM:
        signal = inst.h.T.copy()  # row i holds h[j, i] over j
    else:
        signal = np.diag(inst.h.sum(axis=0))
    a_eq = np.hstack([signal, inst.sigma2 * eye])
    return LpProblem(
        c=c,
        a_ub=np.vstack([interference_rows, peak_rows]),
        b_ub=np.zeros(2 * n),
        a_eq=a_eq,
        b_eq=np.ones(n),
    )


@dataclass(frozen=True)
class VerificationReport:
    fixed_point_residual: float
    original_feasible: bool
    revenue_vs_uniform: float
    box_violation: float = 0.0
    interference_excess: float = 0.0
    ne_converged: bool = True
    degenerate_users: tuple[int, ...] = ()

    @property
    def exact(self) -> bool:
        """Recovered powers are feasible and are the NE at the recovered prices."""
        return self.original_feasible and not self.degenerate_users and self.fixed_point_residual < 1e-5


@dataclass(frozen=True, eq=False)
class DiffPricingResult:
    prices: np.ndarray
    powers: np.ndarray
    objective: float  # revenue at the recovered powers
    lp_status: LpStatus
    verification: VerificationReport | None
    lp_objective: float = float("nan")
    mode: LpMode = LpMode.CROSS_TERM
    lp_x: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def degenerate(self) -> bool:
        return self.verification is not None and bool(self.verification.degenerate_users)


def check_original(inst: NetworkInstance, p) -> tuple[float, float]:
    """(box violation, interference excess), both clipped at zero."""
    p = np.asarray(p, dtype=float)
    box = float(max(0.0, np.max(-p, initial=0.0), np.max(p - inst.p_max, initial=0.0)))
    excess = max(total_interference(inst, p) - inst.i_th, 0.0)
    return box, excess


def solve_optimal(
    inst: NetworkInstance,
    mode: LpMode | str = LpMode.CROSS_TERM,
    *,
    uniform_revenue: float | None = None,
    lp_tol: float = 1e-9,
) -> DiffPricingResult:
    """Optimal differentiated prices via the LP, with mandatory verification.

    ``uniform_revenue`` feeds ``revenue_vs_uniform``; when omitted the uniform
    scheme is solved on the same instance.
    """
    mode = LpMode(mode)
    n = inst.n
    sol = solve_lp(build_lp(inst, mode), tol=lp_tol)
    if sol.status is not LpStatus.OPTIMAL:
        log.warning("differentiated pricing LP is %s", sol.status.value)
        nan = np.full(n, np.nan)
        return DiffPricingResult(nan, nan, float("nan"), sol.status, None, mode=mode)

    y, z = sol.x[:n], sol.x[n:]
    degenerate = tuple(int(i) for i in np.flatnonzero(z <= Z_FLOOR))
    safe_z = np.where(z > Z_FLOOR, z, 1.0)
    powers = np.where(z > Z_FLOOR, y / safe_z, 0.0)
    if degenerate:
        log.warning("degenerate power recovery (z <= %g) for users %s", Z_FLOOR, degenerate)
    prices = prices_from_powers(inst, powers)
    objective = revenue_of_powers(inst, powers)

    if uniform_revenue is None:
        from .uniform import solve_uniform

        uniform_revenue = solve_uniform(inst).revenue
    ne = solve_ne(inst, prices)
    box, excess = check_original(inst, powers)
    feasible = box <= FEAS_RTOL * float(np.max(inst.p_max)) and excess <= FEAS_RTOL * inst.i_th
    report = VerificationReport(
        fixed_point_residual=float(np.max(np.abs(ne.powers - powers))),
        original_feasible=feasible,
        revenue_vs_uniform=objective - uniform_revenue,
        box_violation=box,
        interference_excess=excess,
        ne_converged=ne.converged,
        degenerate_users=degenerate,
    )
    if not report.exact:
        log.info(
            "differentiated recovery inexact: residual=%.3g box=%.3g excess=%.3g",
            report.fixed_point_residual, box, excess,
        )
    return DiffPricingResult(
        prices=prices,
        powers=powers,
        objective=objective,
        lp_status=sol.status,
        verification=report,
        lp_objective=sol.objective,
        mode=mode,
        lp_x=sol.x,
    )


def solve_suboptimal(inst: NetworkInstance) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form per-user prices assuming a g-proportional interference split
    and negligible co-tier interference. Returns ``(prices, powers)``."""
    h = inst.direct
    g_sum = float(np.sum(inst.g))
    share = inst.i_th / g_sum
    peak_fits = inst.i_th >= inst.p_max * g_sum
    target = np.where(peak_fits, inst.p_max, share)
    prices = inst.w * h / (inst.g * (target * h + inst.sigma2))
    powers = np.clip(inst.w / (inst.g * prices) - inst.sigma2 / h, 0.0, inst.p_max)
    return prices, powers
