"""User-level power control subgame: best responses and the Jacobi NE iteration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import NetworkInstance, _check_index, ipn, ipn_all

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True, eq=False)
class NeResult:
    powers: np.ndarray
    iterations: int
    converged: bool
    residual: float
    trajectory: list[np.ndarray] | None = None


def _as_prices(inst: NetworkInstance, prices) -> np.ndarray:
    pi = np.broadcast_to(np.asarray(prices, dtype=float), (inst.n,))
    if np.any(pi < 0) or not np.all(np.isfinite(pi)):
        raise ValueError("prices must be finite and nonnegative")
    return pi


def _target(inst: NetworkInstance, pi: np.ndarray, i=slice(None)) -> np.ndarray:
    # zero price: payoff strictly increasing in own power, so transmit at peak
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(pi[i] > 0, inst.w[i] / (inst.g[i] * pi[i]), np.inf)


def _response(inst: NetworkInstance, interference: np.ndarray, pi: np.ndarray, i=slice(None)) -> np.ndarray:
    return np.clip(_target(inst, pi, i) - interference / inst.direct[i], 0.0, inst.p_max[i])


def _iterate(inst: NetworkInstance, pi: np.ndarray, p: np.ndarray, tol: float, max_iter: int, traj=None):
    """Jacobi loop on validated inputs. Returns (powers, iterations, residual)."""
    target, direct, cross, sigma2, p_max = _target(inst, pi), inst.direct, inst.cross, inst.sigma2, inst.p_max
    residual = np.inf
    it = 0
    while it < max_iter:
        nxt = np.clip(target - (p @ cross + sigma2) / direct, 0.0, p_max)
        residual = float(np.max(np.abs(nxt - p)))
        p = nxt
        it += 1
        if traj is not None:
            traj.append(p.copy())
        if residual <= tol:
            break
    return p, it, residual


def best_response(inst: NetworkInstance, p, prices, i: int) -> float:
    """Payoff-maximizing power of user ``i`` against the others' powers ``p``."""
    i = _check_index(inst, i)
    pi = _as_prices(inst, prices)
    return float(_response(inst, np.asarray(ipn(inst, p, i)), pi, i))


def best_response_map(inst: NetworkInstance, p, prices) -> np.ndarray:
    """Simultaneous best response of every user against the same input ``p``."""
    pi = _as_prices(inst, prices)
    return _response(inst, ipn_all(inst, p), pi)


def solve_ne(
    inst: NetworkInstance,
    prices,
    p0=None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    record: bool = False,
) -> NeResult:
    """Iterate ``p <- B(p)`` until the sup-norm update drops to ``tol``.

    Returns ``converged=False`` rather than raising when ``max_iter`` is hit.
    With ``record=True`` the returned ``trajectory`` holds every iterate,
    starting with ``p0``.
    """
    pi = _as_prices(inst, prices)
    p = np.zeros(inst.n) if p0 is None else np.array(p0, dtype=float)
    if p.shape != (inst.n,):
        raise ValueError(f"p0 must have length {inst.n}")
    if np.any(p < 0) or np.any(p > inst.p_max):
        raise ValueError("p0 must lie in the box [0, p_max]")
    traj = [p.copy()] if record else None
    p, it, residual = _iterate(inst, pi, p, tol, max_iter, traj)
    return NeResult(powers=p, iterations=it, converged=residual <= tol, residual=residual, trajectory=traj)
