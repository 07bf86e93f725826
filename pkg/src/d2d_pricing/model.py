"""Network data model, random topology generation and per-user metrics.

Channel convention: ``h[j, i]`` is the power gain from source ``j`` to
destination ``i``; ``h[i, i]`` is the direct link. ``g[i]`` is the gain from
source ``i`` to the base station. Powers are always linear, never dB.
"""

from __future__ import annotations

import json
import math
from functools import cached_property
from dataclasses import MISSING, asdict, dataclass, fields
from pathlib import Path
from typing import Any

import numpy as np

#: Generator family used by :func:`sample_network`; recorded in run metadata.
RNG_FAMILY = "numpy.random.PCG64"

MIN_DISTANCE = 1e-3


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def _frozen(a, ndim: int, name: str) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class NetworkInstance:
    """One channel realization of the D2D underlay network."""

    h: np.ndarray
    g: np.ndarray
    sigma2: float
    w: np.ndarray
    p_max: np.ndarray
    i_th: float

    def __post_init__(self):
        h = _frozen(self.h, 2, "h")
        n = h.shape[0]
        if h.shape != (n, n) or n < 1:
            raise ValueError(f"h must be a non-empty square matrix, got shape {h.shape}")
        object.__setattr__(self, "h", h)
        for name in ("g", "w", "p_max"):
            arr = _frozen(getattr(self, name), 1, name)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have length {n}, got {arr.shape[0]}")
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise ValueError(f"{name} entries must be finite and positive")
            object.__setattr__(self, name, arr)
        if not np.all(np.isfinite(h)) or np.any(h <= 0):
            raise ValueError("h entries must be finite and positive")
        for name in ("sigma2", "i_th"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be finite and positive, got {v}")
            object.__setattr__(self, name, v)

    @property
    def n(self) -> int:
        return self.h.shape[0]

    @property
    def direct(self) -> np.ndarray:
        """Direct gains ``h[i, i]``."""
        return np.diagonal(self.h)

    @cached_property
    def cross(self) -> np.ndarray:
        """``h`` with the diagonal zeroed (co-tier interference gains only)."""
        c = self.h.copy()
        np.fill_diagonal(c, 0.0)
        c.setflags(write=False)
        return c

    def replace(self, **changes) -> "NetworkInstance":
        kw = {f.name: getattr(self, f.name) for f in fields(self)}
        kw.update(changes)
        return NetworkInstance(**kw)

    @classmethod
    def uniform(cls, h, g, *, sigma2=1.0, w=1.0, p_max=10.0, i_th=1.0) -> "NetworkInstance":
        """Build an instance broadcasting scalar ``w``/``p_max`` to every user."""
        h = np.atleast_2d(np.asarray(h, dtype=float))
        n = h.shape[0]
        return cls(
            h=h,
            g=np.broadcast_to(np.asarray(g, dtype=float), (n,)),
            sigma2=sigma2,
            w=np.broadcast_to(np.asarray(w, dtype=float), (n,)),
            p_max=np.broadcast_to(np.asarray(p_max, dtype=float), (n,)),
            i_th=i_th,
        )


@dataclass(frozen=True)
class TopologyConfig:
    n: int
    p_max_db: float
    i_th: float
    seed: int
    cell_radius: float = 100.0
    pair_distance_max: float = 10.0
    path_loss_exponent: float = 2.0
    sigma2: float = 1.0
    weight: float = 1.0

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool) or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool):
            raise ValueError(f"seed must be an integer, got {self.seed!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        for name in ("cell_radius", "pair_distance_max", "path_loss_exponent", "sigma2", "weight", "i_th"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be a finite positive number, got {v!r}")
        if not isinstance(self.p_max_db, (int, float)) or not math.isfinite(self.p_max_db):
            raise ValueError(f"p_max_db must be finite, got {self.p_max_db!r}")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TopologyConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown topology fields: {sorted(unknown)}")
        missing = {f.name for f in fields(cls) if f.default is MISSING} - set(data)
        if missing:
            raise ValueError(f"missing topology fields: {sorted(missing)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "TopologyConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def replace(self, **changes) -> "TopologyConfig":
        return TopologyConfig(**{**self.to_dict(), **changes})


def _disk_points(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * np.pi * rng.random(n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


@dataclass(frozen=True, eq=False)
class Geometry:
    """Node positions of one realization; the BS sits at the origin."""

    sources: np.ndarray
    destinations: np.ndarray

    @property
    def pair_distances(self) -> np.ndarray:
        return np.linalg.norm(self.destinations - self.sources, axis=1)


def _draw(cfg: TopologyConfig) -> tuple[Geometry, NetworkInstance]:
    if not isinstance(cfg, TopologyConfig):
        raise TypeError("cfg must be a TopologyConfig")
    rng = np.random.Generator(np.random.PCG64(int(cfg.seed)))
    n = int(cfg.n)
    src = _disk_points(rng, n, cfg.cell_radius)
    # 1 - U maps [0, 1) onto (0, 1]
    pair_d = cfg.pair_distance_max * (1.0 - rng.random(n))
    phi = 2.0 * np.pi * rng.random(n)
    dst = src + np.column_stack([pair_d * np.cos(phi), pair_d * np.sin(phi)])

    dist = np.linalg.norm(src[:, None, :] - dst[None, :, :], axis=2)  # [source, destination]
    dist_bs = np.linalg.norm(src, axis=1)
    theta = cfg.path_loss_exponent
    h = rng.exponential(1.0, (n, n)) * np.maximum(dist, MIN_DISTANCE) ** (-theta)
    g = rng.exponential(1.0, n) * np.maximum(dist_bs, MIN_DISTANCE) ** (-theta)
    inst = NetworkInstance(
        h=h,
        g=g,
        sigma2=cfg.sigma2,
        w=np.full(n, float(cfg.weight)),
        p_max=np.full(n, db_to_linear(cfg.p_max_db)),
        i_th=cfg.i_th,
    )
    return Geometry(src, dst), inst


def sample_network(cfg: TopologyConfig) -> NetworkInstance:
    """Draw one network realization; a pure function of ``cfg``.

    Sources are uniform over the cell disk, and each destination lies at a
    uniform distance in ``(0, pair_distance_max]`` and a uniform angle from
    its source. Each gain is ``c * L**-theta`` with ``c`` a unit-mean
    exponential (Rayleigh power) variate; distances are floored at
    ``MIN_DISTANCE``.
    """
    return _draw(cfg)[1]


def sample_geometry(cfg: TopologyConfig) -> Geometry:
    """Positions behind :func:`sample_network` for the same ``cfg``."""
    return _draw(cfg)[0]


def _check_index(inst: NetworkInstance, i: int) -> int:
    if not -inst.n <= i < inst.n:
        raise IndexError(f"user index {i} out of range for {inst.n} users")
    return i % inst.n


def ipn_all(inst: NetworkInstance, p) -> np.ndarray:
    """Interference-plus-noise at every destination."""
    p = np.asarray(p, dtype=float)
    return p @ inst.cross + inst.sigma2


def ipn(inst: NetworkInstance, p, i: int) -> float:
    i = _check_index(inst, i)
    p = np.asarray(p, dtype=float)
    mask = np.arange(inst.n) != i
    return float(np.dot(p[mask], inst.h[mask, i]) + inst.sigma2)


def sinr_all(inst: NetworkInstance, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return p * inst.direct / ipn_all(inst, p)


def sinr(inst: NetworkInstance, p, i: int) -> float:
    i = _check_index(inst, i)
    return float(p[i] * inst.h[i, i] / ipn(inst, p, i))


def rates(inst: NetworkInstance, p) -> np.ndarray:
    """Achievable rates in nats."""
    return np.log1p(sinr_all(inst, p))


def rate(inst: NetworkInstance, p, i: int) -> float:
    return math.log1p(sinr(inst, p, i))


def payoffs(inst: NetworkInstance, p, prices) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return inst.w * rates(inst, p) - p * inst.g * np.asarray(prices, dtype=float)


def user_payoff(inst: NetworkInstance, p, prices, i: int) -> float:
    i = _check_index(inst, i)
    return float(inst.w[i] * rate(inst, p, i) - p[i] * inst.g[i] * prices[i])


def bs_revenue(inst: NetworkInstance, p, prices) -> float:
    return float(np.sum(np.asarray(p, dtype=float) * inst.g * np.asarray(prices, dtype=float)))


def total_interference(inst: NetworkInstance, p) -> float:
    return float(np.dot(np.asarray(p, dtype=float), inst.g))


@dataclass(frozen=True, eq=False)
class GameOutcome:
    """NE powers at given prices plus derived metrics."""

    powers: np.ndarray
    prices: np.ndarray
    rates: np.ndarray
    payoffs: np.ndarray
    revenue: float
    total_interference: float
    iterations: int = 0
    converged: bool = True

    @property
    def sum_rate(self) -> float:
        return float(np.sum(self.rates))

    @classmethod
    def evaluate(cls, inst: NetworkInstance, powers, prices, iterations=0, converged=True) -> "GameOutcome":
        powers = np.asarray(powers, dtype=float)
        prices = np.broadcast_to(np.asarray(prices, dtype=float), (inst.n,)).copy()
        return cls(
            powers=powers,
            prices=prices,
            rates=rates(inst, powers),
            payoffs=payoffs(inst, powers, prices),
            revenue=bs_revenue(inst, powers, prices),
            total_interference=total_interference(inst, powers),
            iterations=int(iterations),
            converged=bool(converged),
        )
