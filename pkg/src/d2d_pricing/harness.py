"""Scenario runner: seeded experiments written as CSV plus a metadata sidecar."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .differentiated import LpStatus, solve_optimal, solve_suboptimal
from .game import solve_ne
from .model import RNG_FAMILY, GameOutcome, NetworkInstance, TopologyConfig, db_to_linear, sample_network
from .uniform import price_lower_bound, price_upper_bound, solve_uniform, uniform_outcome

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


class SolverError(RuntimeError):
    pass


class Scenario(str, Enum):
    CONVERGENCE = "convergence"
    UNIFORM_SWEEP = "uniform_sweep"
    ACTIVE_USERS = "active_users_vs_price"
    COMPARE_SNR = "compare_snr"
    COMPARE_ITH = "compare_ith"


@dataclass(frozen=True)
class Sweep:
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        if not self.start < self.stop:
            raise ConfigError(f"sweep requires from < to, got {self.start} >= {self.stop}")
        if not isinstance(self.points, int) or self.points < 2:
            raise ConfigError(f"sweep.points must be an integer >= 2, got {self.points!r}")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"sweep.scale must be 'linear' or 'log', got {self.scale!r}")
        if self.scale == "log" and self.start <= 0:
            raise ConfigError("log sweep requires from > 0")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)

    def to_dict(self) -> dict[str, Any]:
        return {"from": self.start, "to": self.stop, "points": self.points, "scale": self.scale}


@dataclass(frozen=True)
class ScenarioConfig:
    """Declarative experiment description.

    For the price scenarios ``sweep`` is in units of the instance's upper
    price bound; ``compare_snr`` sweeps ``p_max_db`` and ``compare_ith``
    sweeps ``i_th``.
    """

    scenario: Scenario
    topology: TopologyConfig
    output_path: str
    trials: int = 1
    sweep: Sweep | None = None
    price_fraction: float = 0.1
    full_trials: int = 1000
    description: str = ""

    def __post_init__(self):
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be an integer >= 1, got {self.trials!r}")
        if self.scenario in (Scenario.UNIFORM_SWEEP, Scenario.ACTIVE_USERS, Scenario.COMPARE_SNR, Scenario.COMPARE_ITH):
            if self.sweep is None:
                raise ConfigError(f"scenario {self.scenario.value} requires a sweep")
        if not self.price_fraction > 0:
            raise ConfigError("price_fraction must be positive")
        if self.topology.seed + self.trials - 1 >= 2**64:
            raise ConfigError("trial seeds base_seed + k overflow 64 bits")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioConfig":
        data = dict(data)
        try:
            scenario = Scenario(data.pop("scenario"))
            topology = TopologyConfig.from_dict(data.pop("topology"))
            sweep = data.pop("sweep", None)
            if sweep is not None:
                sweep = dict(sweep)
                sweep = Sweep(sweep.pop("from"), sweep.pop("to"), sweep.pop("points"), **sweep)
            return cls(scenario=scenario, topology=topology, sweep=sweep, **data)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid scenario config: {exc}") from exc

    @classmethod
    def from_json(cls, path) -> "ScenarioConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc

    def to_dict(self) -> dict[str, Any]:
        d = {
            "scenario": self.scenario.value,
            "topology": self.topology.to_dict(),
            "output_path": self.output_path,
            "trials": self.trials,
            "price_fraction": self.price_fraction,
            "full_trials": self.full_trials,
            "description": self.description,
        }
        if self.sweep is not None:
            d["sweep"] = self.sweep.to_dict()
        return d

    def with_overrides(self, seed: int | None = None, trials: int | None = None) -> "ScenarioConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, topology=cfg.topology.replace(seed=seed))
        if trials is not None:
            cfg = replace(cfg, trials=trials)
        return cfg

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


# ---------------------------------------------------------------------------
# presets


def preset_names() -> list[str]:
    files = resources.files("d2d_pricing") / "presets"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> ScenarioConfig:
    path = resources.files("d2d_pricing") / "presets" / f"{name}.json"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return ScenarioConfig.from_dict(json.loads(path.read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# output helpers


def fmt(value) -> str:
    """Shortest round-trip text for floats, plain text otherwise."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


@dataclass
class Table:
    header: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)

    def write(self, path: Path) -> None:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(self.header)
                writer.writerows([fmt(v) for v in row] for row in self.rows)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc


def check_outcome(inst: NetworkInstance, out: GameOutcome) -> None:
    """Recompute revenue and interference; raise if the outcome disagrees."""
    interference = float(np.sum(out.powers * inst.g))
    revenue = float(np.sum(out.powers * inst.g * out.prices))
    for name, got, want in (("interference", out.total_interference, interference), ("revenue", out.revenue, revenue)):
        if not math.isclose(got, want, rel_tol=1e-12, abs_tol=1e-300):
            raise SolverError(f"GameOutcome {name} {got!r} disagrees with recomputation {want!r}")


# ---------------------------------------------------------------------------
# scenarios


def run_convergence(cfg: ScenarioConfig) -> Table:
    inst = sample_network(cfg.topology)
    price = cfg.price_fraction * price_upper_bound(inst)
    table = Table(["init", "iteration", "user", "power"])
    finals = {}
    for label, p0 in (("zero", np.zeros(inst.n)), ("peak", inst.p_max.copy())):
        ne = solve_ne(inst, price, p0=p0, record=True)
        if not ne.converged:
            raise SolverError(f"NE iteration from {label} start did not converge (residual {ne.residual:.3g})")
        for t, p in enumerate(ne.trajectory):
            table.rows.extend([label, t, i + 1, float(p[i])] for i in range(inst.n))
        finals[label] = ne
        check_outcome(inst, GameOutcome.evaluate(inst, ne.powers, price, ne.iterations, ne.converged))
    table.extra = {
        "price": price,
        "iterations": {k: v.iterations for k, v in finals.items()},
        "max_final_gap": float(np.max(np.abs(finals["zero"].powers - finals["peak"].powers))),
    }
    return table


def _price_grid(cfg: ScenarioConfig, inst: NetworkInstance) -> np.ndarray:
    return cfg.sweep.values() * price_upper_bound(inst)


def run_uniform_sweep(cfg: ScenarioConfig) -> Table:
    inst = sample_network(cfg.topology)
    table = Table(["price", "revenue", "interference"] + [f"p_{i + 1}" for i in range(inst.n)])
    for price in _price_grid(cfg, inst):
        out = uniform_outcome(inst, float(price))
        if not out.converged:
            raise SolverError(f"NE iteration did not converge at price {price!r}")
        check_outcome(inst, out)
        table.rows.append([float(price), out.revenue, out.total_interference, *map(float, out.powers)])
    table.extra = {"price_upper_bound": price_upper_bound(inst), "price_lower_bound": price_lower_bound(inst)}
    return table


def run_active_users(cfg: ScenarioConfig) -> Table:
    inst = sample_network(cfg.topology)
    table = Table(["price", "active_users"])
    for price in _price_grid(cfg, inst):
        out = uniform_outcome(inst, float(price))
        if not out.converged:
            raise SolverError(f"NE iteration did not converge at price {price!r}")
        table.rows.append([float(price), int(np.count_nonzero(out.powers > 0))])
    table.extra = {"price_upper_bound": price_upper_bound(inst), "price_lower_bound": price_lower_bound(inst)}
    return table


SCHEMES = ("uniform", "optimal", "suboptimal")
METRICS = ("sum_rate", "revenue")


def _compare_trial(args) -> dict[str, Any]:
    topology, x_name, xs = args
    result = {"seed": topology.seed, "values": [], "error": None}
    try:
        base = sample_network(topology)
        for x in xs:
            inst = base.replace(p_max=np.full(base.n, db_to_linear(x))) if x_name == "p_max_db" else base.replace(i_th=float(x))
            uni = solve_uniform(inst)
            if not uni.outcome.converged:
                raise SolverError("NE iteration did not converge in the uniform sweep")
            check_outcome(inst, uni.outcome)
            opt = solve_optimal(inst, uniform_revenue=uni.revenue)
            if opt.lp_status is not LpStatus.OPTIMAL or opt.degenerate:
                raise SolverError(f"LP status {opt.lp_status.value}, degenerate users {opt.verification and opt.verification.degenerate_users}")
            opt_out = GameOutcome.evaluate(inst, opt.powers, opt.prices)
            sub_prices, sub_powers = solve_suboptimal(inst)
            sub_out = GameOutcome.evaluate(inst, sub_powers, sub_prices)
            for out in (opt_out, sub_out):
                check_outcome(inst, out)
            result["values"].append(
                {
                    "uniform": (uni.outcome.sum_rate, uni.revenue),
                    "optimal": (opt_out.sum_rate, opt_out.revenue),
                    "suboptimal": (sub_out.sum_rate, sub_out.revenue),
                    "lp_objective": opt.lp_objective,
                }
            )
    except SolverError as exc:
        result["error"] = str(exc)
        result["values"] = []
    return result


def run_comparison(cfg: ScenarioConfig, jobs: int = 1) -> Table:
    x_name = "p_max_db" if cfg.scenario is Scenario.COMPARE_SNR else "i_th"
    xs = [float(x) for x in cfg.sweep.values()]
    tasks = [(cfg.topology.replace(seed=cfg.topology.seed + k), x_name, xs) for k in range(cfg.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_compare_trial, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_compare_trial(t) for t in tasks]

    header = ["record", x_name, "scheme", "metric", "trial", "seed", "value", "count", "excluded"]
    table = Table(header)
    excluded = []
    for k, res in enumerate(results):
        if res["error"] is not None:
            log.warning("trial %d (seed %d) excluded: %s", k, res["seed"], res["error"])
            excluded.append({"trial": k, "seed": res["seed"], "reason": res["error"]})
    good = [(k, r) for k, r in enumerate(results) if r["error"] is None]
    for j, x in enumerate(xs):
        for scheme in SCHEMES:
            for m, metric in enumerate(METRICS):
                for k, res in good:
                    table.rows.append(["trial", x, scheme, metric, k, res["seed"], res["values"][j][scheme][m], "", ""])
                vals = [res["values"][j][scheme][m] for _, res in good]
                mean = float(np.mean(vals)) if vals else float("nan")
                table.rows.append(["mean", x, scheme, metric, "", "", mean, len(vals), len(excluded)])
    table.extra = {"excluded_trials": excluded}
    return table


RUNNERS = {
    Scenario.CONVERGENCE: run_convergence,
    Scenario.UNIFORM_SWEEP: run_uniform_sweep,
    Scenario.ACTIVE_USERS: run_active_users,
    Scenario.COMPARE_SNR: run_comparison,
    Scenario.COMPARE_ITH: run_comparison,
}


def metadata(cfg: ScenarioConfig, table: Table) -> dict[str, Any]:
    return {
        "scenario": cfg.scenario.value,
        "seed": cfg.topology.seed,
        "trial_seeds": "base_seed + k" if cfg.scenario in (Scenario.COMPARE_SNR, Scenario.COMPARE_ITH) else "base_seed",
        "trials": cfg.trials,
        "rng": {"family": RNG_FAMILY, "numpy": np.__version__},
        "package_version": __version__,
        "config_hash": cfg.config_hash(),
        "config": cfg.to_dict(),
        "rows": len(table.rows),
        "summary": table.extra,
    }


def run_scenario(cfg: ScenarioConfig, out_dir: Path | str | None = None, jobs: int = 1) -> tuple[Path, Path]:
    """Run ``cfg`` and write ``<output_path>`` plus ``<output_path>.meta.json``."""
    runner = RUNNERS[cfg.scenario]
    table = runner(cfg, jobs=jobs) if runner is run_comparison else runner(cfg)
    out = Path(cfg.output_path)
    if out_dir is not None:
        out = Path(out_dir) / out.name
    table.write(out)
    meta_path = out.with_name(out.name + ".meta.json")
    try:
        meta_path.write_text(json.dumps(metadata(cfg, table), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {meta_path}: {exc}") from exc
    return out, meta_path
