"""Experiment runner: JSON config in, one CSV row per (n, budget, repetition, algorithm) out."""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import algorithms as alg
from .adaptive import AdaptiveRevenueModel, DiscretePrior, LomaxPrior
from .core import derive_seed, make_instance, make_rng
from .instances import (
    GenSpec,
    gen_er_graph,
    load_categories_csv,
    load_costs_csv,
    load_edge_list,
    load_ratings_csv,
    load_tag_csv,
    sample_costs_uniform,
    tag_similarity,
)
from .objectives import CutObjective, RevenueObjective, VideoRecObjective

log = logging.getLogger(__name__)

EXPERIMENTS = ("movielens-rec", "er-cut", "revenue-adaptive", "custom")
ALGORITHMS = ("sample_greedy", "density_greedy", "greedy", "best_singleton",
              "adaptive_greedy", "brute_force")
RANDOMIZED = ("sample_greedy", "adaptive_greedy")


class ConfigError(ValueError):
    pass


def budget_schedule(kind: str, lo: float, hi: float, steps: int) -> list[float]:
    """Budget fractions from ``lo`` to ``hi`` inclusive; only ``geometric`` is supported."""
    if kind != "geometric":
        raise ValueError(f"unknown schedule {kind!r}")
    if not (0 < lo <= hi <= 1) or steps < 1:
        raise ValueError("need 0 < lo <= hi <= 1 and steps >= 1")
    if steps == 1 or lo == hi:
        return [float(lo)] if steps == 1 else [float(lo)] * steps
    vals = np.geomspace(lo, hi, steps)
    vals[0], vals[-1] = lo, hi
    return [float(v) for v in vals]


# --------------------------------------------------------------------------- #
# configuration
# --------------------------------------------------------------------------- #

_PRESETS = {
    "er-cut": dict(
        instance={"n": [100], "edge_prob": 0.2},
        budgets=[0.15],
        repetitions=10,
        algorithms=[{"name": "sample_greedy", "p": "experimental"},
                    {"name": "density_greedy"}, {"name": "greedy"}],
    ),
    "revenue-adaptive": dict(
        instance={"n": [200], "edge_prob": "5/sqrt(n)", "cost_dist": "degree"},
        budgets=[0.10],
        repetitions=10,
        algorithms=[{"name": "adaptive_greedy", "p": "experimental", "p0": 0.0},
                    {"name": "density_greedy"}, {"name": "greedy"}],
    ),
    "movielens-rec": dict(
        instance={"lam": 3.0, "mu": 7.0, "alpha": "auto", "beta": "auto"},
        budgets={"geometric": [0.01, 0.1, 10]},
        repetitions=5,
        algorithms=[{"name": "sample_greedy", "p": "experimental"},
                    {"name": "density_greedy"}, {"name": "greedy"}],
    ),
    "custom": dict(
        instance={"objective": "cut"},
        budgets=[0.1],
        repetitions=1,
        algorithms=[{"name": "sample_greedy", "p": "experimental"}],
    ),
}


@dataclass
class ExperimentConfig:
    experiment: str
    instance: dict = field(default_factory=dict)
    algorithms: list = field(default_factory=list)
    budgets: list = field(default_factory=list)
    repetitions: int = 1
    best_of: int = 5
    epsilon_lazy: float = 0.01
    lazy: bool = True
    seed: int = 0
    output: str | None = None
    threads: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        exp = d.get("experiment")
        if exp not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {exp!r}")
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        preset = _PRESETS[exp]
        merged = {k: v for k, v in preset.items() if k != "instance"}
        merged.update({k: v for k, v in d.items() if k != "instance"})
        merged["instance"] = {**preset["instance"], **d.get("instance", {})}
        try:
            cfg = cls(**merged)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        return cls.from_dict(data)

    def validate(self) -> None:
        b = self.budgets
        if isinstance(b, dict):
            if set(b) != {"geometric"} or len(b["geometric"]) != 3:
                raise ConfigError("budgets must be a list or {'geometric': [lo, hi, steps]}")
            try:
                self.budgets = budget_schedule("geometric", *b["geometric"])
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"budgets: {exc}") from None
        if not self.budgets or any(not isinstance(x, (int, float)) or not 0 < x <= 1
                                   for x in self.budgets):
            raise ConfigError("budgets must be fractions in (0, 1]")
        self.budgets = [float(x) for x in self.budgets]
        for name, val, lo in (("repetitions", self.repetitions, 1), ("best_of", self.best_of, 1),
                              ("threads", self.threads, 1)):
            if not isinstance(val, int) or val < lo:
                raise ConfigError(f"{name} must be an integer >= {lo}")
        if not 0 < float(self.epsilon_lazy) < 1:
            raise ConfigError("epsilon_lazy must lie in (0, 1)")
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer")
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        labels = set()
        for a in self.algorithms:
            if not isinstance(a, dict) or a.get("name") not in ALGORITHMS:
                raise ConfigError(f"algorithm entries need a name in {ALGORITHMS}: {a!r}")
            if a["name"] == "adaptive_greedy" and self.experiment != "revenue-adaptive":
                raise ConfigError("adaptive_greedy needs the revenue-adaptive experiment")
            _p_spec(a)
            label = _label(a)
            if label in labels:
                raise ConfigError(f"duplicate algorithm label {label!r}")
            labels.add(label)
        inst = self.instance
        if self.experiment in ("er-cut", "revenue-adaptive"):
            ns = inst.get("n")
            if isinstance(ns, dict):
                if set(ns) != {"geometric"}:
                    raise ConfigError("instance.n must be a list or {'geometric': [lo, hi, steps]}")
                lo, hi, steps = ns["geometric"]
                ns = sorted({int(round(x)) for x in np.geomspace(lo, hi, steps)})
            if isinstance(ns, int):
                ns = [ns]
            if not ns or any(not isinstance(x, int) or x < 1 for x in ns):
                raise ConfigError("instance.n must hold positive integers")
            inst["n"] = list(ns)
        if self.experiment == "movielens-rec" and "tags_csv" not in inst:
            raise ConfigError("movielens-rec needs instance.tags_csv")
        if self.experiment == "custom" and "edge_list" not in inst:
            raise ConfigError("custom needs instance.edge_list")

    def to_dict(self) -> dict:
        return asdict(self)


def _label(a: dict) -> str:
    if "label" in a:
        return str(a["label"])
    return a["name"]


def _p_spec(a: dict):
    p = a.get("p", "experimental" if a["name"] in RANDOMIZED else None)
    if a["name"] not in RANDOMIZED:
        return None
    if p == "experimental":
        return "experimental"
    if p == "theory":
        return "theory"
    if isinstance(p, dict) and set(p) == {"large_instance"}:
        return p
    if isinstance(p, (int, float)) and 0 < p <= 1:
        return float(p)
    raise ConfigError(f"bad p for {a['name']}: {p!r}")


# --------------------------------------------------------------------------- #
# results
# --------------------------------------------------------------------------- #

@dataclass
class ResultRow:
    experiment: str
    algorithm: str
    n: int
    budget_fraction: float
    repetition: int
    value: float
    singleton_value: float
    oracle_calls: int
    wall_time_ms: float
    seed: int


ROW_FIELDS = [f.name for f in fields(ResultRow)]
_ROW_TYPES = {"n": int, "repetition": int, "oracle_calls": int, "seed": int,
              "budget_fraction": float, "value": float, "singleton_value": float,
              "wall_time_ms": float}


def _fmt(x):
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def write_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROW_FIELDS)
        for r in rows:
            w.writerow([_fmt(getattr(r, k)) for k in ROW_FIELDS])


def read_csv(path) -> list[ResultRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ROW_FIELDS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [ResultRow(**{k: _ROW_TYPES.get(k, str)(v) for k, v in rec.items()})
                for rec in reader]


AGG_FIELDS = ["experiment", "algorithm", "n", "budget_fraction", "runs", "value_mean",
              "value_std", "singleton_value_mean", "oracle_calls_mean", "oracle_calls_std",
              "wall_time_ms_mean"]


def aggregate(rows) -> list[dict]:
    """Mean and standard deviation over repetitions for each setting."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.experiment, r.algorithm, r.n, r.budget_fraction), []).append(r)
    out = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], k[2], k[3])):
        g = groups[key]
        vals = np.array([r.value for r in g])
        calls = np.array([r.oracle_calls for r in g], dtype=float)
        ddof = 1 if len(g) > 1 else 0
        out.append(dict(zip(AGG_FIELDS, [
            *key, len(g), vals.mean(), vals.std(ddof=ddof),
            float(np.mean([r.singleton_value for r in g])), calls.mean(), calls.std(ddof=ddof),
            float(np.mean([r.wall_time_ms for r in g]))])))
    return out


def write_aggregate(agg, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGG_FIELDS)
        for rec in agg:
            w.writerow([_fmt(rec[k]) for k in AGG_FIELDS])


# --------------------------------------------------------------------------- #
# instance construction
# --------------------------------------------------------------------------- #

def _edge_prob(spec, n):
    if isinstance(spec, (int, float)):
        return float(spec)
    if spec == "5/sqrt(n)":
        return min(1.0, 5.0 / math.sqrt(n))
    raise ConfigError(f"unsupported edge_prob {spec!r}")


def _prior(spec):
    if spec is None:
        return LomaxPrior()
    if "lomax" in spec:
        return LomaxPrior(*spec["lomax"])
    if "discrete" in spec:
        return DiscretePrior(*spec["discrete"])
    raise ConfigError(f"unsupported prior {spec!r}")


@dataclass
class _Built:
    oracle: object
    costs: np.ndarray
    model: AdaptiveRevenueModel | None = None
    omega: object = None


def _build(cfg: ExperimentConfig, n: int | None, inst_seed: int) -> _Built:
    spec = cfg.instance
    exp = cfg.experiment
    if exp == "er-cut":
        g, costs = gen_er_graph(GenSpec(n, _edge_prob(spec.get("edge_prob", 0.2), n),
                                        cost_dist=spec.get("cost_dist", "uniform"),
                                        seed=inst_seed))
        return _Built(CutObjective(g), costs)
    if exp == "revenue-adaptive":
        g, costs = gen_er_graph(GenSpec(n, _edge_prob(spec.get("edge_prob", "5/sqrt(n)"), n),
                                        cost_dist=spec.get("cost_dist", "degree"),
                                        seed=inst_seed))
        model = AdaptiveRevenueModel(g, _prior(spec.get("prior")))
        omega = model.sample_realization(make_rng(derive_seed(inst_seed, 1)))
        expected = RevenueObjective(g, np.full(n, model.prior.mean))
        return _Built(expected, costs, model, omega)
    if exp == "movielens-rec":
        items, _, tags = load_tag_csv(spec["tags_csv"])
        g = tag_similarity(tags)
        n = g.n
        ratings = (load_ratings_csv(spec["ratings_csv"], n) if spec.get("ratings_csv")
                   else np.ones(n))
        cats = load_categories_csv(spec["categories_csv"]) if spec.get("categories_csv") else ()
        alpha, beta = spec.get("alpha", "auto"), spec.get("beta", "auto")
        if alpha == "auto" or beta == "auto":
            # make the rating term and the coverage term comparable per item
            alpha = 1.0
            dm = float(g.degree.mean()) if n else 0.0
            beta = float(ratings.mean()) / dm if dm > 0 else 1.0
        obj = VideoRecObjective(g, ratings, cats, lam=spec.get("lam", 3.0),
                                mu=spec.get("mu", 7.0), alpha=alpha, beta=beta)
        costs = (load_costs_csv(spec["costs_csv"], n) if spec.get("costs_csv")
                 else sample_costs_uniform(n, inst_seed))
        return _Built(obj, costs)
    # custom
    g = load_edge_list(spec["edge_list"], seed=inst_seed)
    costs = (load_costs_csv(spec["costs_csv"], g.n) if spec.get("costs_csv")
             else sample_costs_uniform(g.n, inst_seed))
    kind = spec.get("objective", "cut")
    if kind == "cut":
        obj = CutObjective(g)
    elif kind == "revenue":
        obj = RevenueObjective(g, np.asarray(spec.get("coeffs", np.ones(g.n)), dtype=float))
    elif kind == "videorec":
        obj = VideoRecObjective(g, np.asarray(spec.get("ratings", np.ones(g.n))),
                                lam=spec.get("lam", 3.0), mu=spec.get("mu", 7.0),
                                alpha=spec.get("alpha", 1.0), beta=spec.get("beta", 1.0))
    else:
        raise ConfigError(f"unknown objective {kind!r}")
    return _Built(obj, costs)


# --------------------------------------------------------------------------- #
# running
# --------------------------------------------------------------------------- #

def _sample_params(p):
    if p == "experimental":
        return alg.SampleGreedyParams.experimental()
    if p == "theory":
        return alg.SampleGreedyParams.theory()
    if isinstance(p, dict):
        return alg.SampleGreedyParams.large_instance(p["large_instance"])
    return alg.SampleGreedyParams(p=p)


def _adaptive_params(a, p):
    p0 = float(a.get("p0", 0.0))
    if p == "experimental":
        return alg.AdaptiveParams(p0, 0.95, experimental=True)
    if p == "theory":
        return alg.AdaptiveParams.guarantee()
    if isinstance(p, dict):
        return alg.AdaptiveParams.large_instance(p["large_instance"])
    return alg.AdaptiveParams(p0, p)


def _run_one(cfg, a, inst, built, seed):
    """One (possibly best-of) run; returns (value, singleton, calls, seed used)."""
    name = a["name"]
    lazy = alg.LazyParams(cfg.epsilon_lazy) if a.get("lazy", cfg.lazy) else None
    realized = built.model is not None

    def score(sol):
        if realized and name != "adaptive_greedy":
            return built.model.realized_value(sol.items, built.omega)
        return sol.value

    if name in ("density_greedy", "greedy"):
        mode = "density" if name == "density_greedy" else "value"
        sol = alg.baseline_greedy(inst, built.oracle, mode, seed=seed, lazy=lazy)
        return score(sol), sol.singleton_value or 0.0, sol.oracle_calls, seed
    if name == "best_singleton":
        sol = alg.best_singleton(inst, built.oracle)
        return score(sol), sol.value, sol.oracle_calls, seed
    if name == "brute_force":
        sol = alg.brute_force_opt(inst, built.oracle)
        return score(sol), 0.0, sol.oracle_calls, seed
    p = _p_spec(a)
    best, total_calls = None, 0
    for k in range(cfg.best_of):
        s = derive_seed(seed, k)
        if name == "sample_greedy":
            params = _sample_params(p)
            if lazy is None:
                sol = alg.sample_greedy(inst, built.oracle, params, seed=s)
            else:
                sol = alg.lazy_sample_greedy(inst, built.oracle, params, lazy, seed=s)
        else:
            sol = alg.adaptive_greedy(inst, built.model, _adaptive_params(a, p), built.omega,
                                      seed=s, lazy=lazy)
        total_calls += sol.oracle_calls
        cand = (score(sol), sol.singleton_value or 0.0, s)
        if best is None or cand[0] > best[0]:
            best = cand
    return best[0], best[1], total_calls, best[2]


def _unit(cfg: ExperimentConfig, n_idx: int, n, rep: int) -> list[ResultRow]:
    inst_seed = derive_seed(cfg.seed, n_idx, rep)
    built = _build(cfg, n, inst_seed)
    total = float(np.sum(built.costs))
    rows = []
    for b_idx, frac in enumerate(cfg.budgets):
        B = frac * total
        inst, oracle = make_instance(built.costs, B, built.oracle)
        sub = _Built(oracle, inst.costs, built.model, built.omega)
        if built.model is not None and inst.n != built.model.n:
            raise ConfigError("budget too small: some buyers cost more than the budget")
        for a_idx, a in enumerate(cfg.algorithms):
            seed = derive_seed(cfg.seed, n_idx, rep, b_idx, a_idx)
            t0 = time.perf_counter()
            value, single, calls, used = _run_one(cfg, a, inst, sub, seed)
            ms = (time.perf_counter() - t0) * 1e3
            rows.append(ResultRow(cfg.experiment, _label(a), int(built.costs.size), frac, rep,
                                  float(value), float(single), int(calls), ms, int(used)))
    return rows


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """Run every (n, repetition) unit, optionally on a thread pool.

    Output order and values depend only on the config, never on scheduling.
    """
    ns = cfg.instance.get("n", [None])
    units = [(i, n, rep) for i, n in enumerate(ns) for rep in range(cfg.repetitions)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as ex:
            parts = list(ex.map(lambda u: _unit(cfg, *u), units))
    else:
        parts = [_unit(cfg, *u) for u in units]
    return [r for part in parts for r in part]


def save_run(cfg: ExperimentConfig, rows, path) -> None:
    """Write rows and echo the resolved config next to them."""
    path = Path(path)
    write_csv(rows, path)
    with open(path.with_suffix(path.suffix + ".config.json"), "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
