"""Randomized greedy solvers for submodular maximization under a knapsack.

Randomness: each run builds one PCG64 stream from its ``seed``.  Draw order
is fixed: the acceptance probability first when it is sampled per run, then
(adaptive only) the singleton-vs-greedy coin when ``0 < p0 < 1``, then one
uniform per *considered* item, in consideration order.  Ties in every argmax
go to the lowest item id.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .adaptive import AdaptiveOracle, PartialRealization, Realization
from .core import (
    POSITIVE_TOL,
    CapacityError,
    KnapsackInstance,
    Solution,
    ValueOracle,
    bernoulli,
    counting,
    derive_seed,
    make_rng,
)

_RTOL = 1e-12
THEORY_P = math.sqrt(2.0) - 1.0


def _fits(cost, remaining, budget):
    return cost <= remaining + _RTOL * budget


# --------------------------------------------------------------------------- #
# parameters
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class SampleGreedyParams:
    """Acceptance probability policy.

    ``fixed`` uses ``p`` (default sqrt(2) - 1); ``large_instance`` uses
    ``(1 - delta) / 2``; ``experimental`` draws ``p ~ U[0.9, 1]`` once per run.
    """

    p: float = THEORY_P
    mode: str = "fixed"
    delta: float | None = None

    def __post_init__(self):
        if self.mode not in ("fixed", "large_instance", "experimental"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "large_instance":
            if self.delta is None or not 0 < self.delta < 0.5:
                raise ValueError("large_instance mode needs delta in (0, 1/2)")
            object.__setattr__(self, "p", (1.0 - self.delta) / 2.0)
        if not 0 < self.p <= 1:
            raise ValueError("p must lie in (0, 1]")

    @classmethod
    def theory(cls):
        return cls()

    @classmethod
    def large_instance(cls, delta: float):
        return cls(mode="large_instance", delta=delta)

    @classmethod
    def experimental(cls):
        return cls(mode="experimental")

    def draw(self, rng: np.random.Generator) -> float:
        if self.mode == "experimental":
            return 0.9 + 0.1 * float(rng.random())
        return self.p


@dataclass(frozen=True)
class LazyParams:
    epsilon: float = 0.01

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")

    @property
    def epsilon_prime(self) -> float:
        return self.epsilon / 6.0

    def update_cap(self, n: int) -> int:
        ep = self.epsilon_prime
        return math.ceil(math.log2(max(n, 1) / ep) / ep)


@dataclass(frozen=True)
class AdaptiveParams:
    """``p0``: probability of returning the best expected singleton outright;
    ``p``: acceptance probability of each considered item."""

    p0: float = 1.0 / 6.0
    p: float = 1.0 / 3.0
    experimental: bool = False

    def __post_init__(self):
        if not 0 <= self.p0 <= 1:
            raise ValueError("p0 must lie in [0, 1]")
        if not 0 < self.p <= 1:
            raise ValueError("p must lie in (0, 1]")

    @classmethod
    def guarantee(cls):
        return cls(1.0 / 6.0, 1.0 / 3.0)

    @classmethod
    def large_instance(cls, delta: float):
        if not 0 < delta < 0.5:
            raise ValueError("delta must lie in (0, 1/2)")
        return cls(0.0, (math.sqrt(3.0 - 2.0 * delta) - 1.0) / 2.0)

    @classmethod
    def experimental_range(cls):
        return cls(0.0, 0.95, experimental=True)

    def draw(self, rng):
        if self.experimental:
            return 0.9 + 0.1 * float(rng.random())
        return self.p


# --------------------------------------------------------------------------- #
# helpers
# --------------------------------------------------------------------------- #

def _singletons(inst, oracle):
    return np.array([oracle.evaluate((i,)) for i in range(inst.n)], dtype=float)


def _argmax_low(values: np.ndarray) -> int:
    # np.argmax returns the first maximum, i.e. the lowest id
    return int(np.argmax(values))


def _finish(inst, oracle, start_calls, seed, S, singles, fallback, p, trace, info):
    S = frozenset(int(i) for i in S)
    gval = oracle.evaluate(S) if S else 0.0
    if singles.size:
        istar = _argmax_low(singles)
        sval = float(singles[istar])
    else:
        istar, sval = None, None
    items, value = S, gval
    if fallback and istar is not None and sval > gval:
        items, value = frozenset([istar]), sval
    return Solution(items=items, value=float(value), oracle_calls=oracle.calls - start_calls,
                    seed=seed, greedy_items=S, greedy_value=float(gval),
                    singleton_value=sval, p=p, trace=tuple(trace), info=info)


def _plain_loop(costs, B, singles, gains_fn, add_fn, p, rng, by="density"):
    """Greedy consideration loop; gains are re-queried only after an addition."""
    gains = singles.copy()
    alive = (gains > POSITIVE_TOL) & (costs <= B)
    R = B
    S, trace, coins = [], [], []
    stale = False
    while True:
        if stale:
            alive &= costs <= R + _RTOL * B
            ids = np.flatnonzero(alive)
            if ids.size:
                gains[ids] = gains_fn(ids)
            stale = False
        alive &= gains > POSITIVE_TOL
        F = np.flatnonzero(alive)
        if F.size == 0:
            break
        score = gains[F] / costs[F] if by == "density" else gains[F]
        i = int(F[_argmax_low(score)])
        r = bernoulli(rng, p)
        trace.append(i)
        coins.append(r)
        if r:
            add_fn(i)
            S.append(i)
            R -= costs[i]
            stale = True
        alive[i] = False
    return S, trace, {"coins": coins}


def _lazy_loop(costs, B, singles, gain_fn, add_fn, p, rng, lazy, by="density"):
    """Lazy-evaluation variant of :func:`_plain_loop` on a max-heap of stale keys."""
    n = costs.size
    eps = lazy.epsilon_prime
    cap = lazy.update_cap(n)

    def key_of(g, i):
        return g / costs[i] if by == "density" else g

    # one heap entry per live item at all times, so no stale entries to skip
    heap = [(-key_of(singles[i], i), i) for i in range(n) if singles[i] > POSITIVE_TOL]
    heapq.heapify(heap)
    version = 0
    key_version = np.zeros(n, dtype=np.int64)
    updates = np.zeros(n, dtype=np.int64)
    R = B
    S, trace, coins, keys, discarded = [], [], [], [], []
    while heap:
        negkey, i = heapq.heappop(heap)
        if not _fits(costs[i], R, B):
            continue
        key = -negkey
        if key_version[i] != version:
            g = gain_fn(i)
            updates[i] += 1
            if g <= POSITIVE_TOL:
                continue
            fresh = key_of(g, i)
            if fresh < key / (1.0 + eps):
                if updates[i] >= cap:
                    discarded.append(i)
                    continue
                key_version[i] = version
                heapq.heappush(heap, (-fresh, i))
                continue
            key = fresh
        r = bernoulli(rng, p)
        trace.append(i)
        coins.append(r)
        keys.append(key)
        if r:
            add_fn(i)
            S.append(i)
            R -= costs[i]
            version += 1
    info = {"coins": coins, "keys": keys, "discarded": discarded, "update_cap": cap,
            "updates": updates}
    return S, trace, info


def _run_deterministic_oracle(inst, oracle, p, rng, seed, *, by="density", fallback=True,
                              lazy=None):
    oracle = counting(oracle)
    start = oracle.calls
    singles = _singletons(inst, oracle)
    state = oracle.gain_state()
    if lazy is None:
        S, trace, info = _plain_loop(inst.costs, inst.budget, singles, state.gains,
                                     state.add, p, rng, by)
    else:
        S, trace, info = _lazy_loop(inst.costs, inst.budget, singles, state.gain,
                                    state.add, p, rng, lazy, by)
    return _finish(inst, oracle, start, seed, S, singles, fallback, p, trace, info)


def _seed_rng(seed):
    if seed is None:
        seed = int(np.random.SeedSequence().generate_state(1, np.uint64)[0] >> np.uint64(1))
    return int(seed), make_rng(seed)


# --------------------------------------------------------------------------- #
# solvers
# --------------------------------------------------------------------------- #

def sample_greedy(inst: KnapsackInstance, oracle: ValueOracle,
                  params: SampleGreedyParams | None = None, seed: int | None = None,
                  *, singleton_fallback: bool = True) -> Solution:
    """Density greedy where each considered item is kept with probability ``p``.

    Returns the better of the greedy set and the best singleton.  Marginals are
    recomputed only after the solution changes.
    """
    params = params or SampleGreedyParams()
    seed, rng = _seed_rng(seed)
    p = params.draw(rng)
    return _run_deterministic_oracle(inst, oracle, p, rng, seed, fallback=singleton_fallback)


def lazy_sample_greedy(inst: KnapsackInstance, oracle: ValueOracle,
                       params: SampleGreedyParams | None = None,
                       lazy: LazyParams | None = None, seed: int | None = None,
                       *, singleton_fallback: bool = True, by: str = "density") -> Solution:
    """:func:`sample_greedy` with lazy evaluations.

    A max-heap holds the last known key of each candidate.  The top is
    re-evaluated if the solution changed since its key was computed; it is
    considered when the fresh key is at least ``old / (1 + eps')`` and
    reinserted otherwise.  Items re-evaluated ``update_cap`` times without
    passing are discarded.  At most ``n * (update_cap + 2)`` evaluations.
    """
    params = params or SampleGreedyParams()
    lazy = lazy or LazyParams()
    seed, rng = _seed_rng(seed)
    p = params.draw(rng)
    return _run_deterministic_oracle(inst, oracle, p, rng, seed, by=by,
                                     fallback=singleton_fallback, lazy=lazy)


def baseline_greedy(inst: KnapsackInstance, oracle: ValueOracle, mode: str = "density",
                    seed: int | None = None, *, lazy: LazyParams | None = None) -> Solution:
    """Deterministic greedy: ``density`` ranks by gain/cost, ``value`` by gain.

    No singleton fallback.  With ``lazy`` set, runs the lazy-evaluation loop.
    """
    if mode not in ("density", "value"):
        raise ValueError(f"unknown mode {mode!r}")
    params = SampleGreedyParams(p=1.0)
    seed = 0 if seed is None else seed
    if lazy is not None:
        return lazy_sample_greedy(inst, oracle, params, lazy, seed,
                                  singleton_fallback=False, by=mode)
    seed, rng = _seed_rng(seed)
    return _run_deterministic_oracle(inst, oracle, 1.0, rng, seed, by=mode, fallback=False)


def best_singleton(inst: KnapsackInstance, oracle: ValueOracle) -> Solution:
    oracle = counting(oracle)
    start = oracle.calls
    if inst.n == 0:
        return Solution(frozenset(), 0.0, 0)
    singles = _singletons(inst, oracle)
    i = _argmax_low(singles)
    return Solution(frozenset([i]), float(singles[i]), oracle.calls - start,
                    singleton_value=float(singles[i]))


def brute_force_opt(inst: KnapsackInstance, oracle: ValueOracle, max_n: int = 24,
                    chunk: int = 1 << 15) -> Solution:
    """Exact optimum by enumerating every subset; ties go to the lexicographically
    smallest sorted id tuple."""
    n = inst.n
    if n > max_n:
        raise CapacityError(f"brute force limited to n <= {max_n}, got {n}")
    oracle = counting(oracle)
    start = oracle.calls
    bits = np.arange(n, dtype=np.int64)
    best_val, best_sets = 0.0, [()]
    limit = inst.budget * (1 + _RTOL)
    for lo in range(0, 1 << n, chunk):
        m = np.arange(lo, min(lo + chunk, 1 << n), dtype=np.int64)
        X = ((m[:, None] >> bits) & 1).astype(bool)
        X = X[X @ inst.costs <= limit]
        if X.shape[0] == 0:
            continue
        vals = oracle.evaluate_masks(X)
        top = vals.max()
        if top > best_val:
            best_val, best_sets = top, []
        if top == best_val:
            best_sets += [tuple(np.flatnonzero(r).tolist()) for r in X[vals == top]]
    items = frozenset(min(best_sets))
    value = oracle.evaluate(items) if items else 0.0
    return Solution(items, float(value), oracle.calls - start)


def adaptive_greedy(inst: KnapsackInstance, model: AdaptiveOracle,
                    params: AdaptiveParams | None = None, omega: Realization | None = None,
                    seed: int | None = None, *, lazy: LazyParams | None = None) -> Solution:
    """Adaptive sample greedy on a stochastic objective.

    With probability ``p0`` seed only the best singleton in expectation.
    Otherwise run the density greedy on expected marginals given what has been
    observed, keeping each considered item with probability ``p`` and observing
    its state when kept.  ``value`` is the realized value under ``omega``;
    ``oracle_calls`` counts expected-marginal evaluations.
    """
    params = params or AdaptiveParams.guarantee()
    if omega is None:
        raise ValueError("adaptive_greedy needs the realization omega")
    seed, rng = _seed_rng(seed)
    p = params.draw(rng)
    n, costs, B = inst.n, inst.costs, inst.budget
    if model.n != n:
        raise ValueError("model and instance disagree on n")
    if 0 < params.p0 < 1:
        r0 = bernoulli(rng, params.p0)
    else:
        r0 = params.p0 == 1
    pr = PartialRealization()
    calls = 0
    if n == 0:
        return Solution(frozenset(), 0.0, 0, seed=seed, p=p)
    singles = model.expected_marginals(np.arange(n), pr)
    calls += n
    istar = _argmax_low(singles)
    # reported only; the greedy branch never observes istar's state through this
    sval = float(model.realized_value({istar}, omega))
    if r0:
        pr = model.observe(pr, istar, omega)
        return Solution(frozenset([istar]), sval, calls, seed=seed,
                        singleton_value=sval, p=p, trace=(istar,),
                        info={"branch": "singleton", "partial": pr})
    counter = [n]

    def gains_fn(ids):
        counter[0] += len(ids)
        return model.expected_marginals(ids, pr)

    def gain_fn(i):
        counter[0] += 1
        return model.expected_marginal(i, pr)

    def add_fn(i):
        nonlocal pr
        pr = model.observe(pr, i, omega)

    if lazy is None:
        S, trace, info = _plain_loop(costs, B, singles, gains_fn, add_fn, p, rng)
    else:
        S, trace, info = _lazy_loop(costs, B, singles, gain_fn, add_fn, p, rng, lazy)
    calls = counter[0]
    val = model.realized_value(S, omega)
    return Solution(frozenset(S), float(val), calls, seed=seed, greedy_items=frozenset(S),
                    greedy_value=float(val), singleton_value=sval, p=p, trace=tuple(trace),
                    info={**info, "branch": "greedy", "partial": pr})


def approx_ratio_estimate(inst: KnapsackInstance, oracle: ValueOracle,
                          algorithm: Callable[..., Solution], trials: int, seed: int = 0):
    """Run ``algorithm(inst, oracle, seed=...)`` ``trials`` times.

    Returns ``(mean, std, singleton_value)`` where mean/std are over the greedy
    arm's value ``v(S)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    vals, single = [], None
    for t in range(trials):
        sol = algorithm(inst, oracle, seed=derive_seed(seed, t))
        vals.append(sol.greedy_value if sol.greedy_value is not None else sol.value)
        if single is None:
            single = sol.singleton_value
    if single is None:
        single = best_singleton(inst, oracle).value
    vals = np.asarray(vals)
    std = float(vals.std(ddof=1)) if trials > 1 else 0.0
    return float(vals.mean()), std, float(single)
