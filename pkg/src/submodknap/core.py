"""Instances, value oracles, oracle-call counting and the seeding contract.

Every solver in the package talks to an objective through :class:`ValueOracle`.
Greedy loops do not call ``evaluate`` on whole sets; they open a
:class:`GainState` that tracks the current solution and returns marginal gains
of candidate items.  One gain query is one oracle evaluation of ``v(S + i)``
against the cached ``v(S)``, and that is what :class:`CountingOracle` tallies.
"""
from __future__ import annotations

import logging
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

log = logging.getLogger(__name__)

# marginal gains at or below this are treated as non-positive
POSITIVE_TOL = 1e-12
_COST_RTOL = 1e-12


class CapacityError(ValueError):
    """Raised when an exact method is asked to enumerate too much."""


# --------------------------------------------------------------------------- #
# randomness
# --------------------------------------------------------------------------- #

def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; identical seeds give identical streams."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def derive_seed(seed: int, *keys: int) -> int:
    """Child 63-bit seed for ``(seed, *keys)``, stable across runs and platforms."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def bernoulli(rng: np.random.Generator, p: float) -> bool:
    # one uniform draw per coin, always consumed
    return bool(rng.random() < p)


# --------------------------------------------------------------------------- #
# instances
# --------------------------------------------------------------------------- #

class Item(NamedTuple):
    id: int
    cost: float


@dataclass(frozen=True)
class KnapsackInstance:
    """Item costs and a budget.

    ``original_ids[k]`` is the id that item ``k`` had before items costing
    more than the budget were dropped (see :func:`make_instance`).
    """

    costs: np.ndarray
    budget: float
    original_ids: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        costs = np.asarray(self.costs, dtype=float).reshape(-1)
        if not self.budget > 0:
            raise ValueError(f"budget must be positive, got {self.budget}")
        if np.any(~(costs > 0)):
            raise ValueError("item costs must be positive")
        if np.any(costs > self.budget):
            raise ValueError("item cost exceeds budget; build with make_instance to drop it")
        costs.setflags(write=False)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "budget", float(self.budget))
        ids = self.original_ids
        ids = np.arange(costs.size) if ids is None else np.asarray(ids, dtype=np.int64)
        object.__setattr__(self, "original_ids", ids)

    @property
    def n(self) -> int:
        return int(self.costs.size)

    @property
    def items(self) -> list[Item]:
        return [Item(i, float(c)) for i, c in enumerate(self.costs)]

    def cost_of(self, S: Iterable[int]) -> float:
        idx = np.fromiter(S, dtype=np.int64)
        return float(self.costs[idx].sum()) if idx.size else 0.0

    def is_feasible(self, S: Iterable[int]) -> bool:
        return self.cost_of(S) <= self.budget * (1 + _COST_RTOL)


def make_instance(costs: Sequence[float], budget: float, oracle: "ValueOracle | None" = None):
    """Build an instance, dropping items whose cost exceeds ``budget``.

    Surviving items are renumbered ``0..n'-1``.  When an oracle is given it is
    restricted to the survivors, and ``(instance, oracle)`` is returned;
    otherwise just the instance.
    """
    costs = np.asarray(costs, dtype=float)
    keep = np.flatnonzero(costs <= budget)
    if keep.size < costs.size:
        log.info("dropping %d of %d items with cost > budget %.6g",
                 costs.size - keep.size, costs.size, budget)
    inst = KnapsackInstance(costs[keep], budget, original_ids=keep)
    if oracle is None:
        return inst
    if oracle.n != costs.size:
        raise ValueError(f"oracle has {oracle.n} items, costs have {costs.size}")
    if keep.size < costs.size:
        oracle = RestrictedOracle(oracle, keep)
    return inst, oracle


def assert_feasible(instance: KnapsackInstance, S: Iterable[int]) -> None:
    """Shared validator: raise if ``S`` busts the budget or holds unknown ids."""
    S = list(S)
    if any(not 0 <= i < instance.n for i in S):
        raise AssertionError(f"solution holds ids outside [0, {instance.n})")
    if len(set(S)) != len(S):
        raise AssertionError("solution holds duplicate ids")
    if not instance.is_feasible(S):
        raise AssertionError(
            f"infeasible solution: cost {instance.cost_of(S):.12g} > budget {instance.budget:.12g}")


# --------------------------------------------------------------------------- #
# oracles
# --------------------------------------------------------------------------- #

def _as_ids(S, n: int) -> np.ndarray:
    idx = np.fromiter((int(i) for i in S), dtype=np.int64) if not isinstance(S, np.ndarray) \
        else S.astype(np.int64, copy=False).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ValueError(f"item id out of range [0, {n})")
    return idx


class ValueOracle(ABC):
    """Normalized set function on items ``0..n-1``.

    Subclasses implement :meth:`_value` on a validated id array.  They may
    override :meth:`gain_state` and :meth:`_values_masks` with faster paths.
    """

    n: int

    @abstractmethod
    def _value(self, idx: np.ndarray) -> float:
        ...

    def evaluate(self, S: Iterable[int]) -> float:
        idx = np.unique(_as_ids(S, self.n))
        if idx.size == 0:
            return 0.0
        return float(self._value(idx))

    def marginal(self, i: int, S: Iterable[int], base: float | None = None) -> float:
        """``v(S + i) - v(S)``; pass ``base=v(S)`` to skip its evaluation."""
        S = set(int(j) for j in S)
        if i in S:
            raise ValueError(f"item {i} already in S")
        if not 0 <= i < self.n:
            raise ValueError(f"item id {i} out of range [0, {self.n})")
        if base is None:
            base = self.evaluate(S)
        return self.evaluate(S | {int(i)}) - base

    def evaluate_masks(self, X: np.ndarray) -> np.ndarray:
        """Values of many sets at once; ``X`` is a boolean (k, n) membership matrix."""
        X = np.asarray(X, dtype=bool)
        if X.ndim != 2 or X.shape[1] != self.n:
            raise ValueError(f"expected a (k, {self.n}) mask matrix")
        return self._values_masks(X)

    def _values_masks(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.evaluate(np.flatnonzero(row)) for row in X], dtype=float)

    def gain_state(self) -> "GainState":
        return GenericGainState(self)


class GainState:
    """Running solution ``S`` (initially empty) with marginal-gain queries."""

    def __init__(self, n: int):
        self.n = n
        self.members = np.zeros(n, dtype=bool)
        self.value = 0.0

    def gain(self, i: int) -> float:
        return float(self.gains(np.array([i]))[0])

    def gains(self, ids: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def add(self, i: int) -> None:
        raise NotImplementedError

    @property
    def items(self) -> list[int]:
        return np.flatnonzero(self.members).tolist()


class GenericGainState(GainState):
    """Gain queries by full evaluation; works for any oracle."""

    def __init__(self, oracle: ValueOracle):
        super().__init__(oracle.n)
        self.oracle = oracle
        self._seen: dict[int, float] = {}

    def gains(self, ids):
        base = self.items
        out = np.empty(len(ids))
        for k, i in enumerate(np.asarray(ids).tolist()):
            val = self.oracle.evaluate(base + [i])
            self._seen[i] = val
            out[k] = val - self.value
        return out

    def add(self, i):
        i = int(i)
        if self.members[i]:
            raise ValueError(f"item {i} already in S")
        val = self._seen.get(i)
        if val is None:
            val = self.oracle.evaluate(self.items + [i])
        self.members[i] = True
        self.value = val
        self._seen.clear()


class FunctionOracle(ValueOracle):
    """Wrap a plain callable ``f(frozenset) -> float`` with ``f(empty) == 0``."""

    def __init__(self, n: int, fn):
        self.n = int(n)
        self.fn = fn

    def _value(self, idx):
        return float(self.fn(frozenset(idx.tolist())))


class ModularOracle(ValueOracle):
    """``v(S) = sum of weights[i] for i in S``."""

    def __init__(self, weights):
        self.weights = np.asarray(weights, dtype=float)
        self.n = self.weights.size

    def _value(self, idx):
        return float(self.weights[idx].sum())

    def _values_masks(self, X):
        return X @ self.weights

    def gain_state(self):
        return _ModularState(self)


class _ModularState(GainState):
    def __init__(self, oracle):
        super().__init__(oracle.n)
        self.w = oracle.weights

    def gains(self, ids):
        return self.w[np.asarray(ids, dtype=np.int64)].copy()

    def add(self, i):
        self.members[i] = True
        self.value += float(self.w[i])


class RestrictedOracle(ValueOracle):
    """The inner oracle seen only on items ``keep`` (renumbered densely)."""

    def __init__(self, inner: ValueOracle, keep):
        self.inner = inner
        self.keep = np.asarray(keep, dtype=np.int64)
        self.n = self.keep.size

    def _value(self, idx):
        return self.inner.evaluate(self.keep[idx])

    def _values_masks(self, X):
        full = np.zeros((X.shape[0], self.inner.n), dtype=bool)
        full[:, self.keep] = X
        return self.inner.evaluate_masks(full)

    def gain_state(self):
        return _RestrictedState(self)


class _RestrictedState(GainState):
    def __init__(self, oracle: RestrictedOracle):
        super().__init__(oracle.n)
        self.keep = oracle.keep
        self.inner = oracle.inner.gain_state()

    def gains(self, ids):
        return self.inner.gains(self.keep[np.asarray(ids, dtype=np.int64)])

    def add(self, i):
        self.inner.add(int(self.keep[i]))
        self.members[i] = True
        self.value = self.inner.value


class CountingOracle(ValueOracle):
    """Transparent wrapper that counts oracle evaluations.

    ``evaluate`` costs 1, ``marginal`` costs 2 (1 when ``base`` is given), a
    gain query on a state costs 1 per item, and ``evaluate_masks`` costs one
    per row.  Adding an item to a state reuses the value computed when its gain
    was queried and costs nothing.  Own one wrapper per run; the counter is
    lock-protected but shared counters mix runs together.
    """

    def __init__(self, inner: ValueOracle):
        if isinstance(inner, CountingOracle):
            inner = inner.inner
        self.inner = inner
        self.n = inner.n
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return self._calls

    def _tick(self, k: int = 1) -> None:
        with self._lock:
            self._calls += k

    def _value(self, idx):  # pragma: no cover - evaluate is overridden
        return self.inner._value(idx)

    def evaluate(self, S):
        val = self.inner.evaluate(S)
        self._tick()
        return val

    def marginal(self, i, S, base=None):
        S = set(int(j) for j in S)
        if i in S:
            raise ValueError(f"item {i} already in S")
        if not 0 <= i < self.n:
            raise ValueError(f"item id {i} out of range [0, {self.n})")
        if base is None:
            base = self.evaluate(S)
        return self.evaluate(S | {int(i)}) - base

    def _values_masks(self, X):
        out = self.inner.evaluate_masks(X)
        self._tick(X.shape[0])
        return out

    def gain_state(self):
        return _CountingState(self, self.inner.gain_state())


class _CountingState(GainState):
    def __init__(self, counter: CountingOracle, inner: GainState):
        self.n = inner.n
        self.counter = counter
        self.inner = inner
        self.members = inner.members

    @property
    def value(self):
        return self.inner.value

    def gains(self, ids):
        ids = np.asarray(ids, dtype=np.int64)
        out = self.inner.gains(ids)
        self.counter._tick(ids.size)
        return out

    def add(self, i):
        self.inner.add(i)


def counting(oracle: ValueOracle) -> CountingOracle:
    return oracle if isinstance(oracle, CountingOracle) else CountingOracle(oracle)


# --------------------------------------------------------------------------- #
# solutions
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class Solution:
    """Output of a solver.

    ``items``/``value`` is the returned set.  Randomized greedy solvers also
    report the greedy arm (``greedy_items``, ``greedy_value``) and the best
    singleton value separately, because guarantees are stated in terms of
    ``max(E[v(S)], v(i*))``.  ``trace`` lists considered items in order.
    """

    items: frozenset
    value: float
    oracle_calls: int
    seed: int | None = None
    greedy_items: frozenset | None = None
    greedy_value: float | None = None
    singleton_value: float | None = None
    p: float | None = None
    trace: tuple = field(default=(), repr=False)
    info: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def set(self) -> frozenset:
        return self.items


# --------------------------------------------------------------------------- #
# property checks shared by the test-suite and the objectives' self-checks
# --------------------------------------------------------------------------- #

def random_nested_triples(n: int, rng: np.random.Generator, count: int):
    """Yield ``(S, T, i)`` with ``S <= T``, ``i`` not in ``T``, drawn uniformly-ish."""
    for _ in range(count):
        order = rng.permutation(n)
        t = int(rng.integers(0, n))  # |T| <= n-1 leaves room for i
        s = int(rng.integers(0, t + 1))
        T = order[:t]
        keep = rng.permutation(t)[:s]
        yield set(T[keep].tolist()), set(T.tolist()), int(order[t])


def submodularity_violations(oracle: ValueOracle, rng: np.random.Generator,
                             count: int = 500, tol: float = 1e-9) -> list:
    """Triples where ``v(i|S) < v(i|T) - tol`` for ``S <= T``; empty means none found."""
    bad = []
    for S, T, i in random_nested_triples(oracle.n, rng, count):
        ms, mt = oracle.marginal(i, S), oracle.marginal(i, T)
        if ms < mt - tol:
            bad.append((S, T, i, ms, mt))
    return bad


def lattice_violations(oracle: ValueOracle, rng: np.random.Generator,
                       count: int = 500, tol: float = 1e-9) -> list:
    """Pairs where ``v(S)+v(T) < v(S|T)+v(S&T) - tol``."""
    bad = []
    for _ in range(count):
        S = set(np.flatnonzero(rng.random(oracle.n) < 0.5).tolist())
        T = set(np.flatnonzero(rng.random(oracle.n) < 0.5).tolist())
        lhs = oracle.evaluate(S) + oracle.evaluate(T)
        rhs = oracle.evaluate(S | T) + oracle.evaluate(S & T)
        if lhs < rhs - tol:
            bad.append((S, T, lhs, rhs))
    return bad
