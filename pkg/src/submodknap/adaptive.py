"""Stochastic revenue model and exact policy evaluation on tiny instances.

Each buyer ``i`` has an unknown coefficient ``a_i`` drawn independently from a
prior.  Seeding buyer ``i`` reveals ``a_j`` for ``i`` and every neighbour
``j`` of ``i``.  Revenue is linear in the coefficients for a fixed seed set, so
the expected value given a partial realization is the deterministic revenue
with unrevealed coefficients replaced by the prior mean.
"""
from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Protocol, Sequence

import numpy as np

from .core import POSITIVE_TOL, CapacityError
from .objectives import RevenueGains, WeightedGraph, revenue_value_raw

MAX_ATOMS = 10_000


# --------------------------------------------------------------------------- #
# priors
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class LomaxPrior:
    """Pareto type II with ``P(a > x) = (1 + x/scale) ** -shape``."""

    scale: float = 1.0
    shape: float = 2.0

    @property
    def mean(self) -> float:
        if self.shape <= 1:
            return float("inf")
        return self.scale / (self.shape - 1)

    def inverse_cdf(self, u):
        u = np.asarray(u, dtype=float)
        return self.scale * ((1.0 - u) ** (-1.0 / self.shape) - 1.0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.inverse_cdf(rng.random(size))


@dataclass(frozen=True)
class DiscretePrior:
    """Finite prior on ``values`` with probabilities ``probs``."""

    values: tuple
    probs: tuple

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        p = tuple(float(x) for x in self.probs)
        if len(v) != len(p) or not v:
            raise ValueError("values and probs must be non-empty and equally long")
        if any(x < 0 for x in p) or abs(sum(p) - 1.0) > 1e-9:
            raise ValueError("probs must be a distribution")
        if any(x < 0 for x in v):
            raise ValueError("coefficients must be non-negative")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", p)

    @property
    def mean(self) -> float:
        return float(np.dot(self.values, self.probs))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        idx = rng.choice(len(self.values), size=size, p=self.probs)
        return np.asarray(self.values)[idx]


def point_mass(value: float) -> DiscretePrior:
    return DiscretePrior((value,), (1.0,))


def quantile_grid(prior: LomaxPrior, k: int) -> DiscretePrior:
    """k equiprobable atoms at the bin midpoints ``(j + 1/2) / k`` of the quantile range."""
    u = (np.arange(k) + 0.5) / k
    return DiscretePrior(tuple(prior.inverse_cdf(u)), tuple([1.0 / k] * k))


# --------------------------------------------------------------------------- #
# realizations
# --------------------------------------------------------------------------- #

@dataclass(frozen=True, eq=False)
class Realization:
    """Full state: one coefficient per buyer."""

    states: np.ndarray

    def __post_init__(self):
        s = np.array(self.states, dtype=float)
        s.setflags(write=False)
        object.__setattr__(self, "states", s)


@dataclass(frozen=True)
class PartialRealization:
    """Seeded set ``observed`` and the coefficients revealed so far."""

    observed: frozenset = frozenset()
    revealed: tuple = ()  # sorted (id, value) pairs

    @property
    def revealed_dict(self) -> dict:
        return dict(self.revealed)

    def __le__(self, other: "PartialRealization") -> bool:
        mine = self.revealed_dict
        theirs = other.revealed_dict
        return self.observed <= other.observed and all(
            k in theirs and theirs[k] == v for k, v in mine.items())


class AdaptiveOracle(ABC):
    n: int

    @abstractmethod
    def expected_marginal(self, i: int, pr: PartialRealization) -> float:
        ...

    @abstractmethod
    def realized_value(self, S, omega: Realization) -> float:
        ...

    def expected_marginals(self, ids, pr: PartialRealization) -> np.ndarray:
        return np.array([self.expected_marginal(int(i), pr) for i in ids])


class AdaptiveRevenueModel(AdaptiveOracle):
    def __init__(self, graph: WeightedGraph, prior=None):
        self.graph = graph
        self.n = graph.n
        self.prior = LomaxPrior() if prior is None else prior

    def sample_realization(self, rng: np.random.Generator) -> Realization:
        return Realization(self.prior.sample(rng, self.n))

    def reveals(self, i: int) -> np.ndarray:
        """Buyers whose coefficient is learned when ``i`` is seeded."""
        a = self.graph.adj
        sl = slice(a.indptr[i], a.indptr[i + 1])
        nb = a.indices[sl][a.data[sl] > 0]
        return np.union1d(nb, [i])

    def observe(self, pr: PartialRealization, i: int, omega: Realization) -> PartialRealization:
        i = int(i)
        if i in pr.observed:
            raise ValueError(f"item {i} already observed")
        if not 0 <= i < self.n:
            raise ValueError(f"item id {i} out of range [0, {self.n})")
        rev = pr.revealed_dict
        for j in self.reveals(i).tolist():
            rev.setdefault(j, float(omega.states[j]))
        return PartialRealization(pr.observed | {i}, tuple(sorted(rev.items())))

    def expected_coeffs(self, pr: PartialRealization) -> np.ndarray:
        c = np.full(self.n, float(self.prior.mean))
        if pr.revealed:
            ids, vals = zip(*pr.revealed)
            c[list(ids)] = vals
        return c

    def _tracker(self, pr: PartialRealization) -> RevenueGains:
        r = RevenueGains(self.graph.adj, self.expected_coeffs(pr))
        for i in sorted(pr.observed):
            r.add(i)
        return r

    def expected_marginals(self, ids, pr):
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size == 0:
            return np.empty(0)
        if any(int(i) in pr.observed for i in ids):
            raise ValueError("expected marginal of an observed item")
        return self._tracker(pr).gains(ids)

    def expected_marginal(self, i, pr):
        return float(self.expected_marginals(np.array([i]), pr)[0])

    def expected_value(self, pr: PartialRealization) -> float:
        m = np.zeros(self.n, dtype=bool)
        m[list(pr.observed)] = True
        return revenue_value_raw(self.graph.adj, self.expected_coeffs(pr), m)

    def realized_value(self, S, omega: Realization) -> float:
        m = np.zeros(self.n, dtype=bool)
        m[list(S)] = True
        if not m.any():
            return 0.0
        return revenue_value_raw(self.graph.adj, omega.states, m)


def sample_realization(model: AdaptiveRevenueModel, rng) -> Realization:
    return model.sample_realization(rng)


def observe(model: AdaptiveRevenueModel, pr, i, omega) -> PartialRealization:
    return model.observe(pr, i, omega)


def expected_marginal(model: AdaptiveOracle, i, pr) -> float:
    return model.expected_marginal(i, pr)


# --------------------------------------------------------------------------- #
# policies and exact evaluation
# --------------------------------------------------------------------------- #

class Policy(Protocol):
    """Adaptive policy with enumerable internal randomness.

    ``decide`` returns the branches out of the current node as
    ``(probability, action, next_state)`` where ``action`` is an item to seed,
    or ``None`` for an internal move that seeds nothing.  An empty list stops.
    """

    def initial_state(self) -> Any: ...

    def decide(self, state, pr: PartialRealization, remaining: float) -> list: ...


class DecisionTreePolicy:
    """Deterministic policy given as ``{partial realization: item or None}``.

    Partial realizations missing from the table stop the policy.
    """

    def __init__(self, table: dict):
        self.table = dict(table)

    def initial_state(self):
        return None

    def decide(self, state, pr, remaining):
        act = self.table.get(pr)
        return [] if act is None else [(1.0, act, None)]


class FixedSequencePolicy:
    """Seed the listed items in order, skipping those that no longer fit."""

    def __init__(self, items: Sequence[int], costs):
        self.items = list(items)
        self.costs = np.asarray(costs, dtype=float)

    def initial_state(self):
        return 0

    def decide(self, k, pr, remaining):
        while k < len(self.items) and self.costs[self.items[k]] > remaining:
            k += 1
        if k >= len(self.items):
            return []
        return [(1.0, self.items[k], k + 1)]


def _atoms(model: AdaptiveRevenueModel, max_atoms: int):
    prior = model.prior
    if not isinstance(prior, DiscretePrior):
        raise ValueError("exact evaluation needs a DiscretePrior; discretize the prior first")
    k = len(prior.values)
    if k ** model.n > max_atoms:
        raise CapacityError(f"{k}^{model.n} state atoms exceed the limit of {max_atoms}")
    vals, probs = np.asarray(prior.values), np.asarray(prior.probs)
    for combo in itertools.product(range(k), repeat=model.n):
        c = np.asarray(combo, dtype=np.int64)
        yield float(np.prod(probs[c])), Realization(vals[c])


def evaluate_policy_exact(model: AdaptiveRevenueModel, policy, costs, budget: float,
                          max_atoms: int = MAX_ATOMS) -> float:
    """Expected realized value of ``policy`` by enumerating every state atom
    and every branch of the policy's own coin flips."""
    costs = np.asarray(costs, dtype=float)
    tol = budget * 1e-12

    def run(state, pr, remaining, omega, depth=0):
        if depth > 4 * model.n + 4:
            raise RuntimeError("policy does not terminate")
        branches = policy.decide(state, pr, remaining)
        if not branches:
            return model.realized_value(pr.observed, omega)
        total = 0.0
        for prob, action, nxt in branches:
            if prob == 0:
                continue
            if action is None:
                total += prob * run(nxt, pr, remaining, omega, depth + 1)
                continue
            if costs[action] > remaining + tol:
                raise ValueError(f"policy seeded item {action} beyond the remaining budget")
            pr2 = model.observe(pr, action, omega)
            total += prob * run(nxt, pr2, remaining - costs[action], omega, depth + 1)
        return total

    return sum(w * run(policy.initial_state(), PartialRealization(), float(budget), omega)
               for w, omega in _atoms(model, max_atoms))


def optimal_adaptive_policy(model: AdaptiveRevenueModel, costs, budget: float,
                            max_atoms: int = MAX_ATOMS):
    """Best adaptive policy by backward induction over partial realizations.

    Returns ``(value, DecisionTreePolicy)``.  This is the maximum over all
    deterministic decision trees; randomization cannot do better.
    """
    prior = model.prior
    if not isinstance(prior, DiscretePrior):
        raise ValueError("exact optimization needs a DiscretePrior")
    if len(prior.values) ** model.n > max_atoms:
        raise CapacityError("state space too large for exact optimization")
    costs = np.asarray(costs, dtype=float)
    tol = budget * 1e-12
    memo: dict = {}
    table: dict = {}

    def value(pr: PartialRealization, remaining: float) -> float:
        if pr in memo:
            return memo[pr]
        best, best_act = model.expected_value(pr), None
        known = pr.revealed_dict
        for i in range(model.n):
            if i in pr.observed or costs[i] > remaining + tol:
                continue
            fresh = [j for j in model.reveals(i).tolist() if j not in known]
            ev = 0.0
            for combo in itertools.product(range(len(prior.values)), repeat=len(fresh)):
                prob = float(np.prod([prior.probs[c] for c in combo])) if fresh else 1.0
                rev = dict(known)
                rev.update({j: prior.values[c] for j, c in zip(fresh, combo)})
                child = PartialRealization(pr.observed | {i}, tuple(sorted(rev.items())))
                ev += prob * value(child, remaining - costs[i])
            if ev > best + 1e-12:
                best, best_act = ev, i
        memo[pr] = best
        if best_act is not None:
            table[pr] = best_act
        return best

    v = value(PartialRealization(), float(budget))
    return v, DecisionTreePolicy(table)


class AdaptiveGreedyPolicy:
    """The randomized adaptive greedy rule written as an enumerable policy.

    Used to compute its exact expected value; the sampling implementation is
    :func:`submodknap.algorithms.adaptive_greedy`.
    """

    def __init__(self, model: AdaptiveOracle, costs, p0: float, p: float):
        self.model = model
        self.costs = np.asarray(costs, dtype=float)
        self.p0, self.p = float(p0), float(p)

    def initial_state(self):
        return "start"

    def decide(self, state, pr, remaining):
        if state == "start":
            out = []
            if self.p0 > 0:
                single = np.array([self.model.expected_marginal(k, PartialRealization())
                                   for k in range(self.model.n)])
                out.append((self.p0, int(np.argmax(single)), "done"))
            if self.p0 < 1:
                out.append((1 - self.p0, None, frozenset()))
            return out
        if state == "done":
            return []
        removed = state
        cand = np.array([k for k in range(self.model.n)
                         if k not in removed and k not in pr.observed
                         and self.costs[k] <= remaining * (1 + 1e-12)], dtype=np.int64)
        if cand.size == 0:
            return []
        gains = self.model.expected_marginals(cand, pr)
        live = gains > POSITIVE_TOL
        if not live.any():
            return []
        cand, gains = cand[live], gains[live]
        i = int(cand[np.argmax(gains / self.costs[cand])])
        nxt = removed | {i}
        out = []
        if self.p > 0:
            out.append((self.p, i, nxt))
        if self.p < 1:
            out.append((1 - self.p, None, nxt))
        return out
