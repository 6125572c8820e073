import itertools
import math

import numpy as np
import pytest

from submodknap import WeightedGraph


# Reference evaluators written straight from the set-function definitions with
# plain loops over a dense weight matrix.  They share no code with the library.

def naive_cut(W, S):
    S = set(S)
    n = len(W)
    return sum(W[i][j] for i in S for j in range(n) if j not in S)


def naive_videorec(W, rho, cats, lam, mu, alpha, beta, S):
    S = set(S)
    n = len(W)

    def chi(i, j):
        return 1.0 if any(i in c and j in c for c in cats) else 0.0

    cover = sum(W[i][j] for i in S for j in range(n))
    pen = sum((lam + chi(i, j) * mu) * W[i][j] for i in S for j in S)
    return alpha * sum(rho[i] for i in S) + beta * (cover - pen)


def naive_revenue(W, a, S):
    S = set(S)
    n = len(W)
    return sum(a[i] * math.sqrt(sum(W[i][j] for j in S)) for i in range(n) if i not in S)


def all_subsets(n):
    for r in range(n + 1):
        yield from itertools.combinations(range(n), r)


def naive_opt(value_fn, costs, budget):
    """Best feasible set by plain enumeration; ties go to the lexicographically smallest."""
    best, best_set = 0.0, ()
    for S in all_subsets(len(costs)):
        if sum(costs[i] for i in S) <= budget * (1 + 1e-12):
            v = value_fn(S)
            if v > best + 1e-12 or (abs(v - best) <= 1e-12 and S < best_set):
                best, best_set = v, S
    return best, best_set


def random_dense(n, rng, p=0.5):
    W = np.triu(rng.random((n, n)) * (rng.random((n, n)) < p), 1)
    return W + W.T


@pytest.fixture
def triangle():
    return WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


@pytest.fixture
def path3():
    return WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
