"""Graph-based non-monotone submodular objectives.

All three keep per-item aggregates of the weight mass into the current
solution, so a marginal gain costs O(deg(i)) and a batch of gains for every
item costs O(edges).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import GainState, ValueOracle

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph with edge weights in [0, 1] and no self-loops.

    Edges are stored once with ``u < v``; ``adj`` is the symmetric CSR matrix.
    """

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    adj: sp.csr_matrix
    degree: np.ndarray

    @classmethod
    def from_edges(cls, n, edges=None, *, u=None, v=None, w=None) -> "WeightedGraph":
        """Build from ``(u, v, w)`` triples or parallel arrays.

        Self-loops are dropped; for repeated pairs the last weight wins.
        """
        if edges is not None:
            arr = np.asarray(list(edges), dtype=float).reshape(-1, 3)
            u, v, w = arr[:, 0], arr[:, 1], arr[:, 2]
        u = np.asarray(u, dtype=np.int64).reshape(-1)
        v = np.asarray(v, dtype=np.int64).reshape(-1)
        w = np.asarray(w, dtype=float).reshape(-1)
        if not (u.size == v.size == w.size):
            raise ValueError("edge arrays differ in length")
        if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise ValueError(f"edge endpoint outside [0, {n})")
        if np.any((w < 0) | (w > 1)) or np.any(np.isnan(w)):
            raise ValueError("edge weights must lie in [0, 1]")
        loops = u == v
        if loops.any():
            log.info("dropping %d self-loops", int(loops.sum()))
            u, v, w = u[~loops], v[~loops], w[~loops]
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        key = lo * n + hi
        # last occurrence of each pair
        _, first_rev = np.unique(key[::-1], return_index=True)
        pick = np.sort(key.size - 1 - first_rev)
        lo, hi, w = lo[pick], hi[pick], w[pick]
        order = np.lexsort((hi, lo))
        lo, hi, w = lo[order], hi[order], w[order]
        adj = sp.coo_matrix((np.r_[w, w], (np.r_[lo, hi], np.r_[hi, lo])), shape=(n, n)).tocsr()
        adj.sort_indices()
        degree = np.asarray(adj.sum(axis=1)).reshape(-1)
        for a in (lo, hi, w, degree):
            a.setflags(write=False)
        return cls(int(n), lo, hi, w, adj, degree)

    @classmethod
    def from_dense(cls, W) -> "WeightedGraph":
        W = np.asarray(W, dtype=float)
        if not np.allclose(W, W.T):
            raise ValueError("weight matrix must be symmetric")
        iu, ju = np.triu_indices(W.shape[0], k=1)
        nz = W[iu, ju] != 0
        return cls.from_edges(W.shape[0], u=iu[nz], v=ju[nz], w=W[iu, ju][nz])

    @property
    def m(self) -> int:
        return int(self.w.size)

    def dense(self) -> np.ndarray:
        return self.adj.toarray()

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adj
        return a.indices[a.indptr[i]:a.indptr[i + 1]]


def _mask(n, idx):
    m = np.zeros(n, dtype=bool)
    m[idx] = True
    return m


# --------------------------------------------------------------------------- #
# weighted cut
# --------------------------------------------------------------------------- #

class CutObjective(ValueOracle):
    """Total weight of edges with exactly one endpoint in ``S``."""

    def __init__(self, graph: WeightedGraph):
        self.graph = graph
        self.n = graph.n

    def _value(self, idx):
        g = self.graph
        m = _mask(self.n, idx)
        return float(g.w[m[g.u] != m[g.v]].sum())

    def _values_masks(self, X):
        g = self.graph
        return (X[:, g.u] != X[:, g.v]) @ g.w

    def gain_state(self):
        return _CutState(self.graph)


class _CutState(GainState):
    # gain(i) = deg(i) - 2 * weight(i -> S)
    def __init__(self, graph):
        super().__init__(graph.n)
        self.g = graph
        self.into_s = np.zeros(graph.n)

    def gains(self, ids):
        ids = np.asarray(ids, dtype=np.int64)
        return self.g.degree[ids] - 2.0 * self.into_s[ids]

    def add(self, i):
        gain = float(self.g.degree[i] - 2.0 * self.into_s[i])
        a = self.g.adj
        sl = slice(a.indptr[i], a.indptr[i + 1])
        self.into_s[a.indices[sl]] += a.data[sl]
        self.members[i] = True
        self.value += gain


def cut_value(obj: CutObjective, S) -> float:
    return obj.evaluate(S)


# --------------------------------------------------------------------------- #
# video recommendation (ratings plus a similarity-penalised coverage term)
# --------------------------------------------------------------------------- #

class VideoRecObjective(ValueOracle):
    """``alpha * sum(rating[S]) + beta * g(S)`` with

    ``g(S) = sum_{i in S} sum_{j} w_ij - sum_{i,j in S} (lam + mu * same_cat(i, j)) * w_ij``.

    The double sum runs over ordered pairs.  ``lam >= 1`` keeps the function
    submodular; values can be negative for heavy penalties.
    """

    def __init__(self, graph: WeightedGraph, ratings, categories=(), lam: float = 3.0,
                 mu: float = 7.0, alpha: float = 1.0, beta: float = 1.0):
        if lam < 1:
            raise ValueError("lam must be >= 1 for submodularity")
        if mu < 0 or alpha < 0 or beta < 0:
            raise ValueError("mu, alpha and beta must be non-negative")
        self.graph = graph
        self.n = graph.n
        self.ratings = np.asarray(ratings, dtype=float).reshape(-1)
        if self.ratings.size != self.n:
            raise ValueError("one rating per item required")
        if np.any(self.ratings < 0):
            raise ValueError("ratings must be non-negative")
        self.lam, self.mu, self.alpha, self.beta = float(lam), float(mu), float(alpha), float(beta)
        self.categories = [frozenset(int(i) for i in c) for c in categories]
        self.same_category = self._edge_category_overlap()
        scale = self.lam + self.mu * self.same_category
        pen = sp.coo_matrix((np.r_[scale * graph.w, scale * graph.w],
                             (np.r_[graph.u, graph.v], np.r_[graph.v, graph.u])),
                            shape=(self.n, self.n)).tocsr()
        pen.sort_indices()
        self.penalty = pen

    def _edge_category_overlap(self) -> np.ndarray:
        g = self.graph
        if not self.categories or g.m == 0:
            return np.zeros(g.m)
        rows, cols = [], []
        for k, c in enumerate(self.categories):
            rows.extend(c)
            cols.extend([k] * len(c))
        inc = sp.csr_matrix((np.ones(len(rows)), (rows, cols)),
                            shape=(self.n, len(self.categories)))
        shared = np.asarray(inc[g.u].multiply(inc[g.v]).sum(axis=1)).reshape(-1)
        return (shared > 0).astype(float)

    def _value(self, idx):
        m = _mask(self.n, idx).astype(float)
        inner = float(m @ (self.penalty @ m))
        g = float(self.graph.degree[idx].sum()) - inner
        return self.alpha * float(self.ratings[idx].sum()) + self.beta * g

    def _values_masks(self, X):
        Xf = X.astype(float)
        inner = np.einsum("ij,ij->i", (self.penalty @ Xf.T).T, Xf)
        return self.alpha * (Xf @ self.ratings) + self.beta * (Xf @ self.graph.degree - inner)

    def gain_state(self):
        return _VideoState(self)


class _VideoState(GainState):
    def __init__(self, obj: VideoRecObjective):
        super().__init__(obj.n)
        self.o = obj
        self.pen = np.zeros(obj.n)

    def gains(self, ids):
        o = self.o
        ids = np.asarray(ids, dtype=np.int64)
        return o.alpha * o.ratings[ids] + o.beta * (o.graph.degree[ids] - 2.0 * self.pen[ids])

    def add(self, i):
        gain = float(self.gains(np.array([i]))[0])
        a = self.o.penalty
        sl = slice(a.indptr[i], a.indptr[i + 1])
        self.pen[a.indices[sl]] += a.data[sl]
        self.members[i] = True
        self.value += gain


def videorec_value(obj: VideoRecObjective, S) -> float:
    return obj.evaluate(S)


# --------------------------------------------------------------------------- #
# influence-and-exploit revenue
# --------------------------------------------------------------------------- #

def revenue_from_masks(adj: sp.csr_matrix, coeffs: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Revenue of every row of the membership matrix ``X``."""
    Xf = X.astype(float)
    mass = (adj @ Xf.T).T
    return ((1.0 - Xf) * np.sqrt(mass)) @ coeffs


def revenue_value_raw(adj: sp.csr_matrix, coeffs: np.ndarray, members: np.ndarray) -> float:
    mass = adj @ members.astype(float)
    out = ~members
    return float(coeffs[out] @ np.sqrt(mass[out]))


class RevenueGains:
    """Incremental revenue gains for a fixed coefficient vector.

    Shared by the deterministic objective and the adaptive model, which swaps
    ``coeffs`` as buyer values get revealed.
    """

    def __init__(self, adj: sp.csr_matrix, coeffs: np.ndarray):
        self.adj = adj
        self.coeffs = coeffs
        self.n = adj.shape[0]
        self.mass = np.zeros(self.n)
        self.members = np.zeros(self.n, dtype=bool)
        self._row = np.repeat(np.arange(self.n), np.diff(adj.indptr))

    def gains(self, ids) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.int64)
        a, c, x = self.adj, self.coeffs, self.mass
        if ids.size > max(8, self.n // 8):
            j = a.indices
            term = c[j] * (np.sqrt(x[j] + a.data) - np.sqrt(x[j]))
            term[self.members[j]] = 0.0
            full = np.bincount(self._row, weights=term, minlength=self.n)
            full -= c * np.sqrt(x)
            return full[ids]
        out = np.empty(ids.size)
        for k, i in enumerate(ids.tolist()):
            sl = slice(a.indptr[i], a.indptr[i + 1])
            j = a.indices[sl]
            live = ~self.members[j]
            j = j[live]
            out[k] = (c[j] @ (np.sqrt(x[j] + a.data[sl][live]) - np.sqrt(x[j]))
                      - c[i] * np.sqrt(x[i]))
        return out

    def add(self, i: int) -> None:
        a = self.adj
        sl = slice(a.indptr[i], a.indptr[i + 1])
        self.mass[a.indices[sl]] += a.data[sl]
        self.members[i] = True


class RevenueObjective(ValueOracle):
    """``v(S) = sum_{i not in S} coeffs[i] * sqrt(sum_{j in S} w_ij)``."""

    def __init__(self, graph: WeightedGraph, coeffs):
        self.graph = graph
        self.n = graph.n
        self.coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
        if self.coeffs.size != self.n:
            raise ValueError("one coefficient per buyer required")
        if np.any(self.coeffs < 0):
            raise ValueError("coefficients must be non-negative")

    def _value(self, idx):
        return revenue_value_raw(self.graph.adj, self.coeffs, _mask(self.n, idx))

    def _values_masks(self, X):
        return revenue_from_masks(self.graph.adj, self.coeffs, X)

    def gain_state(self):
        return _RevenueState(self)


class _RevenueState(GainState):
    def __init__(self, obj: RevenueObjective):
        super().__init__(obj.n)
        self.r = RevenueGains(obj.graph.adj, obj.coeffs)
        self.members = self.r.members

    def gains(self, ids):
        return self.r.gains(ids)

    def add(self, i):
        gain = float(self.r.gains(np.array([i]))[0])
        self.r.add(i)
        self.value += gain


def revenue_value(obj: RevenueObjective, S) -> float:
    return obj.evaluate(S)
