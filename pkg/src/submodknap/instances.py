"""Random instance generators and readers/writers for the on-disk formats.

Formats
-------
edge list   whitespace separated ``u v [w]`` per line, ``#`` starts a comment
tag table   CSV with header ``item,tag,relevance``
costs       CSV with header ``id,cost``
ratings     CSV with header ``item,rating``
categories  CSV with header ``item,category``
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import make_rng
from .objectives import WeightedGraph

log = logging.getLogger(__name__)

MIN_COST = 1e-9


class ParseError(ValueError):
    def __init__(self, path, lineno, msg):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class GenSpec:
    """Erdos-Renyi instance recipe.

    ``weight_dist``: ``uniform`` (U(0,1)) or ``constant`` (``weight``).
    ``cost_dist``: ``uniform`` (U(0,1)) or ``degree`` (proportional to the
    weighted degree, rescaled to mean 1).
    """

    n: int
    edge_prob: float
    weight_dist: str = "uniform"
    cost_dist: str = "uniform"
    seed: int = 0
    weight: float = 1.0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if not 0 <= self.edge_prob <= 1:
            raise ValueError("edge_prob must lie in [0, 1]")
        if self.weight_dist not in ("uniform", "constant"):
            raise ValueError(f"unknown weight_dist {self.weight_dist!r}")
        if self.cost_dist not in ("uniform", "degree"):
            raise ValueError(f"unknown cost_dist {self.cost_dist!r}")


def gen_er_graph(spec: GenSpec):
    """G(n, p) with independent weights; returns ``(graph, costs)``.

    Draw order: one uniform per vertex pair (row-major upper triangle), then
    one weight per edge, then one cost per vertex (uniform costs only).
    """
    rng = make_rng(spec.seed)
    n = spec.n
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < spec.edge_prob
    u, v = iu[keep], ju[keep]
    if spec.weight_dist == "uniform":
        w = rng.random(u.size)
    else:
        w = np.full(u.size, float(spec.weight))
    graph = WeightedGraph.from_edges(n, u=u, v=v, w=w)
    if spec.cost_dist == "uniform":
        costs = np.maximum(rng.random(n), MIN_COST)
    else:
        costs = degree_costs(graph)
    return graph, costs


def degree_costs(graph: WeightedGraph) -> np.ndarray:
    d = graph.degree.astype(float)
    mean = d.mean() if d.size else 0.0
    if mean <= 0:
        return np.ones(graph.n)
    return np.maximum(d / mean, MIN_COST)


def sample_costs_uniform(n: int, seed: int) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be non-negative")
    return np.maximum(make_rng(seed).random(n), MIN_COST)


# --------------------------------------------------------------------------- #
# tag similarity
# --------------------------------------------------------------------------- #

def min_l2(a, b) -> float:
    """L2 norm of the coordinate-wise minimum of two tag vectors."""
    return float(np.sqrt(np.sum(np.minimum(a, b) ** 2)))


def tag_similarity(tags, normalize: bool = True, block_floats: int = 1 << 24) -> WeightedGraph:
    """Similarity graph from a ``(n_items, n_tags)`` relevance matrix in [0, 1].

    ``w_ij`` is the L2 norm of ``min(t_i, t_j)``; with ``normalize`` all weights
    are divided by their maximum.
    """
    T = np.asarray(tags, dtype=float)
    if T.ndim != 2:
        raise ValueError("tags must be a 2-d matrix")
    if T.size and (np.isnan(T).any() or T.min() < 0 or T.max() > 1):
        raise ValueError("tag relevances must lie in [0, 1]")
    n, d = T.shape
    us, vs, ws = [], [], []
    step = max(1, block_floats // max(1, n * max(d, 1)))
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        mins = np.minimum(T[lo:hi, None, :], T[None, :, :])
        W = np.sqrt(np.einsum("ijk,ijk->ij", mins, mins))
        r, c = np.nonzero(W)
        rows = r + lo
        upper = c > rows
        us.append(rows[upper])
        vs.append(c[upper])
        ws.append(W[r[upper], c[upper]])
    u = np.concatenate(us) if us else np.empty(0, dtype=np.int64)
    v = np.concatenate(vs) if vs else np.empty(0, dtype=np.int64)
    w = np.concatenate(ws) if ws else np.empty(0)
    if normalize and w.size:
        w = w / w.max()
    elif not normalize and w.size and w.max() > 1:
        raise ValueError("unnormalized similarities exceed 1; pass normalize=True")
    return WeightedGraph.from_edges(n, u=u, v=v, w=np.minimum(w, 1.0))


def load_tag_csv(path):
    """Read ``item,tag,relevance`` rows; returns ``(item_ids, tag_ids, matrix)``."""
    rows = _read_csv(path, ("item", "tag", "relevance"))
    items = sorted({int(r[0]) for _, r in rows})
    tag_ids = sorted({int(r[1]) for _, r in rows})
    ii = {x: k for k, x in enumerate(items)}
    tt = {x: k for k, x in enumerate(tag_ids)}
    M = np.zeros((len(items), len(tag_ids)))
    for lineno, (it, tg, rel) in rows:
        try:
            M[ii[int(it)], tt[int(tg)]] = float(rel)
        except ValueError as exc:
            raise ParseError(path, lineno, str(exc)) from None
    return np.array(items), np.array(tag_ids), M


# --------------------------------------------------------------------------- #
# edge lists and CSV side files
# --------------------------------------------------------------------------- #

def load_edge_list(path, seed: int | None = None, return_ids: bool = False):
    """Parse a SNAP-style edge list into a :class:`WeightedGraph`.

    Vertex ids are densified in sorted order, so 0- and 1-based files both
    work.  A missing weight is drawn from U(0,1) using ``seed`` (one draw per
    weightless line, in file order).  Repeated pairs keep the last weight.
    """
    raw_u, raw_v, raw_w = [], [], []
    rng = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            if len(tok) not in (2, 3):
                raise ParseError(path, lineno, f"expected 'u v [w]', got {line!r}")
            try:
                a, b = int(tok[0]), int(tok[1])
                if len(tok) == 3:
                    w = float(tok[2])
                else:
                    if seed is None:
                        raise ParseError(path, lineno, "missing weight and no seed given")
                    rng = rng or make_rng(seed)
                    w = float(rng.random())
            except ValueError as exc:
                if isinstance(exc, ParseError):
                    raise
                raise ParseError(path, lineno, str(exc)) from None
            if not 0 <= w <= 1:
                raise ParseError(path, lineno, f"weight {w} outside [0, 1]")
            raw_u.append(a)
            raw_v.append(b)
            raw_w.append(w)
    ids = np.unique(np.r_[raw_u, raw_v]).astype(np.int64)
    u = np.searchsorted(ids, np.asarray(raw_u, dtype=np.int64))
    v = np.searchsorted(ids, np.asarray(raw_v, dtype=np.int64))
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    pairs = lo * max(ids.size, 1) + hi
    dup = pairs.size - np.unique(pairs).size
    if dup:
        log.warning("%s: %d duplicate edges, keeping the last weight", path, dup)
    graph = WeightedGraph.from_edges(ids.size, u=u, v=v, w=np.asarray(raw_w, dtype=float))
    return (graph, ids) if return_ids else graph


def write_edge_list(graph: WeightedGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# n={graph.n} m={graph.m}\n")
        for a, b, w in zip(graph.u.tolist(), graph.v.tolist(), graph.w.tolist()):
            fh.write(f"{a} {b} {w!r}\n")


def _read_csv(path, header):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        head = next(reader, None)
        if head is None or tuple(h.strip() for h in head) != tuple(header):
            raise ParseError(path, 1, f"expected header {','.join(header)}")
        out = []
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(path, lineno, f"expected {len(header)} fields")
            out.append((lineno, [x.strip() for x in row]))
    return out


def _dense_column(path, header, n, cast=float):
    rows = _read_csv(path, header)
    vals = {}
    for lineno, (i, x) in rows:
        try:
            vals[int(i)] = cast(x)
        except ValueError as exc:
            raise ParseError(path, lineno, str(exc)) from None
    n = len(vals) if n is None else n
    if sorted(vals) != list(range(n)):
        raise ValueError(f"{path}: ids must be exactly 0..{n - 1}")
    return np.array([vals[i] for i in range(n)], dtype=float)


def load_costs_csv(path, n: int | None = None) -> np.ndarray:
    costs = _dense_column(path, ("id", "cost"), n)
    if np.any(costs <= 0):
        raise ValueError(f"{path}: costs must be positive")
    return costs


def write_costs_csv(costs, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "cost"])
        for i, c in enumerate(np.asarray(costs, dtype=float).tolist()):
            w.writerow([i, repr(c)])


def load_ratings_csv(path, n: int | None = None) -> np.ndarray:
    return _dense_column(path, ("item", "rating"), n)


def load_categories_csv(path) -> list[frozenset]:
    rows = _read_csv(path, ("item", "category"))
    cats: dict[str, set] = {}
    for lineno, (item, cat) in rows:
        try:
            cats.setdefault(cat, set()).add(int(item))
        except ValueError as exc:
            raise ParseError(path, lineno, str(exc)) from None
    return [frozenset(cats[k]) for k in sorted(cats)]
