import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import all_subsets, naive_cut, naive_revenue, naive_videorec, random_dense
from submodknap import CutObjective, RevenueObjective, VideoRecObjective, WeightedGraph, make_rng
from submodknap.core import lattice_violations, submodularity_violations
from submodknap.objectives import cut_value, revenue_value, videorec_value


# --------------------------------------------------------------------------- #
# graph container
# --------------------------------------------------------------------------- #

def test_graph_symmetric_no_loops():
    g = WeightedGraph.from_edges(4, [(2, 1, 0.3), (1, 1, 0.9), (0, 3, 0.5), (1, 2, 0.7)])
    D = g.dense()
    np.testing.assert_array_equal(D, D.T)
    assert np.all(np.diag(D) == 0)
    assert g.m == 2
    # repeated pair keeps the last weight
    assert D[1, 2] == 0.7
    np.testing.assert_allclose(g.degree, [0.5, 0.7, 0.7, 0.5])
    assert sorted(g.neighbors(1).tolist()) == [2]


def test_graph_rejects_bad_input():
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(2, [(0, 1, 1.5)])
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(2, [(0, 2, 0.5)])
    with pytest.raises(ValueError):
        WeightedGraph.from_dense([[0, 1], [0.5, 0]])


def test_from_dense_round_trip():
    W = random_dense(6, make_rng(3))
    np.testing.assert_allclose(WeightedGraph.from_dense(W).dense(), W)


# --------------------------------------------------------------------------- #
# cut
# --------------------------------------------------------------------------- #

def test_cut_examples(triangle, path3):
    obj = CutObjective(triangle)
    assert cut_value(obj, {0}) == 2
    assert cut_value(obj, set()) == 0
    assert cut_value(obj, {0, 1, 2}) == 0
    p = CutObjective(path3)
    assert cut_value(p, {1}) == 2
    assert cut_value(p, {0}) == 1


def test_cut_path_matches_enumeration(path3):
    obj = CutObjective(path3)
    W = path3.dense()
    for S in all_subsets(3):
        assert obj.evaluate(S) == naive_cut(W, S)


def test_cut_nonnegative_exhaustive():
    rng = make_rng(11)
    for n in (5, 9, 12):
        W = random_dense(n, rng)
        obj = CutObjective(WeightedGraph.from_dense(W))
        X = ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(bool)
        vals = obj.evaluate_masks(X)
        assert vals.min() >= 0
        assert vals[0] == 0 and vals[-1] == 0


# --------------------------------------------------------------------------- #
# video recommendation
# --------------------------------------------------------------------------- #

def _two_videos():
    g = WeightedGraph.from_edges(2, [(0, 1, 0.5)])
    return VideoRecObjective(g, [1.0, 1.0], [{0, 1}], lam=3, mu=7, alpha=1, beta=1)


def test_videorec_examples():
    obj = _two_videos()
    assert videorec_value(obj, set()) == 0
    assert videorec_value(obj, {0}) == pytest.approx(1.5)
    assert videorec_value(obj, {0, 1}) == pytest.approx(-7.0)


def test_videorec_matches_formula():
    rng = make_rng(5)
    n = 7
    W = random_dense(n, rng, 0.6)
    rho = rng.random(n) * 5
    cats = [{0, 1, 2}, {2, 3}, {5, 6, 0}]
    obj = VideoRecObjective(WeightedGraph.from_dense(W), rho, cats, lam=3, mu=7,
                            alpha=0.7, beta=1.3)
    X = ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(bool)
    batch = obj.evaluate_masks(X)
    for k, S in enumerate(np.flatnonzero(r).tolist() for r in X):
        ref = naive_videorec(W, rho, cats, 3, 7, 0.7, 1.3, S)
        assert obj.evaluate(S) == pytest.approx(ref, abs=1e-9)
        assert batch[k] == pytest.approx(ref, abs=1e-9)


def test_videorec_lam_one_is_cut():
    rng = make_rng(8)
    for n in (4, 6, 8):
        W = random_dense(n, rng, 0.7)
        g = WeightedGraph.from_dense(W)
        vid = VideoRecObjective(g, rng.random(n), [set(range(n))], lam=1, mu=0, alpha=0, beta=1)
        cut = CutObjective(g)
        for S in all_subsets(n):
            assert vid.evaluate(S) == pytest.approx(cut.evaluate(S), abs=1e-12)


def test_videorec_validation():
    g = WeightedGraph.from_edges(2, [(0, 1, 0.5)])
    with pytest.raises(ValueError):
        VideoRecObjective(g, [1, 1], lam=0.5)
    with pytest.raises(ValueError):
        VideoRecObjective(g, [1, 1], mu=-1)
    with pytest.raises(ValueError):
        VideoRecObjective(g, [1])
    with pytest.raises(ValueError):
        VideoRecObjective(g, [1, -1])


# --------------------------------------------------------------------------- #
# revenue
# --------------------------------------------------------------------------- #

def test_revenue_examples(triangle):
    g2 = WeightedGraph.from_edges(2, [(0, 1, 0.25)])
    r2 = RevenueObjective(g2, [1.0, 2.0])
    assert revenue_value(r2, set()) == 0
    assert revenue_value(r2, {0}) == pytest.approx(1.0)
    tri = RevenueObjective(triangle, [1.0, 1.0, 1.0])
    assert revenue_value(tri, {0, 1}) == pytest.approx(math.sqrt(2))
    assert revenue_value(tri, {0, 1}) == pytest.approx(naive_revenue(triangle.dense(), [1, 1, 1],
                                                                     {0, 1}))


def test_revenue_non_monotone(triangle):
    tri = RevenueObjective(triangle, [1.0, 1.0, 1.0])
    assert tri.evaluate({0, 1}) > tri.evaluate({0, 1, 2})


def test_revenue_matches_formula():
    rng = make_rng(21)
    n = 8
    W = random_dense(n, rng, 0.5)
    a = rng.random(n) * 3
    obj = RevenueObjective(WeightedGraph.from_dense(W), a)
    X = ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(bool)
    batch = obj.evaluate_masks(X)
    for k, row in enumerate(X):
        S = np.flatnonzero(row).tolist()
        ref = naive_revenue(W, a, S)
        assert obj.evaluate(S) == pytest.approx(ref, abs=1e-9)
        assert batch[k] == pytest.approx(ref, abs=1e-9)


# --------------------------------------------------------------------------- #
# properties shared by every objective
# --------------------------------------------------------------------------- #

def _objectives(n, seed):
    rng = make_rng(seed)
    W = random_dense(n, rng, 0.5)
    g = WeightedGraph.from_dense(W)
    cats = [set(rng.choice(n, size=max(1, n // 3), replace=False).tolist()) for _ in range(3)]
    return [
        CutObjective(g),
        VideoRecObjective(g, rng.random(n) * 2, cats, lam=3, mu=7, alpha=1, beta=1),
        VideoRecObjective(g, rng.random(n), cats, lam=1, mu=0.5, alpha=0.3, beta=2),
        RevenueObjective(g, rng.random(n) * 3),
    ]


@pytest.mark.parametrize("seed", range(4))
def test_submodular_random_triples(seed):
    n = 12
    for obj in _objectives(n, seed):
        assert obj.evaluate([]) == 0
        assert submodularity_violations(obj, make_rng(100 + seed), count=500) == []
        assert lattice_violations(obj, make_rng(200 + seed), count=200) == []


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 10), seed=st.integers(0, 2 ** 31), data=st.data())
def test_incremental_gains_match_fresh(n, seed, data):
    order = data.draw(st.permutations(range(n)))
    k = data.draw(st.integers(0, n - 1))
    for obj in _objectives(n, seed):
        state = obj.gain_state()
        S = []
        for i in order[:k]:
            state.add(i)
            S.append(i)
        assert state.value == pytest.approx(obj.evaluate(S), abs=1e-9)
        rest = np.array(order[k:])
        fresh = np.array([obj.marginal(int(i), S) for i in rest])
        np.testing.assert_allclose(state.gains(rest), fresh, atol=1e-9)
        # single-item path of the revenue tracker
        np.testing.assert_allclose(state.gain(int(rest[0])), fresh[0], atol=1e-9)
