"""Bottom-K and k-means coreset selection."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from negsel.bottomk import select_bottom_k
from negsel.coreset import kmeans, select_coreset
from negsel.pool import pool_from_arrays

from oracles import best_two_partition, bottomk_reference


def test_bottomk_two_smallest():
    pool = pool_from_arrays(np.eye(4), [0.9, 0.1, 0.5, 0.3])
    res = select_bottom_k(pool, 2, exclude=0)
    assert set(res.negative_indices) == {1, 3}
    assert res.positive_index == 0


def test_bottomk_full_complement():
    pool = pool_from_arrays(np.eye(5), [0.9, 0.1, 0.5, 0.3, 0.2])
    res = select_bottom_k(pool, 4, exclude=0)
    assert sorted(res.negative_indices) == [1, 2, 3, 4]


def test_bottomk_empty_set_tie_falls_back_to_index():
    # candidate 2 is the most dissimilar one, but nothing is selected yet
    emb = [[1, 0], [1, 0.1], [-1, 0], [1, 0.2]]
    pool = pool_from_arrays(emb, [0.9, 0.2, 0.2, 0.2])
    assert select_bottom_k(pool, 1, exclude=0).negative_indices == (1,)


def test_bottomk_tie_uses_cosine_against_selected():
    emb = [[0, 1], [1, 0], [0.9, 0.1], [-1, 0.05], [1, 0.01]]
    rewards = [0.9, 0.1, 0.3, 0.3, 0.3]
    pool = pool_from_arrays(emb, rewards)
    res = select_bottom_k(pool, 3, exclude=0)
    # 1 first by reward; then 3 (antiparallel to 1), then 2 (least similar to {1, 3})
    assert res.negative_indices == tuple(bottomk_reference(rewards, emb, 3, 0))
    assert res.negative_indices[:2] == (1, 3)


def test_bottomk_k_out_of_range():
    pool = pool_from_arrays(np.eye(3), [0.1, 0.2, 0.3])
    for k in (0, 3):
        with pytest.raises(ValueError):
            select_bottom_k(pool, k, exclude=2)


@settings(max_examples=150, deadline=None)
@given(
    st.integers(3, 9).flatmap(lambda n: st.tuples(
        st.lists(st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]), min_size=n, max_size=n),
        st.lists(st.lists(st.integers(-3, 3), min_size=2, max_size=2), min_size=n, max_size=n),
        st.integers(1, n - 1),
    ))
)
def test_bottomk_matches_reference_and_order_property(case):
    rewards, emb, k = case
    n = len(rewards)
    exclude = int(np.argmax(rewards))
    pool = pool_from_arrays(np.array(emb, float), rewards)
    res = select_bottom_k(pool, k, exclude)
    # admission order below the cut-off is not part of the contract
    assert set(res.negative_indices) == set(bottomk_reference(rewards, emb, k, exclude))
    chosen = set(res.negative_indices)
    rest = [i for i in range(n) if i != exclude and i not in chosen]
    if rest:
        assert max(rewards[i] for i in chosen) <= min(rewards[i] for i in rest)
    assert res == select_bottom_k(pool, k, exclude)


# k-means

def test_kmeans_k_equals_n_singletons():
    pts = np.random.default_rng(1).normal(size=(6, 2))
    c = kmeans(pts, 6, seed=3)
    assert sorted(c.assignments.tolist()) == list(range(6))
    assert c.inertia == 0.0


def test_kmeans_single_cluster_is_mean():
    pts = np.random.default_rng(2).normal(size=(7, 3))
    c = kmeans(pts, 1)
    np.testing.assert_allclose(c.centroids[0], pts.mean(axis=0), rtol=1e-14)


@pytest.mark.parametrize("seed", range(10))
def test_kmeans_separated_groups_match_exhaustive_partition(seed):
    rng = np.random.default_rng(seed)
    na = int(rng.integers(2, 6))
    nb = int(rng.integers(2, 10 - na + 1))
    a = rng.normal(scale=0.1, size=(na, 2))
    b = rng.normal(scale=0.1, size=(nb, 2)) + np.array([20.0, 0.0])
    pts = np.vstack([a, b])
    best, _ = best_two_partition(pts)
    c = kmeans(pts, 2, seed=seed)
    found = {frozenset(np.flatnonzero(c.assignments == j).tolist()) for j in (0, 1)}
    assert found == best


def test_kmeans_rejects_too_many_clusters():
    with pytest.raises(ValueError):
        kmeans(np.zeros((3, 2)), 4)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 12), st.integers(1, 5))
def test_kmeans_invariants(seed, n, k):
    k = min(k, n)
    pts = np.random.default_rng(seed).normal(size=(n, 2))
    c = kmeans(pts, k, seed=seed)
    assert set(c.assignments.tolist()) == set(range(k))
    hist = np.array(c.inertia_history)
    assert np.all(np.diff(hist) <= 1e-12 * max(1.0, hist[0]))
    c2 = kmeans(pts, k, seed=seed)
    assert np.array_equal(c.assignments, c2.assignments)


def test_kmeans_duplicates_repair():
    c = kmeans(np.ones((5, 2)), 3, seed=0)
    assert set(c.assignments.tolist()) == {0, 1, 2}


# coreset

def test_coreset_singleton_clusters():
    rng = np.random.default_rng(0)
    pool = pool_from_arrays(rng.normal(size=(6, 2)), rng.uniform(size=6))
    top = int(np.argmax(pool.rewards))
    res = select_coreset(pool, 5, top, seed=1)
    assert sorted(res.negative_indices) == [i for i in range(6) if i != top]


def test_coreset_two_separated_clusters():
    emb = [[0, 0], [0.1, 0], [10, 10], [10.1, 10], [0, 0.1]]
    rewards = [0.9, 0.1, 0.8, 0.2, 0.5]
    pool = pool_from_arrays(emb, rewards)
    res = select_coreset(pool, 2, exclude=0, seed=0)
    assert set(res.negative_indices) == {1, 3}


def test_coreset_identical_embeddings_repair():
    rewards = [0.9, 0.3, 0.1, 0.7, 0.4]
    pool = pool_from_arrays(np.ones((5, 3)), rewards)
    res = select_coreset(pool, 2, exclude=0, seed=4)
    assert len(set(res.negative_indices)) == 2
    assert 2 in res.negative_indices


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 14), st.integers(1, 6))
def test_coreset_picks_cluster_minimum(seed, n, k):
    k = min(k, n - 1)
    rng = np.random.default_rng(seed)
    pool = pool_from_arrays(rng.normal(size=(n, 3)), rng.uniform(size=n))
    top = int(np.argmax(pool.rewards))
    res = select_coreset(pool, k, top, seed=seed)
    assert len(res.negative_indices) == k and top not in res.negative_indices
    r = pool.rewards
    for neg, members in zip(res.negative_indices, res.meta["clusters"]):
        assert neg in members
        assert r[neg] == min(r[i] for i in members)
    assert res == select_coreset(pool, k, top, seed=seed)
