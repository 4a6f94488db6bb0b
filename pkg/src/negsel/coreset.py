"""Cluster-then-pick-worst negative selection.

Embeddings of the non-positive candidates are clustered with k-means
(k-means++ seeding, Lloyd updates) and each cluster contributes its
lowest-reward member.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pool import CandidatePool, Method, SelectionResult


@dataclass(frozen=True)
class Clustering:
    assignments: np.ndarray
    centroids: np.ndarray
    iterations_run: int
    inertia: float
    # inertia after each completed Lloyd iteration
    inertia_history: tuple = ()

    def members(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == j)


def _sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def kmeans_plusplus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    closest = _sq_dists(points, points[chosen])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            # all remaining mass is zero: duplicates only
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(rest))
        chosen.append(nxt)
        closest = np.minimum(closest, _sq_dists(points, points[[nxt]])[:, 0])
    return points[chosen].copy()


def _repair_empty(points, centroids, assign, k):
    """Give each empty cluster the point farthest from its current centroid.

    Donors are restricted to clusters with more than one member so that a
    repair never empties another cluster.
    """
    for j in range(k):
        if np.any(assign == j):
            continue
        counts = np.bincount(assign, minlength=k)
        dist = np.sum((points - centroids[assign]) ** 2, axis=1)
        dist = np.where(counts[assign] > 1, dist, -np.inf)
        far = int(np.argmax(dist))
        assign[far] = j
        centroids[j] = points[far]
    return assign


def _inertia(points, centroids, assign) -> float:
    return float(np.sum((points - centroids[assign]) ** 2))


def kmeans(points, k: int, seed: int = 0, max_iters: int = 100) -> Clustering:
    """Lloyd's algorithm from k-means++ seeds, deterministic given ``seed``.

    Iterates until the assignment stops changing or ``max_iters`` is hit.
    Every cluster is nonempty on return.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}] for {n} points, got {k}")
    rng = np.random.default_rng(seed)
    centroids = kmeans_plusplus(x, k, rng)

    assign = None
    history = []
    it = 0
    for it in range(1, max_iters + 1):
        new = np.argmin(_sq_dists(x, centroids), axis=1)
        new = _repair_empty(x, centroids, new, k)
        for j in range(k):
            centroids[j] = x[new == j].mean(axis=0)
        history.append(_inertia(x, centroids, new))
        if assign is not None and np.array_equal(new, assign):
            assign = new
            break
        assign = new

    return Clustering(
        assignments=assign,
        centroids=centroids,
        iterations_run=it,
        inertia=history[-1],
        inertia_history=tuple(history),
    )


def select_coreset(
    pool: CandidatePool,
    k: int,
    exclude: int,
    seed: int = 0,
    max_iters: int = 100,
) -> SelectionResult:
    n = pool.n
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in [1, {n - 1}], got {k}")
    eligible = np.array([i for i in range(n) if i != exclude])
    rewards = pool.rewards[eligible]
    clustering = kmeans(pool.embeddings[eligible], k, seed=seed, max_iters=max_iters)

    negatives = []
    for j in range(k):
        members = clustering.members(j)
        # argmin returns the first minimum; members are in index order
        negatives.append(int(eligible[members[np.argmin(rewards[members])]]))

    return SelectionResult(
        positive_index=exclude,
        negative_indices=tuple(negatives),
        method=Method.CORESET,
        seed=seed,
        meta={
            "clusters": [eligible[clustering.members(j)].tolist() for j in range(k)],
            "iterations": clustering.iterations_run,
        },
    )
