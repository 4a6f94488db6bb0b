"""Reference computations kept independent of the package internals.

Plain Python loops, no shared helpers, so a bug in the vectorized code
cannot cancel against the same bug here.
"""

import itertools
import math

import numpy as np
from scipy.spatial.distance import cdist


def l2(a, b):
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def naive_cost(dist, weights, s):
    return sum(w * min(dist[i][j] for j in s) for i, w in enumerate(weights))


def naive_exact(dist, weights, k, eligible=None):
    """Full enumeration; first subset in lexicographic order wins ties."""
    eligible = range(len(weights)) if eligible is None else eligible
    best, best_cost = None, math.inf
    for s in itertools.combinations(eligible, k):
        c = naive_cost(dist, weights, s)
        if c < best_cost:
            best, best_cost = s, c
    return best, best_cost


def bottomk_reference(rewards, embeddings, k, exclude):
    """Literal transcription of the documented Bottom-K tie rule."""

    def cos(a, b):
        na, nb = math.sqrt(sum(x * x for x in a)), math.sqrt(sum(x * x for x in b))
        if na == 0 or nb == 0:
            return 0.0
        return sum(x * y for x, y in zip(a, b)) / (na * nb)

    pool = [i for i in range(len(rewards)) if i != exclude]
    chosen = []
    while len(chosen) < k:
        rest = [i for i in pool if i not in chosen]
        low = min(rewards[i] for i in rest)
        tied = [i for i in rest if rewards[i] == low]
        if len(tied) == 1 or not chosen:
            chosen.append(min(tied))
            continue
        scores = {i: max(cos(embeddings[i], embeddings[j]) for j in chosen) for i in tied}
        best = min(scores.values())
        chosen.append(min(i for i in tied if scores[i] - best <= 1e-12))
    return chosen


def best_two_partition(points):
    """Exhaustive search for the 2-partition with least within-group SSE."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    best, best_sse = None, math.inf
    for mask in range(1, 2 ** (n - 1)):
        a = [i for i in range(n) if mask >> i & 1]
        b = [i for i in range(n) if not mask >> i & 1]
        sse = sum(((pts[g] - pts[g].mean(axis=0)) ** 2).sum() for g in (a, b))
        if sse < best_sse:
            best, best_sse = (frozenset(a), frozenset(b)), sse
    return set(best), best_sse


def central_difference(f, x, h=1e-5):
    x = np.asarray(x, dtype=float)
    out = []
    for i in range(len(x)):
        up, down = x.copy(), x.copy()
        up[i] += h
        down[i] -= h
        out.append((f(up) - f(down)) / (2 * h))
    return np.array(out)


def refa_loss_direct(logits, rewards, pos, neg, alpha, beta):
    """Loss evaluated straight from the formula, no max-subtraction."""
    z = np.asarray(logits, dtype=float)
    logp = z - math.log(sum(math.exp(v) for v in z))
    subset = list(pos) + list(neg)
    rbar = sum(rewards[i] for i in subset) / len(subset)
    s = {i: beta * (logp[i] + alpha * abs(rewards[i] - rbar)) for i in subset}
    num = sum(math.exp(s[i]) for i in pos)
    den = sum(math.exp(s[i]) for i in subset)
    return -math.log(num / den)


def saturating_reward_direct(rewards, dist, s, l):
    """Build the cap-saturating distribution by hand and take its mean reward."""
    n = len(rewards)
    top = max(range(n), key=lambda i: (rewards[i], -i))
    p = [0.0] * n
    for i in range(n):
        if i == top or i in s:
            continue
        p[i] = l * min(dist[i][j] for j in s)
    p[top] = 1.0 - sum(p)
    return sum(r * q for r, q in zip(rewards, p))


def listing_local_search(vectors, rating, k, random_seed=42):
    """Transcription of the published local-search selection routine.

    Returns (top index, sorted negatives) in original indexing.
    """
    rating_min = np.min(rating)
    rating_max = np.max(rating)
    rating_normalized = (rating - rating_min) / (rating_max - rating_min) if rating_max > rating_min else np.zeros_like(rating) + 0.5

    excluded_top_index = int(np.argmax(rating_normalized))
    new_to_old = [idx for idx in range(len(rating_normalized)) if idx != excluded_top_index]
    vectors_reduced = np.delete(vectors, excluded_top_index, axis=0)
    rating_reduced = np.delete(rating_normalized, excluded_top_index)

    distance_matrix = cdist(vectors_reduced, vectors_reduced, metric="euclidean")
    distance_matrix /= distance_matrix.max() if distance_matrix.max() > 1e-12 else 1

    mean_rating_reduced = np.mean(rating_reduced)
    w = np.exp(mean_rating_reduced - rating_reduced)

    def compute_objective(chosen_set):
        return sum(w[i] * min(distance_matrix[i, j] for j in chosen_set) for i in range(len(w)))

    rng = np.random.default_rng(random_seed)
    all_indices = np.arange(len(rating_reduced))
    current_set = set(rng.choice(all_indices, size=k, replace=False)) if k < len(rating_reduced) else set(all_indices)
    current_cost = compute_objective(current_set)

    improved = True
    while improved:
        improved = False
        best_swap = (None, None, 0)
        for j_out in list(current_set):
            for j_in in all_indices:
                if j_in not in current_set:
                    candidate_set = (current_set - {j_out}) | {j_in}
                    improvement = current_cost - compute_objective(candidate_set)
                    if improvement > best_swap[2]:
                        best_swap = (j_out, j_in, improvement)
        if best_swap[2] > 1e-12:
            current_set.remove(best_swap[0])
            current_set.add(best_swap[1])
            current_cost -= best_swap[2]
            improved = True

    chosen = [new_to_old[j] for j in sorted(current_set)]
    return excluded_top_index, chosen
