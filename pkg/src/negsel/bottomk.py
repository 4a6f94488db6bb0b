"""Lowest-reward negative selection."""

from __future__ import annotations

import numpy as np

from .pool import CandidatePool, Method, SelectionResult, _cosine


def _check_k(k: int, n: int):
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in [1, {n - 1}], got {k}")


def select_bottom_k(pool: CandidatePool, k: int, exclude: int) -> SelectionResult:
    """Pick the ``k`` smallest rewards among the candidates other than ``exclude``.

    Rewards are compared exactly. Candidates tied at the cut-off are admitted
    one at a time: the next one is the tied candidate whose largest cosine
    similarity to the negatives chosen so far is smallest. With nothing
    chosen yet, the lowest index goes first. Remaining ties also go to the
    lowest index.
    """
    n = pool.n
    _check_k(k, n)
    if not 0 <= exclude < n:
        raise IndexError(f"exclude index {exclude} out of range")
    rewards = pool.rewards
    eligible = [i for i in range(n) if i != exclude]
    # stable sort keeps index order within equal rewards
    ordered = sorted(eligible, key=lambda i: rewards[i])
    boundary = rewards[ordered[k - 1]]

    chosen = [i for i in ordered if rewards[i] < boundary]
    tied = [i for i in ordered if rewards[i] == boundary]
    emb = [c.embedding for c in pool.candidates]
    while len(chosen) < k:
        if not chosen:
            pick = min(tied)
        else:
            def closeness(i):
                return round(max(_cosine(emb[i], emb[j]) for j in chosen), 12)

            pick = min(tied, key=lambda i: (closeness(i), i))
        chosen.append(pick)
        tied.remove(pick)

    return SelectionResult(
        positive_index=exclude,
        negative_indices=tuple(chosen),
        method=Method.BOTTOMK,
    )
