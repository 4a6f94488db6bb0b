"""Group-contrastive loss over a selected subset, with its logit gradient.

Scores are ``beta * (log p_i + alpha * |r_i - r_bar|)`` where ``r_bar`` is
the mean reward over the selected subset. The loss is

    -log( sum_{pos} exp(s) / sum_{pos + neg} exp(s) )

and the policy is a categorical softmax over the candidate logits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class RefaConfig:
    alpha: float = 1.0
    inverse_temperature: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.alpha) or self.alpha < 0:
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")
        if not self.inverse_temperature > 0:
            raise ValueError(f"inverse_temperature must be > 0, got {self.inverse_temperature}")


def logsumexp(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    m = np.max(x)
    if not np.isfinite(m):
        return float(m)
    return float(m + np.log(np.sum(np.exp(x - m))))


def log_softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=float)
    return z - logsumexp(z)


def softmax(logits) -> np.ndarray:
    return np.exp(log_softmax(logits))


def _split(positive_indices: Iterable[int], negative_indices: Iterable[int]):
    pos = [int(i) for i in positive_indices]
    neg = [int(i) for i in negative_indices]
    if not pos:
        raise ValueError("at least one positive is required")
    overlap = set(pos) & set(neg)
    if overlap:
        raise ValueError(f"positive and negative sets overlap: {sorted(overlap)}")
    return pos, neg


def refa_scores(logprobs, rewards, subset: Sequence[int], config: RefaConfig) -> np.ndarray:
    """Scores for the members of ``subset``, in the order given."""
    subset = [int(i) for i in subset]
    if not subset:
        raise ValueError("subset must be nonempty")
    lp = np.asarray(logprobs, dtype=float)[subset]
    r = np.asarray(rewards, dtype=float)[subset]
    r_bar = r.mean()
    return config.inverse_temperature * (lp + config.alpha * np.abs(r - r_bar))


def refa_loss(scores, positive_indices, negative_indices) -> float:
    """Loss from per-candidate scores; indices address ``scores`` directly."""
    pos, neg = _split(positive_indices, negative_indices)
    s = np.asarray(scores, dtype=float)
    if not neg:
        return 0.0
    loss = logsumexp(s[pos + neg]) - logsumexp(s[pos])
    # the ratio is at most one; clamp rounding below zero
    return max(loss, 0.0)


def _full_scores(logits, rewards, pos, neg, config):
    subset = pos + neg
    scores = np.full(len(logits), -np.inf)
    scores[subset] = refa_scores(log_softmax(logits), rewards, subset, config)
    return scores


def refa_loss_from_logits(logits, rewards, positive_indices, negative_indices, config: RefaConfig) -> float:
    pos, neg = _split(positive_indices, negative_indices)
    return refa_loss(_full_scores(logits, rewards, pos, neg, config), pos, neg)


def refa_loss_grad(logits, rewards, positive_indices, negative_indices, config: RefaConfig):
    """Loss and its gradient with respect to the policy logits.

    With ``q`` the softmax of the scores over positives and negatives and
    ``p`` the softmax over positives only, ``dL/ds = q - p`` (zero outside the
    subset), each scaled by beta through the score. Log-softmax contributes
    ``J = I - 1 pi^T``, so ``dL/dz = g - pi * sum(g)``; ``sum(g)`` is zero in
    exact arithmetic but is kept for robustness.
    """
    pos, neg = _split(positive_indices, negative_indices)
    z = np.asarray(logits, dtype=float)
    scores = _full_scores(z, rewards, pos, neg, config)
    loss = refa_loss(scores, pos, neg)
    g = np.zeros_like(z)
    if neg:
        subset = pos + neg
        q = np.exp(scores[subset] - logsumexp(scores[subset]))
        p = np.exp(scores[pos] - logsumexp(scores[pos]))
        g[subset] += q
        g[pos] -= p
        g *= config.inverse_temperature
    grad = g - softmax(z) * g.sum()
    return loss, grad
