"""Per-candidate suppression weights.

Two conventions are in use. Selectors default to ``exp-mean`` weights,
``exp(mean - r_i)``. The Lipschitz checks use gaps to the best reward,
``r_max - r_i``, normalized to sum to one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class WeightScheme(str, enum.Enum):
    EXP_MEAN = "exp-mean"
    MAX_GAP = "max-gap"


@dataclass(frozen=True)
class WeightVector:
    scheme: WeightScheme
    values: np.ndarray
    reference_reward: float

    def __len__(self):
        return len(self.values)


def _as_rewards(rewards: Sequence[float]) -> np.ndarray:
    r = np.asarray(rewards, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("rewards must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(r)):
        raise ValueError("rewards must be finite")
    return r


def weights_exp_mean_gap(rewards: Sequence[float]) -> WeightVector:
    r = _as_rewards(rewards)
    mean = float(np.mean(r))
    return WeightVector(WeightScheme.EXP_MEAN, np.exp(mean - r), mean)


def max_gaps(rewards: Sequence[float]) -> np.ndarray:
    """Unnormalized gaps ``r_max - r_i``."""
    r = _as_rewards(rewards)
    return r.max() - r


def weights_max_gap_normalized(rewards: Sequence[float]) -> WeightVector:
    """Gaps to the best reward scaled to sum to one.

    If every reward is equal the gaps vanish; weights then fall back to
    uniform ``1/N`` so the coverage cost becomes the plain k-medoids cost.
    """
    r = _as_rewards(rewards)
    gaps = r.max() - r
    total = gaps.sum()
    if total > 0:
        values = gaps / total
    else:
        values = np.full(r.shape, 1.0 / r.size)
    return WeightVector(WeightScheme.MAX_GAP, values, float(r.max()))


def compute_weights(rewards: Sequence[float], scheme) -> WeightVector:
    scheme = WeightScheme(scheme)
    if scheme is WeightScheme.EXP_MEAN:
        return weights_exp_mean_gap(rewards)
    return weights_max_gap_normalized(rewards)
