"""Candidate pools, pairwise geometry and selection results.

A pool holds the N sampled responses for one prompt. Every selector reads
the same dense distance matrix, so it is computed once at construction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

# Below this, a distance matrix is treated as all-zero and left unscaled.
ZERO_DISTANCE = 1e-12


class PoolError(ValueError):
    """Raised when candidates cannot form a valid pool."""

    def __init__(self, message: str, candidate_id: Optional[str] = None):
        super().__init__(message)
        self.candidate_id = candidate_id


class Method(str, enum.Enum):
    BOTTOMK = "bottomk"
    CORESET = "coreset"
    OPTSELECT_EXACT = "optselect-exact"
    OPTSELECT_LOCAL = "optselect-local"


@dataclass(frozen=True)
class Candidate:
    id: str
    reward: float
    embedding: np.ndarray
    logprob: Optional[float] = None
    text: Optional[str] = None

    def __post_init__(self):
        emb = np.asarray(self.embedding, dtype=float)
        if emb.ndim != 1:
            raise PoolError(f"embedding of {self.id!r} must be a flat vector", self.id)
        emb.setflags(write=False)
        object.__setattr__(self, "embedding", emb)
        if not np.isfinite(self.reward):
            raise PoolError(f"reward of {self.id!r} is not finite", self.id)
        if self.logprob is not None and self.logprob > 0:
            raise PoolError(f"logprob of {self.id!r} is positive", self.id)


@dataclass(frozen=True)
class CandidatePool:
    prompt_id: str
    candidates: tuple
    distance_matrix: np.ndarray
    distance_normalized: bool
    # Pre-normalization maximum, kept so the raw matrix can be recovered.
    distance_scale: float = 1.0

    @property
    def n(self) -> int:
        return len(self.candidates)

    @property
    def rewards(self) -> np.ndarray:
        return np.array([c.reward for c in self.candidates], dtype=float)

    @property
    def embeddings(self) -> np.ndarray:
        return np.vstack([c.embedding for c in self.candidates])

    @property
    def logprobs(self) -> Optional[np.ndarray]:
        if any(c.logprob is None for c in self.candidates):
            return None
        return np.array([c.logprob for c in self.candidates], dtype=float)

    @property
    def ids(self) -> list:
        return [c.id for c in self.candidates]


@dataclass(frozen=True)
class SelectionResult:
    positive_index: int
    negative_indices: tuple
    method: Method
    objective_value: Optional[float] = None
    seed: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        negs = tuple(int(i) for i in self.negative_indices)
        if len(set(negs)) != len(negs):
            raise ValueError(f"duplicate negative indices: {negs}")
        if self.positive_index in negs:
            raise ValueError("positive index appears among the negatives")
        object.__setattr__(self, "negative_indices", negs)
        object.__setattr__(self, "method", Method(self.method))

    @property
    def k(self) -> int:
        return len(self.negative_indices)


def pairwise_distances(embeddings: np.ndarray) -> np.ndarray:
    """Dense Euclidean distance matrix with an exact zero diagonal."""
    x = np.asarray(embeddings, dtype=float)
    diff = x[:, None, :] - x[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


def normalize_rewards(rewards: Sequence[float]) -> np.ndarray:
    """Min-max scale rewards to [0, 1]; a constant vector maps to 0.5."""
    r = np.asarray(rewards, dtype=float)
    lo, hi = r.min(), r.max()
    if hi > lo:
        return (r - lo) / (hi - lo)
    return np.zeros_like(r) + 0.5


def ingest_rewards(rewards: Sequence[float]) -> np.ndarray:
    """Normalize only when some reward falls outside [0, 1]."""
    r = np.asarray(rewards, dtype=float)
    if np.any(r < 0.0) or np.any(r > 1.0):
        return normalize_rewards(r)
    return r


def build_pool(
    candidates: Sequence[Candidate],
    normalize_distances: bool = True,
    prompt_id: str = "",
) -> CandidatePool:
    """Validate candidates and compute their pairwise L2 distances.

    With ``normalize_distances`` the matrix is divided by its largest entry,
    unless every distance is (numerically) zero.
    """
    cands = tuple(candidates)
    if len(cands) < 2:
        raise PoolError(f"a pool needs at least 2 candidates, got {len(cands)}")
    dim = cands[0].embedding.shape[0]
    for c in cands[1:]:
        if c.embedding.shape[0] != dim:
            raise PoolError(
                f"candidate {c.id!r} has embedding dimension {c.embedding.shape[0]}, expected {dim}",
                c.id,
            )
    d = pairwise_distances(np.vstack([c.embedding for c in cands]))
    scale = float(d.max())
    if normalize_distances and scale >= ZERO_DISTANCE:
        d = d / scale
    d.setflags(write=False)
    return CandidatePool(
        prompt_id=prompt_id,
        candidates=cands,
        distance_matrix=d,
        distance_normalized=normalize_distances,
        distance_scale=scale if normalize_distances and scale >= ZERO_DISTANCE else 1.0,
    )


def pool_from_arrays(
    embeddings,
    rewards,
    logprobs=None,
    normalize_distances: bool = True,
    prompt_id: str = "",
) -> CandidatePool:
    """Convenience constructor used by tests, scripts and the simulator."""
    emb = np.atleast_2d(np.asarray(embeddings, dtype=float))
    if emb.shape[0] == 1 and len(rewards) != 1:
        emb = emb.T
    lp = [None] * len(rewards) if logprobs is None else list(logprobs)
    cands = [
        Candidate(id=str(i), reward=float(r), embedding=e, logprob=None if p is None else float(p))
        for i, (e, r, p) in enumerate(zip(emb, rewards, lp))
    ]
    return build_pool(cands, normalize_distances=normalize_distances, prompt_id=prompt_id)


def top_reward_index(pool: CandidatePool) -> int:
    """Index of the highest reward; the smallest index wins ties."""
    return int(np.argmax(pool.rewards))


def cosine_similarity(pool: CandidatePool, i: int, j: int) -> float:
    n = pool.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"index out of range for pool of size {n}: ({i}, {j})")
    return _cosine(pool.candidates[i].embedding, pool.candidates[j].embedding)


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))
