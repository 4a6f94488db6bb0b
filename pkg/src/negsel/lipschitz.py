"""Expected reward of Lipschitz-constrained policies and checks on it.

Suppressing a negative ``j`` (``p_j = 0``) caps every other response at
``p_i <= L * D[i, j]``. The best-reward candidate is left uncapped. The
saturating policy puts each capped response exactly at its cap and gives
the remainder to the top response, so its expected reward equals
``r_max - L * cost(S)`` under unnormalized gap weights ``r_max - r_i``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .optselect import coverage_cost, make_instance
from .pool import CandidatePool, top_reward_index
from .weights import max_gaps, weights_max_gap_normalized

FEASIBILITY_TOL = 1e-12
# relative slack used to collect ties into optimizer families
FAMILY_TOL = 1e-12


class InfeasibleNegativeSet(ValueError):
    pass


@dataclass(frozen=True)
class LipschitzPolicy:
    probabilities: np.ndarray
    lipschitz_constant: float
    negative_set: frozenset
    positive_index: int


def _check_set(pool: CandidatePool, s: Iterable[int], top: int) -> list:
    s = sorted({int(j) for j in s})
    if not s:
        raise ValueError("negative set must be nonempty")
    if top in s:
        raise ValueError("the positive index cannot be a negative")
    if s[0] < 0 or s[-1] >= pool.n:
        raise IndexError(f"negative index out of range for pool of size {pool.n}")
    return s


def min_distances(pool: CandidatePool, s: Sequence[int]) -> np.ndarray:
    return pool.distance_matrix[:, list(s)].min(axis=1)


def capped_mass(pool: CandidatePool, s: Iterable[int]) -> float:
    """Sum of nearest-negative distances over responses that are neither
    negatives nor the top response."""
    top = top_reward_index(pool)
    s = _check_set(pool, s, top)
    md = min_distances(pool, s)
    free = [i for i in range(pool.n) if i != top and i not in s]
    return float(md[free].sum())


def feasibility_check(pool: CandidatePool, s: Iterable[int], l: float) -> bool:
    """Whether some distribution satisfies the caps induced by ``s``."""
    if l <= 0:
        return True
    return capped_mass(pool, s) <= 1.0 / l


def saturating_policy(pool: CandidatePool, s: Iterable[int], l: float) -> LipschitzPolicy:
    top = top_reward_index(pool)
    s = _check_set(pool, s, top)
    md = min_distances(pool, s)
    p = l * md
    p[s] = 0.0
    p[top] = 0.0
    remainder = 1.0 - p.sum()
    if remainder < -FEASIBILITY_TOL:
        raise InfeasibleNegativeSet(
            f"caps sum to {p.sum():.6g} > 1 for L={l}; negative set {s} is infeasible"
        )
    p[top] = max(remainder, 0.0)
    return LipschitzPolicy(p, float(l), frozenset(s), top)


def saturating_reward(pool: CandidatePool, s: Iterable[int], l: float) -> float:
    policy = saturating_policy(pool, s, l)
    return float(np.dot(pool.rewards, policy.probabilities))


def gap_cost(pool: CandidatePool, s: Iterable[int], normalized: bool = False) -> float:
    """Coverage cost over the whole pool with gap weights ``r_max - r_i``."""
    top = top_reward_index(pool)
    s = _check_set(pool, s, top)
    r = pool.rewards
    w = weights_max_gap_normalized(r).values if normalized else max_gaps(r)
    eligible = [i for i in range(pool.n) if i != top]
    inst = make_instance(pool, len(s), w, range(pool.n), eligible)
    return coverage_cost(inst, s)


@dataclass
class EquivalenceReport:
    n: int
    k: int
    lipschitz: float
    feasible_count: int
    cost_argmin: set = field(default_factory=set)
    reward_argmax: set = field(default_factory=set)
    costs: dict = field(default_factory=dict)
    rewards: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.feasible_count == 0 or self.cost_argmin == self.reward_argmax


def _family(values: dict, best: float) -> set:
    tol = FAMILY_TOL * max(1.0, abs(best))
    return {s for s, v in values.items() if abs(v - best) <= tol}


def verify_optimality_equivalence(pool: CandidatePool, k: int, l: float, max_n: int = 14) -> EquivalenceReport:
    """Enumerate feasible size-k negative sets; compare the two optimizer families.

    The cost side minimizes the unnormalized gap-weighted coverage cost, the
    reward side maximizes the saturating policy's expected reward; each is
    computed on its own.
    """
    if pool.n > max_n:
        raise ValueError(f"enumeration limited to N <= {max_n}, got {pool.n}")
    top = top_reward_index(pool)
    others = [i for i in range(pool.n) if i != top]
    if not 1 <= k <= len(others):
        raise ValueError(f"k must be in [1, {len(others)}], got {k}")
    costs, rewards = {}, {}
    for s in itertools.combinations(others, k):
        if not feasibility_check(pool, s, l):
            continue
        costs[s] = gap_cost(pool, s)
        rewards[s] = saturating_reward(pool, s, l)
    report = EquivalenceReport(pool.n, k, l, len(costs), costs=costs, rewards=rewards)
    if costs:
        report.cost_argmin = _family(costs, min(costs.values()))
        report.reward_argmax = _family(rewards, max(rewards.values()))
    return report


@dataclass
class AdditiveBoundReport:
    negatives: tuple
    d_max: float
    normalized_cost: float
    r_max: float
    lipschitz: float

    @property
    def slack(self) -> float:
        return self.d_max - self.normalized_cost

    @property
    def reward_bound(self) -> float:
        return self.r_max - self.lipschitz * self.d_max

    @property
    def attained_reward(self) -> float:
        return self.r_max - self.lipschitz * self.normalized_cost

    @property
    def passed(self) -> bool:
        return self.normalized_cost <= self.d_max and self.attained_reward >= self.reward_bound


def cluster_diameter(pool: CandidatePool, members: Sequence[int]) -> float:
    members = list(members)
    return float(pool.distance_matrix[np.ix_(members, members)].max())


def verify_additive_bound(
    pool: CandidatePool,
    clusters: Sequence[Sequence[int]],
    d_max: float,
    l: float,
    tol: float = 1e-12,
) -> AdditiveBoundReport:
    """Cost of one worst-reward representative per cluster against ``d_max``.

    ``clusters`` must partition either the non-top candidates or the whole
    pool, and each must have diameter at most ``d_max`` (in the pool's
    distance units). Representatives are never the top candidate.
    """
    top = top_reward_index(pool)
    others = {i for i in range(pool.n) if i != top}
    seen = []
    for c in clusters:
        seen.extend(int(i) for i in c)
    if len(seen) != len(set(seen)) or set(seen) not in (others, others | {top}):
        raise ValueError("clusters must partition the candidates exactly once")
    r = pool.rewards
    reps = []
    for j, c in enumerate(clusters):
        c = sorted(int(i) for i in c)
        if not c:
            raise ValueError(f"cluster {j} is empty")
        diam = cluster_diameter(pool, c)
        if diam > d_max + tol:
            raise ValueError(f"cluster {j} has diameter {diam:.6g} > d_max {d_max:.6g}")
        choices = [i for i in c if i != top]
        if not choices:
            raise ValueError(f"cluster {j} holds only the top candidate")
        reps.append(min(choices, key=lambda i: (r[i], i)))
    cost = gap_cost(pool, reps, normalized=True)
    return AdditiveBoundReport(tuple(reps), float(d_max), cost, float(r.max()), float(l))
