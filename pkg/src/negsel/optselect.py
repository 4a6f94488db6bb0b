"""Coverage-optimal negative selection.

The negatives S minimize the weighted coverage cost

    cost(S) = sum_i w_i * min_{j in S} D[i, j]

i.e. a weighted k-medoids objective over the candidates. ``solve_exact``
enumerates size-k subsets with branch-and-bound pruning, which is the same
optimum as the assignment MIP because each point's assignment distance
collapses to its nearest chosen center. ``solve_local_search`` is the 1-swap
steepest-descent heuristic.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .pool import CandidatePool, Method, SelectionResult, normalize_rewards, top_reward_index
from .weights import WeightScheme, compute_weights

EXACT_MAX_POINTS = 20
EXACT_MAX_SUBSETS = 2_000_000
# A swap must lower the cost by more than this to be taken.
SWAP_TOLERANCE = 1e-12


class Mode(str, enum.Enum):
    EXACT = "exact"
    LOCAL = "local"


class InstanceTooLarge(ValueError):
    """The exact solver refuses instances past its enumeration cap."""


@dataclass(frozen=True)
class CoverageInstance:
    """Weighted k-medoids instance over a subset of a pool.

    ``labels`` are pool indices of the covered points, ``weights`` and
    ``distances`` are aligned with them. ``eligible`` lists the labels allowed
    as centers; by default every covered point is eligible.
    """

    labels: tuple
    weights: np.ndarray
    distances: np.ndarray
    k: int
    eligible: Optional[tuple] = None

    def __post_init__(self):
        labels = tuple(int(i) for i in self.labels)
        w = np.asarray(self.weights, dtype=float)
        d = np.asarray(self.distances, dtype=float)
        if w.shape != (len(labels),) or d.shape != (len(labels), len(labels)):
            raise ValueError("weights/distances do not match labels")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        eligible = labels if self.eligible is None else tuple(int(i) for i in self.eligible)
        pos = {lab: p for p, lab in enumerate(labels)}
        missing = [e for e in eligible if e not in pos]
        if missing:
            raise ValueError(f"eligible labels not among covered points: {missing}")
        if not 1 <= self.k <= len(eligible):
            raise ValueError(f"k must be in [1, {len(eligible)}], got {self.k}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "eligible", eligible)
        object.__setattr__(self, "_pos", pos)
        # columns of the distance matrix restricted to eligible centers
        object.__setattr__(self, "_cols", d[:, [pos[e] for e in eligible]])

    @property
    def m(self) -> int:
        return len(self.eligible)

    def columns(self, s: Iterable[int]) -> list:
        """Positions (into ``eligible``) of the given center labels."""
        idx = {lab: c for c, lab in enumerate(self.eligible)}
        try:
            return [idx[int(j)] for j in s]
        except KeyError as e:
            raise ValueError(f"{e.args[0]} is not an eligible center") from None


def make_instance(
    pool: CandidatePool,
    k: int,
    weights: Sequence[float],
    covered: Sequence[int],
    eligible: Optional[Sequence[int]] = None,
) -> CoverageInstance:
    covered = list(covered)
    sub = pool.distance_matrix[np.ix_(covered, covered)]
    return CoverageInstance(tuple(covered), np.asarray(weights, float), sub, k, eligible)


def _cost_cols(inst: CoverageInstance, cols: Sequence[int]) -> float:
    return float(np.dot(inst.weights, inst._cols[:, list(cols)].min(axis=1)))


def coverage_cost(instance: CoverageInstance, s: Iterable[int]) -> float:
    s = list(s)
    if not s:
        raise ValueError("coverage cost of an empty set is undefined")
    return _cost_cols(instance, instance.columns(s))


def _result(inst, cols, cost, method, positive, seed, **meta) -> SelectionResult:
    negs = tuple(sorted(inst.eligible[c] for c in cols))
    return SelectionResult(
        positive_index=positive,
        negative_indices=negs,
        method=method,
        objective_value=cost,
        seed=seed,
        meta=meta,
    )


def check_exact_size(m: int, k: int, max_points: int = EXACT_MAX_POINTS):
    if m > max_points or math.comb(m, k) > EXACT_MAX_SUBSETS:
        raise InstanceTooLarge(
            f"exact solver cap exceeded (M={m}, k={k}, C(M,k)={math.comb(m, k)}; "
            f"limits M<={max_points}, C(M,k)<={EXACT_MAX_SUBSETS}); use local search"
        )


def solve_exact_cols(inst: CoverageInstance, max_points: int = EXACT_MAX_POINTS):
    """Branch-and-bound over column subsets in lexicographic order.

    Returns ``(cols, cost, visited)``. A branch is cut when its lower bound,
    the cost if every not-yet-decided column were also open, cannot beat the
    incumbent. Leaves are scored with the same expression as
    :func:`coverage_cost`, and only a strictly lower cost replaces the
    incumbent, so ties resolve to the lexicographically first subset.
    """
    m, k = inst.m, inst.k
    check_exact_size(m, k, max_points)
    cols_d = inst._cols
    w = inst.weights
    # suffix[t][i] = min distance from point i to any column >= t
    suffix = np.full((m + 1, cols_d.shape[0]), np.inf)
    for t in range(m - 1, -1, -1):
        suffix[t] = np.minimum(suffix[t + 1], cols_d[:, t])

    best_cost = np.inf
    best = None
    visited = 0

    def descend(start, chosen, cur):
        nonlocal best_cost, best, visited
        need = k - len(chosen)
        if need == 0:
            visited += 1
            cost = _cost_cols(inst, chosen)
            if cost < best_cost:
                best_cost, best = cost, tuple(chosen)
            return
        for t in range(start, m - need + 1):
            nxt = np.minimum(cur, cols_d[:, t])
            bound = float(np.dot(w, np.minimum(nxt, suffix[t + 1]))) if need > 1 else float(np.dot(w, nxt))
            if bound > best_cost * (1 + 1e-12) + 1e-300:
                continue
            chosen.append(t)
            descend(t + 1, chosen, nxt)
            chosen.pop()

    descend(0, [], np.full(cols_d.shape[0], np.inf))
    return best, best_cost, visited


def solve_exact(
    instance: CoverageInstance,
    positive_index: int = -1,
    max_points: int = EXACT_MAX_POINTS,
) -> SelectionResult:
    cols, cost, visited = solve_exact_cols(instance, max_points)
    return _result(
        instance, cols, cost, Method.OPTSELECT_EXACT, positive_index, 0, leaves_visited=visited
    )


def local_search_cols(inst: CoverageInstance, start: Sequence[int], max_sweeps: int = 10_000):
    """Steepest 1-swap descent from ``start`` (column positions).

    Each sweep scores every (out, in) exchange and applies the single best
    one if it improves the cost by more than ``SWAP_TOLERANCE``. Scan order is
    ascending, and a later swap only wins on strictly larger improvement.
    Returns ``(cols, cost, sweeps)``.
    """
    m = inst.m
    current = sorted(int(c) for c in start)
    cost = _cost_cols(inst, current)
    sweeps = 0
    d = inst._cols
    w = inst.weights
    while sweeps < max_sweeps:
        sweeps += 1
        inside = set(current)
        outside = [c for c in range(m) if c not in inside]
        best_gain, best_swap = 0.0, None
        for pos, out in enumerate(current):
            rest = current[:pos] + current[pos + 1:]
            base = d[:, rest].min(axis=1) if rest else np.full(d.shape[0], np.inf)
            if not outside:
                break
            # cost after swapping `out` for each outside column at once
            trial = np.dot(w, np.minimum(base[:, None], d[:, outside]))
            for c_in, new_cost in zip(outside, trial):
                gain = cost - new_cost
                if gain > best_gain:
                    best_gain, best_swap = gain, (out, c_in)
        if best_swap is None or best_gain <= SWAP_TOLERANCE:
            break
        current.remove(best_swap[0])
        current.append(best_swap[1])
        current.sort()
        cost = _cost_cols(inst, current)
    return current, cost, sweeps


def solve_local_search(
    instance: CoverageInstance,
    seed: int = 0,
    max_sweeps: int = 10_000,
    restarts: int = 1,
    positive_index: int = -1,
) -> SelectionResult:
    """Best of ``restarts`` local searches from seeded random starts.

    Starts are drawn with ``numpy.random.default_rng(seed).choice`` without
    replacement, one after another from the same generator. When ``k`` equals
    the number of eligible centers the start is the full set.
    """
    m, k = instance.m, instance.k
    rng = np.random.default_rng(seed)
    best = None
    runs = []
    for _ in range(max(1, restarts)):
        start = rng.choice(np.arange(m), size=k, replace=False) if k < m else np.arange(m)
        init_cost = _cost_cols(instance, start)
        cols, cost, sweeps = local_search_cols(instance, start, max_sweeps)
        runs.append({"initial_cost": init_cost, "cost": cost, "sweeps": sweeps})
        key = (cost, tuple(cols))
        if best is None or key < best:
            best = key
    cost, cols = best
    return _result(
        instance, cols, cost, Method.OPTSELECT_LOCAL, positive_index, seed,
        restarts=max(1, restarts), runs=runs,
    )


def one_swap_stable(instance: CoverageInstance, s: Iterable[int], tol: float = SWAP_TOLERANCE) -> bool:
    """True when no single exchange lowers the cost of ``s`` by more than ``tol``."""
    cols = instance.columns(s)
    cost = _cost_cols(instance, cols)
    outside = [c for c in range(instance.m) if c not in set(cols)]
    for pos in range(len(cols)):
        for c_in in outside:
            trial = cols[:pos] + [c_in] + cols[pos + 1:]
            if cost - _cost_cols(instance, trial) > tol:
                return False
    return True


def select_optselect(
    pool: CandidatePool,
    k: int,
    mode="local",
    weight_scheme="exp-mean",
    seed: int = 0,
    restarts: int = 1,
    max_sweeps: int = 10_000,
    reference_compatible: bool = False,
) -> SelectionResult:
    """Positive = best reward, negatives = coverage-optimal set of the rest.

    Weights are computed over the reduced set (positive removed), so the
    ``exp-mean`` reference reward is the reduced-set mean.

    ``reference_compatible`` reproduces the original batch procedure: rewards
    are min-max scaled before anything else (constant rewards become 0.5) and
    the reduced distance matrix is rescaled to a maximum of one.
    """
    mode = Mode(mode)
    n = pool.n
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in [1, {n - 1}], got {k}")
    rewards = normalize_rewards(pool.rewards) if reference_compatible else pool.rewards
    top = int(np.argmax(rewards)) if reference_compatible else top_reward_index(pool)
    reduced = [i for i in range(n) if i != top]
    weights = compute_weights(rewards[reduced], weight_scheme)
    inst = make_instance(pool, k, weights.values, reduced)
    if reference_compatible:
        dmax = inst.distances.max()
        if dmax > 1e-12:
            inst = CoverageInstance(inst.labels, inst.weights, inst.distances / dmax, k)

    if mode is Mode.EXACT:
        res = solve_exact(inst, positive_index=top)
    else:
        res = solve_local_search(inst, seed, max_sweeps, restarts, positive_index=top)
    meta = {**res.meta, "weight_scheme": WeightScheme(weight_scheme).value}
    return SelectionResult(top, res.negative_indices, res.method, res.objective_value, seed, meta)

