"""One-positive-vs-K-negatives training loop on a categorical toy policy.

The policy is a softmax over the logits of a fixed candidate pool. Each
round picks the best-reward positive and K negatives, then takes plain
gradient steps on the contrastive loss with respect to the logits.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .bottomk import select_bottom_k
from .coreset import select_coreset
from .optselect import select_optselect
from .pool import CandidatePool, Method, SelectionResult, pool_from_arrays, top_reward_index
from .refa import RefaConfig, refa_loss_grad, softmax


class SimulationDiverged(RuntimeError):
    def __init__(self, step: int, loss: float):
        super().__init__(f"non-finite loss {loss} at step {step}")
        self.step = step


@dataclass
class PolicyState:
    logits: np.ndarray
    step: int = 0

    @property
    def probabilities(self) -> np.ndarray:
        return softmax(self.logits)


@dataclass
class SimConfig:
    method: str = "optselect-local"
    k: int = 5
    alpha: float = 1.0
    inverse_temperature: float = 1.0
    learning_rate: float = 0.1
    steps: int = 500
    # a value larger than `steps` keeps the first selection throughout
    reselect_every: int = 1_000_000
    seed: int = 0
    weight_scheme: str = "exp-mean"

    def __post_init__(self):
        self.method = Method(self.method).value
        if self.learning_rate < 0 or self.steps < 0:
            raise ValueError("learning_rate and steps must be nonnegative")
        if self.reselect_every < 1:
            raise ValueError("reselect_every must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown simulation settings: {sorted(unknown)}")
        return cls(**d)


@dataclass
class StepRecord:
    step: int
    loss: float
    expected_reward: float
    positive_mass: float
    negative_mass: float
    positive_index: int
    negative_indices: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def select(pool: CandidatePool, method, k: int, seed: int = 0, weight_scheme="exp-mean", **kw) -> SelectionResult:
    """Dispatch to one of the four selectors, positive = best reward."""
    method = Method(method)
    if method is Method.BOTTOMK:
        return select_bottom_k(pool, k, top_reward_index(pool))
    if method is Method.CORESET:
        return select_coreset(pool, k, top_reward_index(pool), seed=seed)
    mode = "exact" if method is Method.OPTSELECT_EXACT else "local"
    return select_optselect(pool, k, mode=mode, weight_scheme=weight_scheme, seed=seed, **kw)


def initial_state(pool: CandidatePool) -> PolicyState:
    lp = pool.logprobs
    return PolicyState(np.zeros(pool.n) if lp is None else lp.copy())


def run_simulation(pool: CandidatePool, config: SimConfig, state: Optional[PolicyState] = None) -> list:
    """Returns one :class:`StepRecord` per step, including step 0.

    Record ``t`` describes the policy after ``t`` updates; its loss is the
    loss the next update descends on.
    """
    if not 1 <= config.k <= pool.n - 1:
        raise ValueError(f"k must be in [1, {pool.n - 1}], got {config.k}")
    refa = RefaConfig(config.alpha, config.inverse_temperature)
    state = initial_state(pool) if state is None else PolicyState(state.logits.copy(), state.step)
    rewards = pool.rewards
    trajectory = []
    sel = None
    for t in range(config.steps + 1):
        if sel is None or t % config.reselect_every == 0:
            # the selectors read rewards and geometry only, so re-running on
            # drifted probabilities reproduces the same sets
            sel = select(pool, config.method, config.k, config.seed, config.weight_scheme)
        pos, neg = [sel.positive_index], list(sel.negative_indices)
        loss, grad = refa_loss_grad(state.logits, rewards, pos, neg, refa)
        if not np.isfinite(loss):
            raise SimulationDiverged(t, loss)
        probs = state.probabilities
        trajectory.append(StepRecord(
            step=t,
            loss=float(loss),
            expected_reward=float(np.dot(rewards, probs)),
            positive_mass=float(probs[pos].sum()),
            negative_mass=float(probs[neg].sum()),
            positive_index=sel.positive_index,
            negative_indices=neg,
        ))
        if t == config.steps:
            break
        state.logits = state.logits - config.learning_rate * grad
        state.step += 1
    return trajectory


def standard_instance(n: int = 16, dim: int = 8, seed: int = 0) -> CandidatePool:
    """Seeded toy pool: clustered embeddings, rewards in [0, 1], a uniform
    starting policy (logprobs all ``-log n``)."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(4, dim)) * 3.0
    labels = rng.integers(0, 4, size=n)
    emb = centers[labels] + rng.normal(scale=0.5, size=(n, dim))
    rewards = rng.uniform(0.0, 1.0, size=n)
    logprobs = np.full(n, -np.log(n))
    return pool_from_arrays(emb, rewards, logprobs, prompt_id=f"toy-{seed}")
