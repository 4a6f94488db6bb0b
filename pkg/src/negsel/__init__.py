"""Active negative selection for one-vs-K group-contrastive alignment."""

from .bottomk import select_bottom_k
from .coreset import Clustering, kmeans, select_coreset
from .lipschitz import (
    feasibility_check,
    saturating_reward,
    verify_additive_bound,
    verify_optimality_equivalence,
)
from .optselect import (
    CoverageInstance,
    InstanceTooLarge,
    coverage_cost,
    select_optselect,
    solve_exact,
    solve_local_search,
)
from .pool import (
    Candidate,
    CandidatePool,
    Method,
    SelectionResult,
    build_pool,
    cosine_similarity,
    pool_from_arrays,
    top_reward_index,
)
from .refa import RefaConfig, refa_loss, refa_loss_grad, refa_scores
from .simulate import PolicyState, SimConfig, run_simulation
from .weights import WeightScheme, WeightVector, weights_exp_mean_gap, weights_max_gap_normalized

__version__ = "0.1.0"
