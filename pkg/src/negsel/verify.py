"""Seeded property suite: approximation ratio, optimality equivalence,
affine reward identity, additive cluster bound and gradient agreement.

Every check draws its instances from ``numpy.random.default_rng`` seeded
per instance, so a failure names the seed that reproduces it.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .coreset import kmeans
from .lipschitz import (
    cluster_diameter,
    gap_cost,
    saturating_reward,
    verify_additive_bound,
    verify_optimality_equivalence,
)
from .optselect import (
    CoverageInstance,
    _cost_cols,
    local_search_cols,
    one_swap_stable,
    solve_exact,
    solve_local_search,
)
from .pool import pool_from_arrays, top_reward_index
from .refa import RefaConfig, refa_loss, refa_loss_from_logits, refa_loss_grad
from .weights import weights_exp_mean_gap

CHECKS = ("approx5", "equivalence", "identity", "additive", "gradcheck")


@dataclass
class CheckReport:
    name: str
    passed: bool = True
    instances: int = 0
    failures: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    seconds: float = 0.0

    def fail(self, seed, reason):
        self.passed = False
        self.failures.append({"seed": int(seed), "reason": reason})

    def to_dict(self) -> dict:
        return {
            "check": self.name,
            "passed": self.passed,
            "instances": self.instances,
            "failures": self.failures[:20],
            "failure_count": len(self.failures),
            "stats": self.stats,
            "seconds": round(self.seconds, 3),
        }


def random_points(rng, n, dim=None):
    dim = int(rng.integers(1, 5)) if dim is None else dim
    return rng.normal(size=(n, dim))


def random_pool(rng, n, dim=None, normalize=True):
    return pool_from_arrays(random_points(rng, n, dim), rng.uniform(0, 1, size=n), normalize_distances=normalize)


def random_instance(seed: int, weights: str = "uniform", max_m: int = 14, ks=(2, 3, 4)) -> CoverageInstance:
    rng = np.random.default_rng(seed)
    k = int(rng.choice(ks))
    m = int(rng.integers(k + 1, max_m + 1))
    pool = random_pool(rng, m)
    if weights == "uniform":
        w = np.ones(m)
    else:
        w = weights_exp_mean_gap(pool.rewards).values
    return CoverageInstance(tuple(range(m)), w, pool.distance_matrix, k)


def worsen_once(inst: CoverageInstance, cols):
    """Apply the first exchange that raises the cost (fault injection)."""
    cols = sorted(cols)
    cost = _cost_cols(inst, cols)
    outside = [c for c in range(inst.m) if c not in set(cols)]
    for pos in range(len(cols)):
        for c_in in outside:
            trial = sorted(cols[:pos] + [c_in] + cols[pos + 1:])
            if _cost_cols(inst, trial) > cost + 1e-9:
                return trial
    return cols


def check_approx5(n_instances=200, seed=0, inject_fault=False) -> CheckReport:
    rep = CheckReport("approx5")
    worst = 0.0
    for t in range(n_instances):
        s = seed * 100_003 + t
        inst = random_instance(s, "uniform" if t % 2 == 0 else "exp-mean")
        exact = solve_exact(inst)
        local = solve_local_search(inst, seed=s)
        negs = local.negative_indices
        cost = local.objective_value
        if inject_fault:
            cols = worsen_once(inst, inst.columns(negs))
            negs = tuple(inst.eligible[c] for c in cols)
            cost = _cost_cols(inst, cols)
        rep.instances += 1
        if not cost <= 5 * exact.objective_value:
            rep.fail(s, f"local {cost!r} > 5 x exact {exact.objective_value!r}")
        if exact.objective_value > 0:
            worst = max(worst, cost / exact.objective_value)
        if not one_swap_stable(inst, negs):
            rep.fail(s, "local optimum is not 1-swap stable")
        if cost > local.meta["runs"][0]["initial_cost"] + 1e-12 and not inject_fault:
            rep.fail(s, "local search increased the cost")
    rep.stats["worst_ratio"] = worst
    return rep


def check_equivalence(n_instances=100, seed=0) -> CheckReport:
    rep = CheckReport("equivalence")
    feasible_instances = 0
    for t in range(n_instances):
        s = seed * 100_003 + t
        rng = np.random.default_rng(s)
        k = int(rng.choice([2, 3]))
        n = int(rng.integers(k + 2, 13))
        pool = random_pool(rng, n)
        # caps sum to at most n - 1 - k <= n, so L <= 1/n keeps every set
        # feasible; larger L exercises the filtering
        l = float(rng.uniform(0.05, 1.0)) * (1.0 if t % 3 == 0 else 1.0 / n)
        report = verify_optimality_equivalence(pool, k, l)
        rep.instances += 1
        if report.feasible_count:
            feasible_instances += 1
        if not report.passed:
            rep.fail(s, f"argmin {sorted(report.cost_argmin)} != argmax {sorted(report.reward_argmax)}")
    rep.stats["instances_with_feasible_sets"] = feasible_instances
    return rep


def check_identity(n_triples=1000, seed=0) -> CheckReport:
    rep = CheckReport("identity")
    worst = 0.0
    done = 0
    t = 0
    while done < n_triples:
        s = seed * 100_003 + t
        t += 1
        rng = np.random.default_rng(s)
        n = int(rng.integers(3, 16))
        pool = random_pool(rng, n)
        top = top_reward_index(pool)
        others = [i for i in range(n) if i != top]
        k = int(rng.integers(1, len(others) + 1))
        negs = sorted(rng.choice(others, size=k, replace=False).tolist())
        l = float(rng.uniform(0.0, 1.0)) / n
        reward = saturating_reward(pool, negs, l)
        bound = float(pool.rewards.max()) - l * gap_cost(pool, negs)
        err = abs(reward - bound)
        worst = max(worst, err)
        done += 1
        if err > 1e-12:
            rep.fail(s, f"|reward - (r_max - L cost)| = {err:.3e}")
    rep.instances = done
    rep.stats["max_abs_error"] = worst
    return rep


def planted_pool(rng, clusters=3, per_cluster=4, dim=3, spread=0.05):
    centers = rng.normal(size=(clusters, dim)) * 5.0
    labels = np.repeat(np.arange(clusters), per_cluster)
    emb = centers[labels] + rng.uniform(-spread, spread, size=(len(labels), dim))
    return pool_from_arrays(emb, rng.uniform(0, 1, size=len(labels))), labels


def check_additive(n_instances=50, seed=0) -> CheckReport:
    rep = CheckReport("additive")
    min_slack = math.inf
    for t in range(n_instances):
        s = seed * 100_003 + t
        rng = np.random.default_rng(s)
        kc = int(rng.integers(2, 5))
        pool, _ = planted_pool(rng, clusters=kc, per_cluster=int(rng.integers(2, 6)))
        top = top_reward_index(pool)
        others = np.array([i for i in range(pool.n) if i != top])
        clustering = kmeans(pool.embeddings[others], kc, seed=s)
        clusters = [others[clustering.members(j)].tolist() for j in range(kc)]
        d_max = max(cluster_diameter(pool, c) for c in clusters)
        l = float(rng.uniform(0.1, 1.0))
        report = verify_additive_bound(pool, clusters, d_max, l)
        rep.instances += 1
        min_slack = min(min_slack, report.slack)
        if not report.passed:
            rep.fail(s, f"normalized cost {report.normalized_cost} > d_max {d_max}")
    rep.stats["min_slack"] = min_slack
    return rep


def finite_difference_grad(f, x, h=1e-5):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def relative_error(analytic, numeric) -> float:
    """Largest componentwise gap, relative to the gradient's largest entry."""
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), 1e-12)
    return float(np.max(np.abs(analytic - numeric)) / scale)


def check_gradcheck(n_instances=100, seed=0) -> CheckReport:
    rep = CheckReport("gradcheck")
    worst = 0.0
    worst_shift = 0.0
    for t in range(n_instances):
        s = seed * 100_003 + t
        rng = np.random.default_rng(s)
        n = int(rng.integers(3, 17))
        k = int(rng.integers(1, n))
        perm = rng.permutation(n)
        pos, neg = [int(perm[0])], [int(i) for i in perm[1:k + 1]]
        logits = rng.normal(size=n)
        rewards = rng.uniform(0, 1, size=n)
        cfg = RefaConfig(alpha=float(rng.uniform(0, 3)), inverse_temperature=float(rng.uniform(0.5, 3)))
        _, grad = refa_loss_grad(logits, rewards, pos, neg, cfg)
        fd = finite_difference_grad(lambda z: refa_loss_from_logits(z, rewards, pos, neg, cfg), logits)
        err = relative_error(grad, fd)
        worst = max(worst, err)
        scores = rng.normal(size=n) * 3
        shift = abs(refa_loss(scores + rng.normal() * 10, pos, neg) - refa_loss(scores, pos, neg))
        worst_shift = max(worst_shift, shift)
        rep.instances += 1
        if err >= 1e-6:
            rep.fail(s, f"gradient relative error {err:.3e}")
        if shift > 1e-10:
            rep.fail(s, f"loss changed by {shift:.3e} under a uniform shift")
    for k in (1, 3, 7):
        loss = refa_loss(np.zeros(k + 1), [0], list(range(1, k + 1)))
        if abs(loss - math.log(1 + k)) > 1e-12:
            rep.fail(-1, f"equal-score loss {loss} != ln({1 + k})")
    rep.stats["max_relative_error"] = worst
    rep.stats["max_shift_change"] = worst_shift
    return rep


def verify_suite(checks=CHECKS, seed: int = 0, inject_fault: bool = False) -> list:
    runners = {
        "approx5": lambda: check_approx5(seed=seed, inject_fault=inject_fault),
        "equivalence": lambda: check_equivalence(seed=seed),
        "identity": lambda: check_identity(seed=seed),
        "additive": lambda: check_additive(seed=seed),
        "gradcheck": lambda: check_gradcheck(seed=seed),
    }
    reports = []
    for name in checks:
        t0 = time.perf_counter()
        rep = runners[name]()
        rep.seconds = time.perf_counter() - t0
        reports.append(rep)
    return reports
