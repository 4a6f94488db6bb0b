import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from negsel.weights import (
    WeightScheme,
    compute_weights,
    weights_exp_mean_gap,
    weights_max_gap_normalized,
)

rewards_lists = st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=20)


def test_exp_mean_equal_rewards():
    w = weights_exp_mean_gap([0.3, 0.3, 0.3])
    assert w.values.tolist() == [1.0, 1.0, 1.0]
    assert w.scheme is WeightScheme.EXP_MEAN


def test_exp_mean_two_points():
    w = weights_exp_mean_gap([0.0, 1.0])
    # exp(0.5), exp(-0.5)
    np.testing.assert_allclose(w.values, [1.6487212707001282, 0.6065306597126334], rtol=1e-15)
    assert w.reference_reward == 0.5


def test_exp_mean_at_mean_is_one():
    w = weights_exp_mean_gap([0.0, 0.5, 1.0])
    assert w.values[1] == 1.0


def test_max_gap_example():
    w = weights_max_gap_normalized([1.0, 0.5, 0.5])
    assert w.values.tolist() == [0.0, 0.5, 0.5]
    assert w.reference_reward == 1.0


def test_max_gap_all_equal_uniform():
    w = weights_max_gap_normalized([0.4] * 4)
    assert w.values.tolist() == [0.25] * 4


def test_rejects_empty_and_nonfinite():
    with pytest.raises(ValueError):
        weights_exp_mean_gap([])
    with pytest.raises(ValueError):
        weights_max_gap_normalized([0.1, np.inf])


def test_compute_weights_dispatch():
    assert compute_weights([0.1, 0.9], "max-gap").scheme is WeightScheme.MAX_GAP
    assert compute_weights([0.1, 0.9], "exp-mean").scheme is WeightScheme.EXP_MEAN
    with pytest.raises(ValueError):
        compute_weights([0.1], "softmax")


@settings(max_examples=200)
@given(rewards_lists)
def test_exp_mean_strictly_decreasing_in_reward(r):
    w = weights_exp_mean_gap(r).values
    assert np.all(w > 0)
    order = np.argsort(r, kind="stable")
    rs, ws = np.asarray(r)[order], w[order]
    for a in range(len(r) - 1):
        if rs[a] < rs[a + 1]:
            assert ws[a] > ws[a + 1] or np.isclose(ws[a], ws[a + 1], rtol=1e-15)


@settings(max_examples=200)
@given(rewards_lists)
def test_max_gap_sums_to_one(r):
    w = weights_max_gap_normalized(r).values
    assert np.all(w >= 0)
    assert abs(w.sum() - 1.0) <= 1e-12
    assert w[int(np.argmax(r))] == 0.0 or len(set(r)) == 1


@settings(max_examples=100)
@given(rewards_lists, st.randoms(use_true_random=False))
def test_permutation_equivariance(r, rnd):
    perm = list(range(len(r)))
    rnd.shuffle(perm)
    rp = [r[i] for i in perm]
    for fn in (weights_exp_mean_gap, weights_max_gap_normalized):
        # the mean is order dependent in the last bit
        np.testing.assert_allclose(fn(rp).values, fn(r).values[perm], rtol=1e-14)
