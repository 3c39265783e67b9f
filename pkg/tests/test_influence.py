"""Tests for mean-embedding discrepancies and influence weights.

The oracles come first and are straight-line reimplementations independent
of the package internals:

* linear-kernel leave-one-out discrepancy has the closed form
  ||x_i - mean|| / (K - 1), since removing row i moves the mean by exactly
  that much;
* the RBF discrepancy is evaluated directly from its three kernel-sum
  terms.
"""

import math

import numpy as np
import pytest

from protoshot.influence import (
    InfluenceScores,
    KernelConfig,
    influence_weights,
    leave_one_out_mmd,
    median_heuristic_bandwidth,
    mmd,
)


def loo_closed_form(support):
    """||x_i - mean|| / (K - 1) for every row i."""
    rows = np.asarray(support, dtype=float)
    mu = rows.mean(axis=0)
    return np.linalg.norm(rows - mu, axis=1) / (rows.shape[0] - 1)


def rbf_mmd_direct(set_a, set_b, sigma):
    """sqrt(max(0, mean k(a,a') + mean k(b,b') - 2 mean k(a,b))) by explicit loops."""
    a = np.asarray(set_a, dtype=float)
    b = np.asarray(set_b, dtype=float)

    def term(xs, ys):
        total = 0.0
        for x in xs:
            for y in ys:
                total += math.exp(-float(np.sum((x - y) ** 2)) / (2.0 * sigma * sigma))
        return total / (len(xs) * len(ys))

    return math.sqrt(max(0.0, term(a, a) + term(b, b) - 2.0 * term(a, b)))


# ---------------------------------------------------------------------------
# mmd


def test_mmd_identical_sets_is_zero():
    rows = [[1, 2], [3, 4]]
    assert mmd(rows, rows) == 0.0
    assert mmd(rows, rows, KernelConfig("rbf", 1.0)) <= 1e-9


def test_mmd_linear_singletons():
    assert mmd([[1]], [[3]]) == 2.0


def test_mmd_rbf_singletons_match_kernel_sum_oracle():
    got = mmd([[0]], [[1]], KernelConfig("rbf", 1.0))
    want = math.sqrt(2.0 - 2.0 * math.exp(-0.5))  # kaa = kbb = 1, kab = e^{-1/2}
    assert got == pytest.approx(want, abs=1e-12)
    assert got == pytest.approx(rbf_mmd_direct([[0]], [[1]], 1.0), abs=1e-12)


def test_mmd_rbf_matches_oracle_on_random_sets():
    rng = np.random.default_rng(10)
    for _ in range(25):
        a = rng.normal(size=(rng.integers(1, 6), 3))
        b = rng.normal(size=(rng.integers(1, 6), 3))
        sigma = float(rng.uniform(0.5, 3.0))
        got = mmd(a, b, KernelConfig("rbf", sigma))
        assert got == pytest.approx(rbf_mmd_direct(a, b, sigma), abs=1e-10)


def test_mmd_is_symmetric():
    rng = np.random.default_rng(11)
    for kernel in (KernelConfig(), KernelConfig("rbf", 1.5), KernelConfig("rbf", "auto")):
        for _ in range(25):
            a = rng.normal(size=(rng.integers(1, 5), 4))
            b = rng.normal(size=(rng.integers(1, 5), 4))
            assert abs(mmd(a, b, kernel) - mmd(b, a, kernel)) <= 1e-12


def test_mmd_self_is_zero_for_all_kernels():
    rng = np.random.default_rng(12)
    for kernel in (KernelConfig(), KernelConfig("rbf", 0.7), KernelConfig("rbf", "auto")):
        for _ in range(25):
            a = rng.normal(size=(rng.integers(1, 6), 3))
            assert mmd(a, a, kernel) <= 1e-9


def test_mmd_input_validation():
    with pytest.raises(ValueError, match="dimension"):
        mmd([[1, 2]], [[1, 2, 3]])
    with pytest.raises(ValueError, match="nonempty"):
        mmd(np.empty((0, 2)), [[1, 2]])
    with pytest.raises(ValueError, match="non-finite"):
        mmd([[np.nan]], [[1.0]])


# ---------------------------------------------------------------------------
# leave_one_out_mmd


def test_loo_linear_example_with_one_far_point():
    # mean is 1, so entries are |x_i - 1| / 2.
    assert np.allclose(leave_one_out_mmd([[0], [0], [3]]), [0.5, 0.5, 1.0], atol=1e-12)


def test_loo_linear_symmetric_pair():
    assert np.allclose(leave_one_out_mmd([[1], [3]]), [1.0, 1.0], atol=1e-12)


def test_loo_identical_rows_are_all_zero():
    for kernel in (KernelConfig(), KernelConfig("rbf", 1.0)):
        scores = leave_one_out_mmd([[2.0, -1.0]] * 4, kernel)
        assert np.allclose(scores, 0.0, atol=1e-9)


def test_loo_rejects_single_row():
    with pytest.raises(ValueError, match="at least 2"):
        leave_one_out_mmd([[1.0, 2.0]])


def test_loo_linear_matches_closed_form_on_random_supports():
    rng = np.random.default_rng(13)
    for _ in range(100):
        support = rng.normal(size=(int(rng.integers(2, 10)), int(rng.integers(1, 8))))
        got = leave_one_out_mmd(support)
        want = loo_closed_form(support)
        assert np.all(np.abs(got - want) <= 1e-9 * np.maximum(want, 1e-300))


def test_loo_rbf_resolves_auto_bandwidth_once_from_full_support():
    # With "auto", every leave-one-out term must share the bandwidth of the
    # full support set, not re-derive one per deleted row.
    rng = np.random.default_rng(14)
    support = rng.normal(size=(6, 3))
    sigma = median_heuristic_bandwidth(support)
    got = leave_one_out_mmd(support, KernelConfig("rbf", "auto"))
    want = [
        rbf_mmd_direct(support, np.delete(support, i, axis=0), sigma)
        for i in range(len(support))
    ]
    assert np.allclose(got, want, atol=1e-10)


# ---------------------------------------------------------------------------
# influence_weights


def test_weights_max_normalize_then_invert():
    scores = influence_weights([0.5, 0.5, 1.0])
    assert isinstance(scores, InfluenceScores)
    assert np.allclose(scores.if_weights, [0.5, 0.5, 0.0], atol=1e-12)
    assert np.array_equal(scores.mmd, [0.5, 0.5, 1.0])


def test_weights_symmetric_tie_falls_back_to_uniform():
    assert np.array_equal(influence_weights([1.0, 1.0]).if_weights, [1.0, 1.0])


def test_weights_all_zero_scores_fall_back_to_uniform():
    assert np.array_equal(influence_weights([0.0, 0.0, 0.0]).if_weights, [1.0, 1.0, 1.0])


def test_weights_reject_bad_input():
    with pytest.raises(ValueError, match="nonempty"):
        influence_weights([])
    with pytest.raises(ValueError, match="nonnegative"):
        influence_weights([0.5, -0.1])


def test_weights_lie_in_unit_interval_with_positive_sum():
    rng = np.random.default_rng(15)
    for _ in range(200):
        scores = rng.uniform(0.0, 5.0, size=rng.integers(1, 10))
        w = influence_weights(scores).if_weights
        assert np.all(w >= 0.0) and np.all(w <= 1.0)
        assert w.sum() > 0.0


def test_weights_are_scale_invariant():
    # Scaling all embeddings by c scales every linear leave-one-out score
    # by c and leaves the normalized weights unchanged.
    rng = np.random.default_rng(16)
    for _ in range(50):
        support = rng.normal(size=(6, 4))
        c = float(rng.uniform(0.1, 100.0))
        base = leave_one_out_mmd(support)
        scaled = leave_one_out_mmd(c * support)
        assert np.allclose(scaled, c * base, rtol=1e-9, atol=1e-12)
        assert np.allclose(
            influence_weights(base).if_weights,
            influence_weights(scaled).if_weights,
            atol=1e-9,
        )


def test_farthest_sample_gets_the_minimal_weight():
    rng = np.random.default_rng(17)
    for _ in range(50):
        support = rng.normal(size=(7, 3))
        dist_to_mean = np.linalg.norm(support - support.mean(axis=0), axis=1)
        w = influence_weights(leave_one_out_mmd(support)).if_weights
        assert np.argmin(w) == np.argmax(dist_to_mean)


# ---------------------------------------------------------------------------
# median heuristic & kernel config


def test_median_heuristic_hand_value():
    # pairwise distances of {0, 1, 3} are {1, 2, 3}; median 2.
    assert median_heuristic_bandwidth([[0.0], [1.0], [3.0]]) == 2.0


def test_median_heuristic_degenerate_set_falls_back_to_one():
    assert median_heuristic_bandwidth([[5.0, 5.0]] * 3) == 1.0
    assert median_heuristic_bandwidth([[1.0, 2.0]]) == 1.0


def test_kernel_config_validation():
    with pytest.raises(ValueError, match="kernel kind"):
        KernelConfig("polynomial")
    with pytest.raises(ValueError, match="bandwidth"):
        KernelConfig("rbf", -1.0)
    with pytest.raises(ValueError, match="bandwidth"):
        KernelConfig("rbf", 0.0)
    assert KernelConfig("rbf", "auto").bandwidth == "auto"
    assert KernelConfig("rbf", "2.5").bandwidth == 2.5
