"""Tests for the episode loss, analytic gradients, and SGD with momentum.

Oracles, in order of appearance:

* ``episode_loss_oracle`` — straight-line recomputation of the negative
  mean query log-likelihood from scratch (prototypes, distances, softmax),
  with the prototype rule passed in as a plain function;
* ``central_difference_grads`` — central finite differences of an arbitrary
  loss callable with respect to live parameter arrays;
* ``frozen_weight_loss`` — the loss with the per-sample prototype weights
  pinned to their values at the unperturbed parameters, which is the exact
  function the analytic gradients differentiate for the weighted strategies.
"""

import math

import numpy as np
import pytest

from protoshot.embedder import FeedForwardEmbedder, IdentityEmbedder
from protoshot.prototypes import compute_all_prototypes, make_strategy
from protoshot.training import SGDMomentum, episode_gradients, episode_loss

UNIFORM = make_strategy("uniform")
INFLUENCE = make_strategy("influence")
INVERSE = make_strategy("inverse_distance")


def episode_loss_oracle(support_emb, support_labels, query_emb, query_labels, proto_fn):
    """-(1/|Q|) sum log p(y_q | q), recomputed from first principles."""
    support_emb = np.asarray(support_emb, dtype=float)
    query_emb = np.asarray(query_emb, dtype=float)
    class_ids = sorted(set(int(c) for c in support_labels))
    protos = np.stack([proto_fn(support_emb[np.asarray(support_labels) == c]) for c in class_ids])
    total = 0.0
    for q, y in zip(query_emb, query_labels):
        d = np.array([np.linalg.norm(q - p) for p in protos])
        e = np.exp(-(d - d.min()))
        p = e / e.sum()
        total -= math.log(p[class_ids.index(int(y))])
    return total / len(query_emb)


def influence_proto_fn(rows):
    """Independent influence-weighted prototype for one class."""
    k = rows.shape[0]
    if k == 1:
        return rows[0]
    scores = np.linalg.norm(rows - rows.mean(axis=0), axis=1) / (k - 1)
    top = scores.max()
    weights = np.ones(k) if top < 1e-12 else 1.0 - scores / top
    if weights.sum() < 1e-12:
        weights = np.ones(k)
    return (weights / weights.sum()) @ rows


def central_difference_grads(loss_fn, params, h=1e-5):
    """Central finite differences w.r.t. every entry of the live arrays."""
    grads = []
    for p in params:
        flat = p.ravel()
        g = np.empty_like(flat)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            hi = loss_fn()
            flat[i] = orig - h
            lo = loss_fn()
            flat[i] = orig
            g[i] = (hi - lo) / (2.0 * h)
        grads.append(g.reshape(p.shape))
    return grads


def relative_error(analytic, fd):
    """|a - f| / max(1e-8, |a| + |f|), the gradient-check metric."""
    return np.abs(analytic - fd) / np.maximum(1e-8, np.abs(analytic) + np.abs(fd))


FD_NOISE_ATOL = 1e-9


def gradient_check_error(analytic, fd):
    """Max relative error over entries that sit above the FD noise floor.

    Central differences at h = 1e-5 cannot resolve loss changes below one
    float64 ulp, so a parameter whose true derivative is exactly zero (a
    ReLU path dead across the whole episode) reads back pure rounding noise
    of up to ~eps/(2h) ~ 1e-11. Entries whose absolute disagreement is at
    that noise floor count as matching; everything else must pass the
    relative test.
    """
    rel = relative_error(analytic, fd)
    rel[np.abs(analytic - fd) <= FD_NOISE_ATOL] = 0.0
    return float(rel.max())


def frozen_weight_loss(embedder, support_x, support_y, query_x, query_y, weights_per_class):
    """Loss with the per-class sample weights held at fixed values."""
    s = embedder.transform(support_x)
    q = embedder.transform(query_x)
    class_ids = sorted(weights_per_class)
    protos = np.stack([weights_per_class[c] @ s[support_y == c] for c in class_ids])
    total = 0.0
    for row, y in zip(q, query_y):
        d = np.linalg.norm(row - protos, axis=1)
        e = np.exp(-(d - d.min()))
        total -= math.log((e / e.sum())[class_ids.index(int(y))])
    return total / len(q)


def random_episode(rng, dim, n_way=2, k_shot=3, q_query=4, spread=2.0):
    centers = rng.normal(scale=spread, size=(n_way, dim))
    support_x = np.concatenate([c + rng.normal(size=(k_shot, dim)) for c in centers])
    support_y = np.repeat(np.arange(n_way), k_shot)
    query_x = np.concatenate([c + rng.normal(size=(q_query, dim)) for c in centers])
    query_y = np.repeat(np.arange(n_way), q_query)
    return support_x, support_y, query_x, query_y


# ---------------------------------------------------------------------------
# episode_loss


def test_loss_is_ln_two_for_an_equidistant_query():
    loss = episode_loss([[0.0], [2.0]], [0, 1], [[1.0]], [0])
    assert loss == pytest.approx(math.log(2.0), abs=1e-12)


def test_loss_saturates_when_the_query_sits_on_its_prototype():
    loss = episode_loss([[0.0], [0.0], [100.0], [100.0]], [0, 0, 1, 1], [[0.0]], [0])
    assert 0.0 <= loss < 1e-9


def test_loss_matches_oracle_on_random_episodes():
    rng = np.random.default_rng(50)
    for _ in range(30):
        sx, sy, qx, qy = random_episode(rng, dim=3)
        got = episode_loss(sx, sy, qx, qy, UNIFORM)
        want = episode_loss_oracle(sx, sy, qx, qy, lambda rows: rows.mean(axis=0))
        assert got == pytest.approx(want, abs=1e-9)
        got_inf = episode_loss(sx, sy, qx, qy, INFLUENCE)
        want_inf = episode_loss_oracle(sx, sy, qx, qy, influence_proto_fn)
        assert got_inf == pytest.approx(want_inf, abs=1e-9)


def test_loss_rejects_query_classes_missing_from_support():
    with pytest.raises(ValueError, match="absent from support"):
        episode_loss([[0.0], [1.0]], [0, 1], [[0.5]], [2])


# ---------------------------------------------------------------------------
# episode_gradients


def test_identity_embedder_yields_loss_and_no_gradients():
    rng = np.random.default_rng(51)
    sx, sy, qx, qy = random_episode(rng, dim=2)
    loss, grads = episode_gradients(IdentityEmbedder(), sx, sy, qx, qy)
    assert grads == []
    assert loss == pytest.approx(episode_loss(sx, sy, qx, qy), abs=1e-12)


def test_gradients_vanish_at_the_exact_minimum():
    # A single-class episode has probability 1 everywhere: loss 0, and
    # every parameter gradient must be exactly zero.
    emb = FeedForwardEmbedder([3, 5, 2], rng=0)
    rng = np.random.default_rng(52)
    sx = rng.normal(size=(4, 3))
    qx = rng.normal(size=(3, 3))
    loss, grads = episode_gradients(emb, sx, np.zeros(4, dtype=int), qx, np.zeros(3, dtype=int))
    assert loss == 0.0
    for g in grads:
        assert np.array_equal(g, np.zeros_like(g))


def test_gradients_match_finite_differences_for_the_mean_prototype():
    rng = np.random.default_rng(53)
    for trial in range(10):
        emb = FeedForwardEmbedder([4, 8, 4], rng=rng)
        sx, sy, qx, qy = random_episode(rng, dim=4)
        _, analytic = episode_gradients(emb, sx, sy, qx, qy, UNIFORM)
        fd = central_difference_grads(
            lambda: episode_loss(emb.transform(sx), sy, emb.transform(qx), qy, UNIFORM),
            emb.parameters(),
        )
        for a, f in zip(analytic, fd):
            assert gradient_check_error(a, f) < 1e-4


def test_weighted_strategy_gradients_differentiate_the_frozen_weight_loss():
    # The weighted strategies deliberately treat their per-sample weights as
    # constants; the analytic gradients must therefore match finite
    # differences of the loss with the weights pinned at the base point.
    rng = np.random.default_rng(54)
    for strategy in (INFLUENCE, INVERSE):
        for trial in range(5):
            emb = FeedForwardEmbedder([3, 6, 3], rng=rng)
            sx, sy, qx, qy = random_episode(rng, dim=3)
            _, analytic = episode_gradients(emb, sx, sy, qx, qy, strategy)
            protos = compute_all_prototypes(emb.transform(sx), sy, strategy)
            weights = {
                int(c): w for c, w in zip(protos.class_ids, protos.weights_used)
            }
            fd = central_difference_grads(
                lambda: frozen_weight_loss(emb, sx, sy, qx, qy, weights),
                emb.parameters(),
            )
            for a, f in zip(analytic, fd):
                assert gradient_check_error(a, f) < 1e-4


def test_duplicated_query_contributions_add_linearly():
    # Per-query contributions enter the loss additively before the 1/|Q|
    # normalization, so 3*grad([a,b,b]) == 2*grad([a,b]) + grad([b]).
    rng = np.random.default_rng(55)
    emb = FeedForwardEmbedder([3, 5, 3], rng=rng)
    sx, sy, qx, qy = random_episode(rng, dim=3, q_query=1)
    a, b = qx[0], qx[1]
    ya, yb = int(qy[0]), int(qy[1])

    def grads_for(queries, labels):
        _, grads = episode_gradients(emb, sx, sy, np.asarray(queries), np.asarray(labels))
        return grads

    g_ab = grads_for([a, b], [ya, yb])
    g_abb = grads_for([a, b, b], [ya, yb, yb])
    g_b = grads_for([b], [yb])
    for x, y, z in zip(g_abb, g_ab, g_b):
        assert np.allclose(3.0 * x, 2.0 * y + z, atol=1e-9)


# ---------------------------------------------------------------------------
# SGD with momentum


def test_sgd_single_step_without_momentum():
    opt = SGDMomentum(learning_rate=0.1, momentum=0.0)
    (updated,) = opt.step([np.array([1.0])], [np.array([2.0])])
    assert updated == pytest.approx(0.8, abs=1e-15)


def test_sgd_momentum_hand_recursion():
    # v <- 0.9 v + 1, p <- p - v: step one gives v=1, p=-1; step two gives
    # v=1.9, p=-2.9.
    opt = SGDMomentum(learning_rate=1.0, momentum=0.9)
    p = [np.array([0.0])]
    p = opt.step(p, [np.array([1.0])])
    assert p[0] == pytest.approx(-1.0, abs=1e-15)
    p = opt.step(p, [np.array([1.0])])
    assert p[0] == pytest.approx(-2.9, abs=1e-15)


def test_sgd_zero_gradients_leave_parameters_fixed():
    opt = SGDMomentum()
    params = [np.array([3.0, -1.0]), np.array([[2.0]])]
    for _ in range(5):
        params = opt.step(params, [np.zeros(2), np.zeros((1, 1))])
    assert np.array_equal(params[0], [3.0, -1.0])
    assert np.array_equal(params[1], [[2.0]])


def test_sgd_does_not_mutate_its_inputs():
    opt = SGDMomentum(learning_rate=0.5, momentum=0.0)
    p = np.array([1.0, 2.0])
    out = opt.step([p], [np.array([1.0, 1.0])])
    assert np.array_equal(p, [1.0, 2.0])
    assert np.array_equal(out[0], [0.5, 1.5])


def test_sgd_validation_errors():
    with pytest.raises(ValueError, match="learning_rate"):
        SGDMomentum(learning_rate=0.0)
    with pytest.raises(ValueError, match="momentum"):
        SGDMomentum(momentum=1.0)
    opt = SGDMomentum()
    with pytest.raises(ValueError, match="grads"):
        opt.step([np.zeros(2)], [])
    opt2 = SGDMomentum()
    with pytest.raises(ValueError, match="shape mismatch"):
        opt2.step([np.zeros(2)], [np.zeros(3)])
