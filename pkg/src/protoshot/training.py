"""Episode loss, analytic gradients, and the SGD-with-momentum optimizer.

The episode loss is the negative mean log-likelihood of the query labels
under the distance softmax against the class prototypes. Gradients are exact
for the feed-forward embedder, with one deliberate exception: the per-sample
prototype weights (influence or inverse-distance) are treated as constants,
so the gradient flows through the weighted sum of embeddings but not through
the weight computation itself.
"""

import numpy as np

from .core import as_matrix
from .prototypes import PrototypeStrategy, compute_all_prototypes

# Query/prototype pairs closer than this contribute no distance gradient;
# the direction vector of a zero-length difference is undefined.
_ZERO_DIST = 1e-12


def _check_query_classes(support_labels, query_labels):
    missing = np.setdiff1d(np.unique(query_labels), np.unique(support_labels))
    if missing.size:
        raise ValueError(f"query classes {missing.tolist()} absent from support set")


def _distances(query_emb, proto_vectors):
    diff = query_emb[:, None, :] - proto_vectors[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2)), diff


def _nll(dists, target_idx):
    """Per-query negative log-likelihood from a (n_query, n_class) distance matrix."""
    shifted = dists - dists.min(axis=1, keepdims=True)
    logz = np.log(np.sum(np.exp(-shifted), axis=1))
    return shifted[np.arange(dists.shape[0]), target_idx] + logz


def episode_loss(support_emb, support_labels, query_emb, query_labels, strategy=PrototypeStrategy()):
    """Negative mean log-likelihood of the query labels for one episode.

    Operates on already-embedded support and query sets. Every query label
    must appear among the support labels.
    """
    support_emb = as_matrix(support_emb, "support_emb")
    query_emb = as_matrix(query_emb, "query_emb")
    support_labels = np.asarray(support_labels)
    query_labels = np.asarray(query_labels)
    _check_query_classes(support_labels, query_labels)
    protos = compute_all_prototypes(support_emb, support_labels, strategy)
    dists, _ = _distances(query_emb, protos.vectors)
    target_idx = np.searchsorted(protos.class_ids, query_labels)
    return float(np.mean(_nll(dists, target_idx)))


def episode_gradients(embedder, support_x, support_y, query_x, query_y, strategy=PrototypeStrategy()):
    """Episode loss and its exact gradients w.r.t. the embedder parameters.

    Support and query features are raw inputs; they pass through the embedder
    in a single stacked batch. Returns ``(loss, grads)`` with ``grads``
    aligned with ``embedder.parameters()`` (empty for the identity embedder).
    """
    support_x = as_matrix(support_x, "support_x")
    query_x = as_matrix(query_x, "query_x")
    support_y = np.asarray(support_y)
    query_y = np.asarray(query_y)
    _check_query_classes(support_y, query_y)

    n_support = support_x.shape[0]
    if not embedder.parameters():
        loss = episode_loss(
            embedder.transform(support_x), support_y, embedder.transform(query_x), query_y, strategy
        )
        return loss, []

    batch = np.vstack([support_x, query_x])
    emb, cache = embedder.forward_with_cache(batch)
    support_emb, query_emb = emb[:n_support], emb[n_support:]

    protos = compute_all_prototypes(support_emb, support_y, strategy)
    dists, diff = _distances(query_emb, protos.vectors)
    target_idx = np.searchsorted(protos.class_ids, query_y)
    loss = float(np.mean(_nll(dists, target_idx)))

    shifted = dists - dists.min(axis=1, keepdims=True)
    e = np.exp(-shifted)
    probs = e / e.sum(axis=1, keepdims=True)
    one_hot = np.zeros_like(probs)
    one_hot[np.arange(probs.shape[0]), target_idx] = 1.0
    dl_dd = (one_hot - probs) / probs.shape[0]

    safe = np.where(dists > _ZERO_DIST, dists, 1.0)
    unit = np.where(dists[:, :, None] > _ZERO_DIST, diff / safe[:, :, None], 0.0)

    grad_query = np.einsum("qc,qcd->qd", dl_dd, unit)
    grad_proto = -np.einsum("qc,qcd->cd", dl_dd, unit)

    grad_support = np.zeros_like(support_emb)
    for c_idx, cid in enumerate(protos.class_ids):
        members = np.flatnonzero(support_y == cid)
        weights = protos.weights_used[c_idx]
        grad_support[members] = weights[:, None] * grad_proto[c_idx]

    grads = embedder.backward(cache, np.vstack([grad_support, grad_query]))
    return loss, grads


class SGDMomentum:
    """Stochastic gradient descent with classical momentum.

    Per step: ``v <- momentum * v + grad`` then ``param <- param - lr * v``.
    Velocity starts at zero and is shaped lazily from the first step's
    parameters.
    """

    def __init__(self, learning_rate=0.01, momentum=0.9):
        if not (learning_rate > 0):
            raise ValueError(f"learning_rate must be positive, got {learning_rate}")
        if not (0.0 <= momentum < 1.0):
            raise ValueError(f"momentum must be in [0, 1), got {momentum}")
        self.learning_rate = float(learning_rate)
        self.momentum = float(momentum)
        self.velocity = None

    def step(self, params, grads):
        """Return updated parameter arrays; inputs are not modified."""
        if len(params) != len(grads):
            raise ValueError(f"got {len(params)} params but {len(grads)} grads")
        if self.velocity is None:
            self.velocity = [np.zeros_like(p) for p in params]
        if len(self.velocity) != len(params):
            raise ValueError("optimizer state does not match parameter count")
        updated = []
        for i, (p, g) in enumerate(zip(params, grads)):
            if p.shape != g.shape:
                raise ValueError(f"shape mismatch at parameter {i}: {p.shape} vs {g.shape}")
            self.velocity[i] = self.momentum * self.velocity[i] + g
            updated.append(p - self.learning_rate * self.velocity[i])
        return updated
