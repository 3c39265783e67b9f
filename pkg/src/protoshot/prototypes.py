"""Prototype formation strategies.

Three ways to collapse a class's support embeddings into one prototype:

* ``uniform``: the arithmetic mean of the support embeddings.
* ``influence``: a weighted mean where each sample's weight reflects how
  little the support distribution shifts when that sample is removed
  (leave-one-out mean-embedding discrepancy, max-normalized and inverted).
* ``inverse_distance``: a weighted mean where each sample is weighted by the
  inverse of its distance to the mean of the remaining samples.

Every strategy returns weights that are nonnegative and sum to one, so each
prototype is a convex combination of the class's support embeddings.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import as_matrix
from .influence import KernelConfig, influence_weights, leave_one_out_mmd

UNIFORM = "uniform"
INFLUENCE = "influence"
INVERSE_DISTANCE = "inverse_distance"
STRATEGY_KINDS = (UNIFORM, INFLUENCE, INVERSE_DISTANCE)


@dataclass(frozen=True)
class PrototypeStrategy:
    """Prototype formation rule plus its strategy-specific knobs.

    ``kernel`` matters only for the influence strategy; ``epsilon`` only for
    inverse-distance, where it guards the division when a sample coincides
    with the mean of the others.
    """

    kind: str = UNIFORM
    kernel: KernelConfig = field(default_factory=KernelConfig)
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}, expected one of {STRATEGY_KINDS}")
        if not (self.epsilon > 0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


def make_strategy(kind, kernel="linear", bandwidth="auto", epsilon=1e-8):
    """Build a PrototypeStrategy from plain config values."""
    if isinstance(kind, PrototypeStrategy):
        return kind
    return PrototypeStrategy(kind=kind, kernel=KernelConfig(kernel, bandwidth), epsilon=epsilon)


@dataclass(frozen=True)
class PrototypeSet:
    """One prototype per class, in ascending class-id order.

    ``weights_used`` records, per class, the normalized per-sample weights
    that produced the prototype (aligned with that class's support rows).
    """

    class_ids: np.ndarray
    vectors: np.ndarray = field(repr=False)
    weights_used: list = field(repr=False)


def compute_prototype(class_support, strategy=PrototypeStrategy()):
    """Prototype vector and normalized per-sample weights for one class.

    ``strategy`` may be a PrototypeStrategy or a kind string, which picks up
    default kernel settings. A single-sample support degrades every strategy
    to that sample, since leave-one-out constructions need at least two rows.
    """
    strategy = make_strategy(strategy)
    rows = as_matrix(class_support, "class_support")
    k = rows.shape[0]
    if k == 1 or strategy.kind == UNIFORM:
        weights = np.full(k, 1.0 / k)
    elif strategy.kind == INFLUENCE:
        scores = leave_one_out_mmd(rows, strategy.kernel)
        raw = influence_weights(scores).if_weights
        weights = raw / raw.sum()
    else:
        raw = np.empty(k)
        for i in range(k):
            rest_mean = np.delete(rows, i, axis=0).mean(axis=0)
            dist = float(np.linalg.norm(rows[i] - rest_mean))
            raw[i] = 1.0 / (dist + strategy.epsilon)
        weights = raw / raw.sum()
    return weights @ rows, weights


def compute_all_prototypes(support, labels, strategy=PrototypeStrategy()):
    """Prototypes for every class present in ``labels``, sorted by class id."""
    rows = as_matrix(support, "support")
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.shape[0] != rows.shape[0]:
        raise ValueError(
            f"labels/rows mismatch: {labels.shape[0] if labels.ndim == 1 else labels.shape} "
            f"labels for {rows.shape[0]} support rows"
        )
    class_ids = np.unique(labels)
    vectors = np.empty((class_ids.shape[0], rows.shape[1]))
    weights_used = []
    for idx, cid in enumerate(class_ids):
        proto, weights = compute_prototype(rows[labels == cid], strategy)
        vectors[idx] = proto
        weights_used.append(weights)
    return PrototypeSet(class_ids=class_ids, vectors=vectors, weights_used=weights_used)
