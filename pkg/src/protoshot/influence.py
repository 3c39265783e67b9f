"""Kernel mean-embedding discrepancy and leave-one-out influence weights.

The discrepancy between two sample sets is the norm of the difference of
their kernel mean embeddings. A support sample's conformity is measured by
the discrepancy between the full support set and the set with that sample
removed; samples whose removal barely moves the mean embedding get influence
weights near 1, the most disruptive sample gets 0.

Two kernels are supported:

* ``linear`` (default): the mean embedding is the plain arithmetic mean, so
  the discrepancy is the Euclidean distance between set means.
* ``rbf``: Gaussian kernel ``k(x, y) = exp(-||x - y||^2 / (2 sigma^2))`` with
  the biased V-statistic estimator, clamped at zero before the square root.
  ``bandwidth="auto"`` uses the median heuristic.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import as_matrix, as_vector, pairwise_sq_dists

LINEAR = "linear"
RBF = "rbf"
KERNEL_KINDS = (LINEAR, RBF)

# Below this, a max-normalization denominator or a weight total is treated
# as an exact tie and the uniform fallback kicks in.
DEGENERATE_EPS = 1e-12


@dataclass(frozen=True)
class KernelConfig:
    """Kernel choice for mean-embedding discrepancies.

    bandwidth applies to the RBF kernel only: a positive float, or "auto"
    for the median heuristic (median of pairwise distances within the sample
    set, falling back to 1.0 when that median is zero).
    """

    kind: str = LINEAR
    bandwidth: float | str = "auto"

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}, expected one of {KERNEL_KINDS}")
        if self.bandwidth != "auto":
            bw = float(self.bandwidth)
            if not np.isfinite(bw) or bw <= 0:
                raise ValueError(f"bandwidth must be positive or 'auto', got {self.bandwidth!r}")
            object.__setattr__(self, "bandwidth", bw)


@dataclass(frozen=True)
class InfluenceScores:
    """Per-sample leave-one-out discrepancies and the weights derived from them."""

    mmd: np.ndarray = field(repr=False)
    if_weights: np.ndarray = field(repr=False)


def median_heuristic_bandwidth(rows):
    """Median of pairwise (non-self) Euclidean distances; 1.0 if degenerate."""
    m = as_matrix(rows)
    n = m.shape[0]
    if n < 2:
        return 1.0
    sq = pairwise_sq_dists(m, m)
    dists = np.sqrt(sq[np.triu_indices(n, k=1)])
    med = float(np.median(dists))
    return med if med > 0.0 else 1.0


def _resolve_bandwidth(kernel, rows):
    if kernel.bandwidth == "auto":
        return median_heuristic_bandwidth(rows)
    return float(kernel.bandwidth)


def mmd(set_a, set_b, kernel=KernelConfig()):
    """Discrepancy ||mu(A) - mu(B)|| between two sets' mean embeddings.

    Both sets must be nonempty with matching dimension. With
    ``bandwidth="auto"`` the RBF bandwidth comes from the pooled rows of both
    sets, keeping the estimate symmetric in its arguments.
    """
    a = as_matrix(set_a, "set_a")
    b = as_matrix(set_b, "set_b")
    if a.shape[1] != b.shape[1]:
        raise ValueError(
            f"dimension mismatch: set_a has dimension {a.shape[1]}, set_b has dimension {b.shape[1]}"
        )
    if kernel.kind == LINEAR:
        diff = a.mean(axis=0) - b.mean(axis=0)
        return float(np.sqrt(np.sum(diff * diff)))
    sigma = _resolve_bandwidth(kernel, np.vstack([a, b]))
    return _rbf_mmd(a, b, sigma)


def _rbf_mmd(a, b, sigma):
    gamma = 1.0 / (2.0 * sigma * sigma)
    kaa = np.exp(-gamma * pairwise_sq_dists(a, a)).mean()
    kbb = np.exp(-gamma * pairwise_sq_dists(b, b)).mean()
    kab = np.exp(-gamma * pairwise_sq_dists(a, b)).mean()
    return float(np.sqrt(max(0.0, kaa + kbb - 2.0 * kab)))


def leave_one_out_mmd(support, kernel=KernelConfig()):
    """Per-sample discrepancy between the support set and itself minus that sample.

    Entry i is the mean-embedding discrepancy between the full set and the
    set with row i removed. Requires at least two rows. An automatic RBF
    bandwidth is resolved once from the full support set and shared across
    all leave-one-out evaluations.
    """
    s = as_matrix(support, "support")
    k = s.shape[0]
    if k < 2:
        raise ValueError(f"support set must have at least 2 samples, got {k}")
    if kernel.kind == RBF:
        kernel = KernelConfig(RBF, _resolve_bandwidth(kernel, s))
    scores = np.empty(k)
    for i in range(k):
        rest = np.delete(s, i, axis=0)
        scores[i] = mmd(s, rest, kernel)
    return scores


def influence_weights(mmd_scores):
    """Turn nonnegative discrepancy scores into influence weights in [0, 1].

    Scores are normalized by their maximum and inverted: ``w_i = 1 - m_i / max(m)``,
    so the most disruptive sample gets weight 0. If all scores are ~zero, or
    all scores tie at the maximum (every weight would vanish), the fallback
    assigns weight 1 to every sample, recovering the plain mean downstream.
    """
    scores = as_vector(mmd_scores, "mmd_scores")
    if np.any(scores < 0):
        raise ValueError("mmd_scores must be nonnegative")
    top = float(scores.max())
    if top < DEGENERATE_EPS:
        return InfluenceScores(mmd=scores, if_weights=np.ones_like(scores))
    weights = 1.0 - scores / top
    if float(weights.sum()) < DEGENERATE_EPS:
        weights = np.ones_like(scores)
    return InfluenceScores(mmd=scores, if_weights=weights)
