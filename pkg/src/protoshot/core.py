"""Shared numeric primitives: distances, distance softmax, vector statistics.

All functions operate on plain float64 numpy arrays and are pure, so they are
safe to call from any number of concurrent workers. Randomness everywhere in
this package flows through explicitly passed ``numpy.random.Generator``
instances (PCG64 via ``numpy.random.default_rng``); nothing touches the
global numpy RNG state.
"""

import numpy as np


def as_matrix(rows, name="rows"):
    """Coerce to a finite 2-D float64 array, raising on bad input."""
    m = np.asarray(rows, dtype=float)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise ValueError(f"{name} must be a nonempty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_vector(values, name="values"):
    """Coerce to a finite 1-D float64 array, raising on bad input."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def euclidean_distance(a, b):
    """Euclidean distance between two feature vectors of equal dimension."""
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    if a.shape[0] != b.shape[0]:
        raise ValueError(
            f"dimension mismatch: a has dimension {a.shape[0]}, b has dimension {b.shape[0]}"
        )
    return float(np.sqrt(np.sum((a - b) ** 2)))


def softmax_neg_distances(distances):
    """Probability vector proportional to exp(-d) over a list of distances.

    Shifted by the minimum distance before exponentiation so the result stays
    finite for arbitrarily large inputs. The largest probability always lands
    on the smallest distance.
    """
    d = as_vector(distances, "distances")
    shifted = d - d.min()
    e = np.exp(-shifted)
    return e / e.sum()


def mean_vector(rows):
    """Component-wise arithmetic mean of the rows of an embedding matrix."""
    m = as_matrix(rows)
    return m.mean(axis=0)


def pairwise_sq_dists(a, b):
    """Matrix of squared Euclidean distances between rows of a and rows of b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aa = np.sum(a * a, axis=1)[:, None]
    bb = np.sum(b * b, axis=1)[None, :]
    sq = aa + bb - 2.0 * (a @ b.T)
    return np.maximum(sq, 0.0)


def derived_rng(*entropy):
    """Deterministic generator derived from a tuple of nonnegative ints.

    Used to give every episode / grid cell its own independent stream, so
    serial and parallel execution orders produce identical results.
    """
    return np.random.default_rng(np.random.SeedSequence([int(e) for e in entropy]))


def ensure_rng(rng):
    """Accept a seed int or a Generator; return a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(int(rng))
