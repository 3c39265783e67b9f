"""Feature datasets: synthetic Gaussian clusters with outlier contamination,
CSV loading/saving, and class-wise train/test splits.

Synthetic datasets stand in for real feature corpora: each class is an
isotropic Gaussian cluster, optionally contaminated with points planted at a
fixed large radius from the class mean. Several named specs with different
separations act as distinct domains for cross-domain experiments.

CSV format: one sample per line, ``label,f1,f2,...,fD`` with an integer
label; an optional header line is detected by a non-numeric first field.
Features are written with 17 significant digits, so a save/load round trip
reproduces every float bit for bit.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import as_matrix


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a Gaussian-cluster dataset with planted outliers.

    ``class_separation`` places class means at that many within-class
    standard deviations from the origin along (near-)orthogonal directions.
    Per class, ``round(per_class * outlier_fraction)`` samples (half-up,
    clamped to per_class - 1) are placed at exactly
    ``outlier_scale * within_std`` from the class mean.
    """

    n_classes: int = 2
    per_class: int = 20
    dim: int = 2
    class_separation: float = 3.0
    within_std: float = 1.0
    outlier_fraction: float = 0.0
    outlier_scale: float = 6.0
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValueError(f"n_classes must be >= 2, got {self.n_classes}")
        if self.per_class < 1:
            raise ValueError(f"per_class must be >= 1, got {self.per_class}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.class_separation < 0:
            raise ValueError(f"class_separation must be >= 0, got {self.class_separation}")
        if not (self.within_std > 0):
            raise ValueError(f"within_std must be positive, got {self.within_std}")
        if not (0.0 <= self.outlier_fraction < 1.0):
            raise ValueError(f"outlier_fraction must be in [0, 1), got {self.outlier_fraction}")
        if self.outlier_scale < 1:
            raise ValueError(f"outlier_scale must be >= 1, got {self.outlier_scale}")

    @property
    def outliers_per_class(self):
        count = int(math.floor(self.per_class * self.outlier_fraction + 0.5))
        return min(count, self.per_class - 1)


class Dataset:
    """Immutable labeled feature matrix with a per-class row index."""

    def __init__(self, name, features, labels):
        self.name = str(name)
        self.features = as_matrix(features, "features")
        labels = np.asarray(labels)
        if labels.ndim != 1 or labels.shape[0] != self.features.shape[0]:
            raise ValueError(
                f"dataset {self.name!r}: {labels.shape[0] if labels.ndim == 1 else labels.shape} "
                f"labels for {self.features.shape[0]} feature rows"
            )
        self.labels = labels.astype(int)
        self.class_index = {
            int(c): np.flatnonzero(self.labels == c) for c in np.unique(self.labels)
        }

    @property
    def class_ids(self):
        return sorted(self.class_index)

    @property
    def dim(self):
        return self.features.shape[1]

    def __len__(self):
        return self.features.shape[0]


def _unit_rows(rows):
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return rows / norms


def generate_synthetic(spec, name=None):
    """Deterministically build the dataset described by ``spec``."""
    rng = np.random.default_rng(spec.seed)
    if spec.dim >= spec.n_classes:
        directions = np.eye(spec.n_classes, spec.dim)
    else:
        directions = _unit_rows(rng.normal(size=(spec.n_classes, spec.dim)))
    means = spec.class_separation * spec.within_std * directions

    n_out = spec.outliers_per_class
    n_in = spec.per_class - n_out
    blocks, labels = [], []
    for c in range(spec.n_classes):
        inliers = means[c] + spec.within_std * rng.normal(size=(n_in, spec.dim))
        blocks.append(inliers)
        if n_out:
            radial = _unit_rows(rng.normal(size=(n_out, spec.dim)))
            blocks.append(means[c] + spec.outlier_scale * spec.within_std * radial)
        labels.extend([c] * spec.per_class)
    features = np.vstack(blocks)
    return Dataset(name or f"synthetic-{spec.seed}", features, labels)


def load_csv(path, name):
    """Load ``label,f1,...,fD`` rows into a Dataset, validating as it goes."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    rows = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip()]
    if not rows:
        raise ValueError(f"{path}: file is empty")
    first_field = rows[0][1].split(",")[0].strip()
    try:
        float(first_field)
        has_header = False
    except ValueError:
        has_header = True
    if has_header:
        rows = rows[1:]
        if not rows:
            raise ValueError(f"{path}: no data rows after header")

    labels, features, width = [], [], None
    for lineno, line in rows:
        fields = [f.strip() for f in line.split(",")]
        if len(fields) < 2:
            raise ValueError(f"{path}: line {lineno}: expected 'label,f1,...', got {line!r}")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise ValueError(
                f"{path}: line {lineno}: ragged row with {len(fields)} fields, expected {width}"
            )
        try:
            labels.append(int(fields[0]))
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: label {fields[0]!r} is not an integer")
        try:
            features.append([float(f) for f in fields[1:]])
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: non-numeric feature in {line!r}")
    return Dataset(name, np.array(features), np.array(labels))


def save_csv(dataset, path):
    """Write a Dataset in the load_csv format at full float precision."""
    with open(path, "w") as fh:
        fh.write("label," + ",".join(f"f{i + 1}" for i in range(dataset.dim)) + "\n")
        for label, row in zip(dataset.labels, dataset.features):
            fh.write(str(int(label)) + "," + ",".join(f"{v:.17g}" for v in row) + "\n")


def split_classes(dataset, train_class_ids, test_class_ids):
    """Partition a dataset's rows into disjoint train/test class subsets."""
    train_ids = [int(c) for c in train_class_ids]
    test_ids = [int(c) for c in test_class_ids]
    if not train_ids or not test_ids:
        raise ValueError("train and test class sets must both be nonempty")
    overlap = set(train_ids) & set(test_ids)
    if overlap:
        raise ValueError(f"train/test class sets overlap: {sorted(overlap)}")
    unknown = (set(train_ids) | set(test_ids)) - set(dataset.class_index)
    if unknown:
        raise ValueError(
            f"unknown class ids {sorted(unknown)}; dataset {dataset.name!r} has {dataset.class_ids}"
        )

    def take(ids, suffix):
        mask = np.isin(dataset.labels, ids)
        return Dataset(dataset.name + suffix, dataset.features[mask], dataset.labels[mask])

    return take(train_ids, "/train"), take(test_ids, "/test")
