"""Accuracy and macro one-vs-rest ROC AUC over per-query class scores."""

import numpy as np


def accuracy(predicted, true_labels):
    predicted = np.asarray(predicted)
    true_labels = np.asarray(true_labels)
    if predicted.shape != true_labels.shape:
        raise ValueError(f"shape mismatch: {predicted.shape} vs {true_labels.shape}")
    return float(np.mean(predicted == true_labels))


def _midranks(values):
    """Ranks 1..n with tied values assigned the mean of their rank range."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.shape[0])
    sorted_vals = values[order]
    i = 0
    n = values.shape[0]
    while i < n:
        j = i
        while j + 1 < n and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _binary_auc(scores, positive):
    """Mann-Whitney rank AUC; ties between a positive and a negative count 0.5."""
    n_pos = int(positive.sum())
    n_neg = positive.shape[0] - n_pos
    ranks = _midranks(scores)
    u = ranks[positive].sum() - 0.5 * n_pos * (n_pos + 1)
    return u / (n_pos * n_neg)


def auc_one_vs_rest(scores, true_labels, class_ids=None):
    """Macro-averaged one-vs-rest AUC from a (n_queries, n_classes) score matrix.

    Column j scores membership in ``class_ids[j]`` (default: the sorted
    distinct labels, which must then match the column count). Classes without
    both a positive and a negative query are skipped; if no class qualifies
    the result is the chance value 0.5.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2 or scores.shape[0] == 0:
        raise ValueError(f"scores must be a nonempty 2-D array, got shape {scores.shape}")
    true_labels = np.asarray(true_labels)
    if true_labels.shape[0] != scores.shape[0]:
        raise ValueError(
            f"got {true_labels.shape[0]} labels for {scores.shape[0]} score rows"
        )
    if class_ids is None:
        class_ids = np.unique(true_labels)
    else:
        class_ids = np.asarray(class_ids)
    if class_ids.shape[0] != scores.shape[1]:
        raise ValueError(
            f"{class_ids.shape[0]} classes do not match {scores.shape[1]} score columns"
        )
    per_class = []
    for j, cid in enumerate(class_ids):
        positive = true_labels == cid
        if positive.all() or not positive.any():
            continue
        per_class.append(_binary_auc(scores[:, j], positive))
    if not per_class:
        return 0.5
    return float(np.mean(per_class))
