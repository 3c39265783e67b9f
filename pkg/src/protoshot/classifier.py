"""Prototype-based classifier with a scikit-learn estimator interface."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .core import pairwise_sq_dists
from .prototypes import PrototypeStrategy, compute_all_prototypes, make_strategy


class PrototypeClassifier(ClassifierMixin, BaseEstimator):
    """Classify by distance to per-class prototype vectors.

    Fitting builds one prototype per class from the support samples using the
    configured weighting strategy; prediction assigns each query to the class
    of the nearest prototype, with probabilities given by a softmax over the
    negated Euclidean distances. Distance ties resolve to the lowest class id.

    Parameters
    ----------
    strategy : str or PrototypeStrategy, default="uniform"
        One of "uniform", "influence", "inverse_distance", or a prebuilt
        PrototypeStrategy (in which case the remaining parameters are ignored).
    kernel : str, default="linear"
        Mean-embedding kernel for the influence strategy: "linear" or "rbf".
    bandwidth : float or "auto", default="auto"
        RBF bandwidth; "auto" selects the median heuristic.
    epsilon : float, default=1e-8
        Division guard for the inverse-distance strategy.

    Attributes
    ----------
    classes_ : ndarray of shape (n_classes,)
        Class labels in ascending order.
    prototypes_ : ndarray of shape (n_classes, n_features)
        One prototype per class, aligned with ``classes_``.
    prototype_weights_ : list of ndarray
        Per class, the normalized per-sample weights that formed the prototype.

    Examples
    --------
    >>> import numpy as np
    >>> X = np.array([[0.0], [0.0], [3.0], [10.0], [10.0]])
    >>> y = np.array([0, 0, 0, 1, 1])
    >>> clf = PrototypeClassifier(strategy="influence").fit(X, y)
    >>> clf.predict([[1.0]])
    array([0])
    """

    def __init__(self, strategy="uniform", kernel="linear", bandwidth="auto", epsilon=1e-8):
        self.strategy = strategy
        self.kernel = kernel
        self.bandwidth = bandwidth
        self.epsilon = epsilon

    def _resolved_strategy(self):
        if isinstance(self.strategy, PrototypeStrategy):
            return self.strategy
        return make_strategy(self.strategy, self.kernel, self.bandwidth, self.epsilon)

    def fit(self, X, y):
        """Build per-class prototypes from the support samples.

        Parameters
        ----------
        X : array-like of shape (n_samples, n_features)
            Support embeddings.
        y : array-like of shape (n_samples,)
            Class labels.

        Returns
        -------
        self
        """
        X, y = check_X_y(X, y)
        proto_set = compute_all_prototypes(X, y, self._resolved_strategy())
        self.classes_ = proto_set.class_ids
        self.prototypes_ = proto_set.vectors
        self.prototype_weights_ = proto_set.weights_used
        return self

    def predict_proba(self, X):
        """Softmax over negated distances to each class prototype."""
        check_is_fitted(self, "prototypes_")
        X = check_array(X)
        if X.shape[1] != self.prototypes_.shape[1]:
            raise ValueError(
                f"dimension mismatch: X has dimension {X.shape[1]}, "
                f"prototypes have dimension {self.prototypes_.shape[1]}"
            )
        dists = np.sqrt(pairwise_sq_dists(X, self.prototypes_))
        shifted = dists - dists.min(axis=1, keepdims=True)
        e = np.exp(-shifted)
        return e / e.sum(axis=1, keepdims=True)

    def predict(self, X):
        """Label of the nearest prototype for each row of X."""
        probs = self.predict_proba(X)
        return self.classes_[np.argmax(probs, axis=1)]
