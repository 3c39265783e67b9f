"""Prototype-based few-shot classification with influence-weighted prototypes.

The package centers on :class:`PrototypeClassifier`, a scikit-learn style
estimator that classifies queries by softmax over negated Euclidean
distances to per-class prototypes. Prototypes can be plain means,
inverse-distance weighted means, or influence-weighted means, where each
support sample's weight reflects how little its removal shifts the class
distribution under a kernel two-sample discrepancy.

Around the estimator sit an episodic N-way K-shot sampling/evaluation
harness, a small feed-forward embedder trained with episodic SGD, synthetic
contaminated-domain generators, and a benchmark CLI (``protoshot``).
"""

from .bench import (
    ResultRow,
    ResultTable,
    export_embeddings,
    format_report,
    run_config,
    run_cross_domain,
    run_intra_domain,
    write_results,
)
from .classifier import PrototypeClassifier
from .config import DatasetConfig, ExperimentConfig, parse_config
from .core import derived_rng, euclidean_distance, softmax_neg_distances
from .datasets import (
    Dataset,
    SyntheticSpec,
    generate_synthetic,
    load_csv,
    save_csv,
    split_classes,
)
from .embedder import (
    EmbedderSpec,
    FeedForwardEmbedder,
    IdentityEmbedder,
    load_params,
    save_params,
)
from .episodes import (
    Episode,
    MetricsReport,
    classify_episode,
    evaluate,
    sample_episode,
    train,
)
from .influence import (
    InfluenceScores,
    KernelConfig,
    influence_weights,
    leave_one_out_mmd,
    median_heuristic_bandwidth,
    mmd,
)
from .metrics import accuracy, auc_one_vs_rest
from .prototypes import (
    PrototypeSet,
    PrototypeStrategy,
    compute_all_prototypes,
    compute_prototype,
    make_strategy,
)
from .training import SGDMomentum, episode_gradients, episode_loss

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "DatasetConfig",
    "EmbedderSpec",
    "Episode",
    "ExperimentConfig",
    "FeedForwardEmbedder",
    "IdentityEmbedder",
    "InfluenceScores",
    "KernelConfig",
    "MetricsReport",
    "PrototypeClassifier",
    "PrototypeSet",
    "PrototypeStrategy",
    "ResultRow",
    "ResultTable",
    "SGDMomentum",
    "SyntheticSpec",
    "accuracy",
    "auc_one_vs_rest",
    "classify_episode",
    "compute_all_prototypes",
    "compute_prototype",
    "derived_rng",
    "episode_gradients",
    "episode_loss",
    "euclidean_distance",
    "evaluate",
    "export_embeddings",
    "format_report",
    "generate_synthetic",
    "influence_weights",
    "leave_one_out_mmd",
    "load_csv",
    "load_params",
    "make_strategy",
    "mmd",
    "median_heuristic_bandwidth",
    "parse_config",
    "run_config",
    "run_cross_domain",
    "run_intra_domain",
    "sample_episode",
    "save_csv",
    "save_params",
    "softmax_neg_distances",
    "split_classes",
    "train",
    "write_results",
]
