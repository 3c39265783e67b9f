"""Episode sampling, episode classification, and the evaluate/train loops.

An episode is a single N-way K-shot task: N classes drawn from a dataset
without replacement, then K support and Q query samples per class, again
without replacement, so support and query never share a row. Evaluation
aggregates per-episode accuracy and macro one-vs-rest AUC over many
independent episodes; training runs episodes sequentially and applies
SGD-with-momentum updates to a feed-forward embedder.

Reproducibility contract: ``evaluate`` accepts an integer seed (or a tuple
of integers) and derives one child stream per episode index, so the same
seed yields a bit-identical report whether episodes execute serially or on
parallel workers. Passing a live ``numpy.random.Generator`` instead draws
every episode sequentially from that one stream.
"""

import json
from dataclasses import dataclass

import numpy as np

from .classifier import PrototypeClassifier
from .core import derived_rng, ensure_rng
from .embedder import IdentityEmbedder
from .metrics import accuracy, auc_one_vs_rest
from .prototypes import PrototypeStrategy, make_strategy
from .training import SGDMomentum, episode_gradients

METRICS_CSV_HEADER = "dataset,strategy,n_way,k_shot,episodes,mean_acc,std_acc,mean_auc,seed"


@dataclass(frozen=True)
class Episode:
    """One N-way K-shot task: raw (unembedded) support and query samples."""

    support_x: np.ndarray
    support_y: np.ndarray
    query_x: np.ndarray
    query_y: np.ndarray
    class_ids: np.ndarray


def sample_episode(dataset, n_way, k_shot, q_query, rng):
    """Draw one episode from ``dataset`` uniformly without replacement.

    Classes are drawn first, then ``k_shot + q_query`` rows per class; the
    first ``k_shot`` of each draw become support, the rest query. Entirely
    deterministic given the generator state.
    """
    n_way, k_shot, q_query = int(n_way), int(k_shot), int(q_query)
    if n_way < 1:
        raise ValueError(f"n_way must be >= 1, got {n_way}")
    if k_shot < 1 or q_query < 1:
        raise ValueError(f"k_shot and q_query must be >= 1, got {k_shot} and {q_query}")
    gen = ensure_rng(rng)
    ids = dataset.class_ids
    if len(ids) < n_way:
        raise ValueError(
            f"dataset {dataset.name!r} has {len(ids)} classes but n_way is {n_way}"
        )
    chosen = gen.choice(np.asarray(ids), size=n_way, replace=False)
    need = k_shot + q_query
    support_rows, query_rows = [], []
    for c in chosen:
        c = int(c)
        index = dataset.class_index[c]
        if index.shape[0] < need:
            raise ValueError(
                f"class {c} of dataset {dataset.name!r} has {index.shape[0]} samples "
                f"but k_shot + q_query is {need}"
            )
        picked = gen.choice(index, size=need, replace=False)
        support_rows.append(picked[:k_shot])
        query_rows.append(picked[k_shot:])
    support_idx = np.concatenate(support_rows)
    query_idx = np.concatenate(query_rows)
    return Episode(
        support_x=dataset.features[support_idx],
        support_y=dataset.labels[support_idx],
        query_x=dataset.features[query_idx],
        query_y=dataset.labels[query_idx],
        class_ids=np.asarray([int(c) for c in chosen]),
    )


def classify_episode(episode, embedder=IdentityEmbedder(), strategy=PrototypeStrategy()):
    """Embed an episode and classify its queries against class prototypes.

    ``strategy`` may be a PrototypeStrategy or a kind string. Returns
    ``(probs, preds)``: one probability row per query with columns ordered
    by ascending class id, and the argmax predictions (ties go to the lower
    class id).
    """
    strategy = make_strategy(strategy)
    support_emb = embedder.transform(episode.support_x)
    query_emb = embedder.transform(episode.query_x)
    clf = PrototypeClassifier(
        strategy=strategy.kind,
        kernel=strategy.kernel.kind,
        bandwidth=strategy.kernel.bandwidth,
        epsilon=strategy.epsilon,
    )
    clf.fit(support_emb, episode.support_y)
    probs = clf.predict_proba(query_emb)
    preds = clf.classes_[np.argmax(probs, axis=1)]
    return probs, preds


@dataclass(frozen=True)
class MetricsReport:
    """Aggregate metrics over a batch of evaluation episodes.

    ``accuracy_std`` is the population standard deviation of the
    per-episode accuracies. ``per_episode_records`` is kept only when
    evaluation is asked to retain it.
    """

    mean_accuracy: float
    accuracy_std: float
    mean_auc: float
    episode_count: int
    per_episode_records: list = None

    def to_json(self):
        body = {
            "mean_accuracy": self.mean_accuracy,
            "accuracy_std": self.accuracy_std,
            "mean_auc": self.mean_auc,
            "episode_count": self.episode_count,
        }
        if self.per_episode_records is not None:
            body["per_episode_records"] = self.per_episode_records
        return json.dumps(body, indent=2)

    def csv_row(self, dataset, strategy, n_way, k_shot, seed):
        """Render the report as one CSV line under ``METRICS_CSV_HEADER``."""
        fields = [
            str(dataset),
            str(strategy),
            str(int(n_way)),
            str(int(k_shot)),
            str(self.episode_count),
            repr(self.mean_accuracy),
            repr(self.accuracy_std),
            repr(self.mean_auc),
            str(seed),
        ]
        return ",".join(fields)


def _episode_rngs(rng, episodes):
    """Yield one generator per episode under the reproducibility contract."""
    if isinstance(rng, np.random.Generator):
        for _ in range(episodes):
            yield rng
    else:
        base = tuple(rng) if isinstance(rng, (tuple, list)) else (int(rng),)
        for i in range(episodes):
            yield derived_rng(*base, i)


def evaluate(
    dataset,
    embedder=IdentityEmbedder(),
    strategy=PrototypeStrategy(),
    n_way=2,
    k_shot=5,
    q_query=None,
    episodes=2000,
    rng=0,
    keep_records=False,
):
    """Run independent test episodes and aggregate accuracy and AUC.

    ``q_query`` defaults to ``k_shot``. Per-episode AUC is the macro
    one-vs-rest rank AUC over the query probability rows.
    """
    episodes = int(episodes)
    if episodes < 1:
        raise ValueError(f"episodes must be >= 1, got {episodes}")
    if q_query is None:
        q_query = k_shot
    accs = np.empty(episodes)
    aucs = np.empty(episodes)
    records = [] if keep_records else None
    for i, gen in enumerate(_episode_rngs(rng, episodes)):
        ep = sample_episode(dataset, n_way, k_shot, q_query, gen)
        probs, preds = classify_episode(ep, embedder, strategy)
        accs[i] = accuracy(preds, ep.query_y)
        aucs[i] = auc_one_vs_rest(probs, ep.query_y, class_ids=np.unique(ep.support_y))
        if records is not None:
            records.append({"episode": i, "accuracy": accs[i], "auc": aucs[i]})
    return MetricsReport(
        mean_accuracy=float(accs.mean()),
        accuracy_std=float(accs.std()),
        mean_auc=float(aucs.mean()),
        episode_count=episodes,
        per_episode_records=records,
    )


def train(
    dataset,
    embedder_spec,
    strategy=PrototypeStrategy(),
    n_way=2,
    train_shot=10,
    q_query=None,
    steps=0,
    optimizer=None,
    rng=0,
):
    """Episodic training loop; returns ``(embedder, loss_trace)``.

    Builds the embedder from ``embedder_spec``, then for each step samples
    an episode, computes the episode loss and its gradients with prototype
    weights held fixed, and applies one optimizer update. Training is
    strictly sequential; the whole run is deterministic given ``rng``.
    """
    steps = int(steps)
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    if q_query is None:
        q_query = train_shot
    if optimizer is None:
        optimizer = SGDMomentum()
    gen = derived_rng(*rng) if isinstance(rng, (tuple, list)) else ensure_rng(rng)
    embedder = embedder_spec.build(gen)
    losses = np.empty(steps)
    for step in range(steps):
        ep = sample_episode(dataset, n_way, train_shot, q_query, gen)
        loss, grads = episode_gradients(
            embedder, ep.support_x, ep.support_y, ep.query_x, ep.query_y, strategy
        )
        if not np.isfinite(loss):
            raise FloatingPointError(f"non-finite loss {loss!r} at training step {step}")
        losses[step] = loss
        if grads:
            embedder.set_parameters(optimizer.step(embedder.parameters(), grads))
    return embedder, losses
