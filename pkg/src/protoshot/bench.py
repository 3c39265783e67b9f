"""Benchmark grids over domains, strategies, and task shapes.

The intra-domain grid trains and tests within each domain (on disjoint
class splits); the cross-domain grid trains on one domain's train classes
and tests on every other domain's test classes, covering all ordered
pairs. Each grid cell gets its own rng streams derived from the run seed
and the cell's position in the sorted cell list, so cells are independent
and the emitted table is byte-stable no matter how cells are executed.

Result tables are CSV with full-precision floats (``repr`` round-trip),
sorted by (train_domain, test_domain, strategy, n_way, k_shot).
"""

import os
import time

from dataclasses import dataclass

from .config import CROSS
from .datasets import split_classes
from .episodes import evaluate, train
from .prototypes import compute_all_prototypes, make_strategy
from .training import SGDMomentum

RESULTS_CSV_HEADER = (
    "train_domain,test_domain,strategy,n_way,k_shot,"
    "mean_acc,std_acc,mean_auc,seed,episodes"
)


@dataclass(frozen=True)
class ResultRow:
    """One benchmark grid cell's aggregate metrics."""

    train_domain: str
    test_domain: str
    strategy: str
    n_way: int
    k_shot: int
    mean_acc: float
    std_acc: float
    mean_auc: float
    seed: int
    episodes: int

    def key(self):
        return (self.train_domain, self.test_domain, self.strategy, self.n_way, self.k_shot)

    def to_csv(self):
        return ",".join(
            [
                self.train_domain,
                self.test_domain,
                self.strategy,
                str(self.n_way),
                str(self.k_shot),
                repr(self.mean_acc),
                repr(self.std_acc),
                repr(self.mean_auc),
                str(self.seed),
                str(self.episodes),
            ]
        )


class ResultTable:
    """Sorted, immutable collection of ResultRow entries."""

    def __init__(self, rows):
        self.rows = tuple(sorted(rows, key=ResultRow.key))

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __eq__(self, other):
        return isinstance(other, ResultTable) and self.rows == other.rows

    def to_csv(self):
        return "\n".join([RESULTS_CSV_HEADER] + [row.to_csv() for row in self.rows]) + "\n"

    @classmethod
    def from_csv(cls, text):
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines or lines[0] != RESULTS_CSV_HEADER:
            raise ValueError(f"result table must start with header {RESULTS_CSV_HEADER!r}")
        rows = []
        for lineno, line in enumerate(lines[1:], start=2):
            parts = line.split(",")
            if len(parts) != 10:
                raise ValueError(f"result table line {lineno}: expected 10 fields, got {len(parts)}")
            rows.append(
                ResultRow(
                    train_domain=parts[0],
                    test_domain=parts[1],
                    strategy=parts[2],
                    n_way=int(parts[3]),
                    k_shot=int(parts[4]),
                    mean_acc=float(parts[5]),
                    std_acc=float(parts[6]),
                    mean_auc=float(parts[7]),
                    seed=int(parts[8]),
                    episodes=int(parts[9]),
                )
            )
        return cls(rows)


def _grid_cells(config):
    """Sorted, de-duplicated (train, test, strategy, n_way, k_shot) cells."""
    names = [ds.name for ds in config.datasets]
    if config.mode == CROSS:
        pairs = [(a, b) for a in names for b in names if a != b]
    else:
        pairs = [(name, name) for name in names]
    cells = {
        (tr, te, strategy, n, k)
        for tr, te in pairs
        for strategy in config.strategies
        for n in config.n_way
        for k in config.k_shot
    }
    return sorted(cells)


def _domain_splits(config):
    splits = {}
    for ds in config.datasets:
        data = ds.load()
        splits[ds.name] = split_classes(data, ds.train_classes, ds.test_classes)
    return splits


def _run_grid(config):
    splits = _domain_splits(config)
    spec = config.embedder_spec()
    cells = _grid_cells(config)
    rows = []
    for idx, (tr, te, strategy_kind, n, k) in enumerate(cells):
        train_data = splits[tr][0]
        test_data = splits[te][1]
        label = f"grid cell ({tr} -> {te}, {strategy_kind}, {n}-way {k}-shot)"
        if train_data.dim != test_data.dim:
            raise ValueError(
                f"{label}: train dimension {train_data.dim} != test dimension {test_data.dim}"
            )
        strategy = make_strategy(strategy_kind, config.kernel, config.bandwidth, config.epsilon)
        try:
            embedder, _ = train(
                train_data,
                spec,
                strategy,
                n_way=n,
                train_shot=config.train_shot,
                q_query=config.q_query,
                steps=config.train_steps,
                optimizer=SGDMomentum(config.learning_rate, config.momentum),
                rng=(config.seed, idx, 0),
            )
            report = evaluate(
                test_data,
                embedder,
                strategy,
                n_way=n,
                k_shot=k,
                q_query=config.q_query,
                episodes=config.test_episodes,
                rng=(config.seed, idx, 1),
            )
        except (ValueError, FloatingPointError) as exc:
            raise ValueError(f"{label}: {exc}") from exc
        rows.append(
            ResultRow(
                train_domain=tr,
                test_domain=te,
                strategy=strategy_kind,
                n_way=n,
                k_shot=k,
                mean_acc=report.mean_accuracy,
                std_acc=report.accuracy_std,
                mean_auc=report.mean_auc,
                seed=config.seed,
                episodes=report.episode_count,
            )
        )
    return ResultTable(rows)


def run_intra_domain(config):
    """Train and evaluate every strategy/task cell within each domain."""
    if config.mode == CROSS:
        raise ValueError("run_intra_domain needs mode = intra")
    return _run_grid(config)


def run_cross_domain(config):
    """Run the full ordered train-domain x test-domain permutation grid."""
    if config.mode != CROSS:
        raise ValueError("run_cross_domain needs mode = cross")
    if len(config.datasets) < 2:
        raise ValueError("cross-domain runs need at least two datasets")
    return _run_grid(config)


def run_config(config):
    """Dispatch to the intra- or cross-domain runner by config mode."""
    if config.mode == CROSS:
        return run_cross_domain(config)
    return run_intra_domain(config)


def write_results(table, out_dir):
    """Write a timestamped results CSV plus a stable latest copy.

    Never overwrites an earlier run: name collisions within one second get
    a numeric suffix. Returns (timestamped_path, latest_path).
    """
    os.makedirs(out_dir, exist_ok=True)
    stamp = time.strftime("%Y%m%d-%H%M%S")
    path = os.path.join(out_dir, f"results-{stamp}.csv")
    counter = 1
    while os.path.exists(path):
        path = os.path.join(out_dir, f"results-{stamp}-{counter}.csv")
        counter += 1
    text = table.to_csv()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    latest = os.path.join(out_dir, "results-latest.csv")
    with open(latest, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path, latest


def export_embeddings(dataset, embedder, strategies, out_path):
    """Dump embedded rows plus per-strategy class prototypes as CSV.

    Emits a ``label,e1,...,eM`` header, one row per dataset sample, then
    one ``PROTO_<class>`` row per class for each strategy, in the given
    strategy order.
    """
    emb = embedder.transform(dataset.features)
    lines = ["label," + ",".join(f"e{j + 1}" for j in range(emb.shape[1]))]
    for label, row in zip(dataset.labels, emb):
        lines.append(str(int(label)) + "," + ",".join("%.17g" % v for v in row))
    for strategy in strategies:
        protos = compute_all_prototypes(emb, dataset.labels, strategy)
        for cid, vec in zip(protos.class_ids, protos.vectors):
            lines.append(f"PROTO_{int(cid)}," + ",".join("%.17g" % v for v in vec))
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise ValueError(f"cannot write embeddings to {out_path!r}: {exc}") from None
    return out_path


def format_report(table):
    """Render a ResultTable as an aligned text table with percent accuracy."""
    headers = ("train domain", "test domain", "strategy", "way", "shot", "acc ± std (auc)")
    body = [
        (
            row.train_domain,
            row.test_domain,
            row.strategy,
            str(row.n_way),
            str(row.k_shot),
            f"{100 * row.mean_acc:.2f} ± {100 * row.std_acc:.2f} ({row.mean_auc:.2f})",
        )
        for row in table.rows
    ]
    widths = [
        max(len(headers[i]), *(len(line[i]) for line in body)) if body else len(headers[i])
        for i in range(len(headers))
    ]
    def render(line):
        return "  ".join(field.ljust(widths[i]) for i, field in enumerate(line)).rstrip()
    out = [render(headers), "  ".join("-" * w for w in widths)]
    out.extend(render(line) for line in body)
    return "\n".join(out)
