"""Experiment configuration: flat ``key = value`` files plus CLI overrides.

Config files are plain text: one ``key = value`` per line, ``#`` starts a
comment, list values are comma-separated, later assignments win, and any
override passed on top (the CLI flags) beats the file. Schema:

::

    mode = intra | cross                          (default intra)
    seed = nonnegative int                        (default 0)
    strategies = uniform, inverse_distance, influence    (default all three)
    n_way = 2, 5                                  (default 2)
    k_shot = 1, 5                                 (default 5)
    q_query = int >= 1                            (default: the cell's k_shot)
    train_shot = int >= 1                         (default 10)
    train_steps = int >= 0                        (default 0)
    test_episodes = int >= 1                      (default 2000)
    embedder = identity | feedforward             (default identity)
    layer_dims = 8, 16, 8                         (required for feedforward)
    learning_rate = positive float                (default 0.01)
    momentum = float in [0, 1)                    (default 0.9)
    kernel = linear | rbf                         (default linear)
    bandwidth = auto | positive float             (default auto)
    epsilon = positive float                      (default 1e-8)
    datasets = alpha, beta                        (domain names)
    dataset.<name>.csv = path/to/features.csv     (CSV-backed domain)
    dataset.<name>.n_classes = 6                  (synthetic domain; with
        per_class, dim, class_separation, within_std, outlier_fraction,
        outlier_scale, seed)
    dataset.<name>.train_classes = 0, 1, 2        (default: first half)
    dataset.<name>.test_classes = 3, 4, 5         (default: second half)

Every domain needs exactly one source: a ``csv`` path or the synthetic
fields (``n_classes``, ``per_class``, ``dim`` required; the rest default to
class_separation 2.5, within_std 1.0, outlier_fraction 0.0, outlier_scale
1.0, seed 0). When a class split is not given, the sorted class ids are
split in half, first half train, second half test.
"""

import math
from dataclasses import dataclass, field

from .datasets import Dataset, SyntheticSpec, generate_synthetic, load_csv
from .embedder import EMBEDDER_KINDS, FEEDFORWARD, IDENTITY, EmbedderSpec
from .influence import KERNEL_KINDS
from .prototypes import STRATEGY_KINDS

INTRA = "intra"
CROSS = "cross"
MODES = (INTRA, CROSS)

_SYNTH_REQUIRED = ("n_classes", "per_class", "dim")
_SYNTH_OPTIONAL = {
    "class_separation": 2.5,
    "within_std": 1.0,
    "outlier_fraction": 0.0,
    "outlier_scale": 1.0,
    "seed": 0,
}
_DATASET_FIELDS = (
    ("csv", "train_classes", "test_classes") + _SYNTH_REQUIRED + tuple(_SYNTH_OPTIONAL)
)


def _fail(key, expected, got):
    raise ValueError(f"{key}: expected {expected}, got {got!r}")


def _parse_int(raw, key, minimum=None):
    try:
        value = int(str(raw).strip())
    except ValueError:
        _fail(key, "an integer", raw)
    if minimum is not None and value < minimum:
        _fail(key, f"an integer >= {minimum}", raw)
    return value


def _parse_float(raw, key, minimum=None, exclusive=False):
    try:
        value = float(str(raw).strip())
    except ValueError:
        _fail(key, "a number", raw)
    if not math.isfinite(value):
        _fail(key, "a finite number", raw)
    if minimum is not None and (value <= minimum if exclusive else value < minimum):
        bound = f"> {minimum}" if exclusive else f">= {minimum}"
        _fail(key, f"a number {bound}", raw)
    return value


def _parse_choice(raw, key, choices):
    value = str(raw).strip().lower()
    if value not in choices:
        _fail(key, " or ".join(repr(c) for c in choices), raw)
    return value


def _split_list(raw, key):
    items = [item.strip() for item in str(raw).split(",")]
    items = [item for item in items if item]
    if not items:
        _fail(key, "a nonempty comma-separated list", raw)
    return items


def _parse_int_list(raw, key, minimum):
    return [_parse_int(item, key, minimum=minimum) for item in _split_list(raw, key)]


def _parse_bandwidth(raw, key):
    text = str(raw).strip()
    if text.lower() == "auto":
        return "auto"
    return _parse_float(text, key, minimum=0.0, exclusive=True)


@dataclass
class DatasetConfig:
    """One named domain: a data source plus its train/test class split."""

    name: str
    csv_path: str = None
    synthetic: SyntheticSpec = None
    train_classes: list = None
    test_classes: list = None
    _loaded: Dataset = field(default=None, repr=False, compare=False)

    def load(self):
        """Materialize the domain (CSV read or synthetic draw), cached."""
        if self._loaded is None:
            if self.csv_path is not None:
                self._loaded = load_csv(self.csv_path, self.name)
            else:
                self._loaded = generate_synthetic(self.synthetic, name=self.name)
        return self._loaded

    def all_class_ids(self):
        if self.synthetic is not None:
            return list(range(self.synthetic.n_classes))
        return self.load().class_ids

    @property
    def dim(self):
        if self.synthetic is not None:
            return self.synthetic.dim
        return self.load().dim


@dataclass
class ExperimentConfig:
    """Fully validated description of one benchmark run."""

    mode: str = INTRA
    seed: int = 0
    strategies: list = field(default_factory=lambda: list(STRATEGY_KINDS))
    n_way: list = field(default_factory=lambda: [2])
    k_shot: list = field(default_factory=lambda: [5])
    q_query: int = None
    train_shot: int = 10
    train_steps: int = 0
    test_episodes: int = 2000
    embedder: str = IDENTITY
    layer_dims: list = None
    learning_rate: float = 0.01
    momentum: float = 0.9
    kernel: str = "linear"
    bandwidth: object = "auto"
    epsilon: float = 1e-8
    datasets: list = field(default_factory=list)

    def embedder_spec(self):
        if self.embedder == FEEDFORWARD:
            return EmbedderSpec(FEEDFORWARD, tuple(self.layer_dims))
        return EmbedderSpec(IDENTITY)


_TOP_LEVEL_PARSERS = {
    "mode": lambda raw: _parse_choice(raw, "mode", MODES),
    "seed": lambda raw: _parse_int(raw, "seed", minimum=0),
    "strategies": lambda raw: [
        _parse_choice(item, "strategies", STRATEGY_KINDS)
        for item in _split_list(raw, "strategies")
    ],
    "n_way": lambda raw: _parse_int_list(raw, "n_way", minimum=2),
    "k_shot": lambda raw: _parse_int_list(raw, "k_shot", minimum=1),
    "q_query": lambda raw: _parse_int(raw, "q_query", minimum=1),
    "train_shot": lambda raw: _parse_int(raw, "train_shot", minimum=1),
    "train_steps": lambda raw: _parse_int(raw, "train_steps", minimum=0),
    "test_episodes": lambda raw: _parse_int(raw, "test_episodes", minimum=1),
    "embedder": lambda raw: _parse_choice(raw, "embedder", EMBEDDER_KINDS),
    "layer_dims": lambda raw: _parse_int_list(raw, "layer_dims", minimum=1),
    "learning_rate": lambda raw: _parse_float(raw, "learning_rate", 0.0, exclusive=True),
    "momentum": lambda raw: _parse_float(raw, "momentum", 0.0),
    "kernel": lambda raw: _parse_choice(raw, "kernel", KERNEL_KINDS),
    "bandwidth": lambda raw: _parse_bandwidth(raw, "bandwidth"),
    "epsilon": lambda raw: _parse_float(raw, "epsilon", 0.0, exclusive=True),
}


def _read_file_pairs(path):
    pairs = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ValueError(f"cannot read config {path!r}: {exc}") from None
    for lineno, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, _, value = body.partition("=")
        pairs.append((f"{path}:{lineno}", key.strip(), value.strip()))
    return pairs


def _override_pairs(overrides):
    pairs = []
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "data":
            values = value if isinstance(value, (list, tuple)) else [value]
            for item in values:
                name, sep, csv_path = str(item).partition("=")
                if not sep or not name.strip() or not csv_path.strip():
                    _fail("data", "NAME=PATH", item)
                pairs.append(("override", "datasets", None, ("declare", name.strip())))
                pairs.append(("override", f"dataset.{name.strip()}.csv", csv_path.strip(), None))
        elif key in ("train_classes", "test_classes"):
            pairs.append(("override", key, str(value), ("broadcast", key)))
        else:
            pairs.append(("override", key, str(value), None))
    return pairs


def parse_config(path=None, overrides=None):
    """Build an ExperimentConfig from an optional file and optional overrides.

    ``overrides`` is a mapping from config keys to raw string values (the
    CLI passes its flags through here) plus three virtual keys: ``data``
    (one or more ``NAME=PATH`` CSV declarations), and ``train_classes`` /
    ``test_classes``, which apply to every configured dataset. Override
    values always beat file values.
    """
    top_raw = {}
    ds_raw = {}
    ds_order = []
    broadcast = {}

    def declare(name):
        if name not in ds_raw:
            ds_raw[name] = {}
            ds_order.append(name)

    def absorb(where, key, value):
        if key == "datasets":
            for name in _split_list(value, "datasets"):
                declare(name)
        elif key.startswith("dataset."):
            parts = key.split(".")
            if len(parts) != 3 or not parts[1] or parts[2] not in _DATASET_FIELDS:
                raise ValueError(
                    f"{where}: unknown config key {key!r} "
                    f"(expected dataset.<name>.<field> with field in {sorted(_DATASET_FIELDS)})"
                )
            name = parts[1]
            if name not in ds_raw:
                raise ValueError(
                    f"{where}: dataset {name!r} is not declared; add it to the "
                    f"'datasets' list before setting {key!r}"
                )
            ds_raw[name][parts[2]] = value
        elif key in _TOP_LEVEL_PARSERS:
            top_raw[key] = value
        else:
            raise ValueError(f"{where}: unknown config key {key!r}")

    if path is not None:
        for where, key, value in _read_file_pairs(path):
            absorb(where, key, value)
    for where, key, value, special in _override_pairs(overrides):
        if special is not None and special[0] == "declare":
            declare(special[1])
        elif special is not None and special[0] == "broadcast":
            broadcast[special[1]] = value
        else:
            absorb(where, key, value)

    cfg = ExperimentConfig()
    for key, raw in top_raw.items():
        setattr(cfg, key, _TOP_LEVEL_PARSERS[key](raw))

    if not ds_raw:
        raise ValueError(
            "no datasets configured: set 'datasets = ...' in the config file "
            "or pass --data NAME=PATH"
        )
    for name in ds_order:
        cfg.datasets.append(_build_dataset_config(name, ds_raw[name], broadcast))
    _validate(cfg)
    return cfg


def _build_dataset_config(name, fields, broadcast):
    prefix = f"dataset.{name}"
    fields = dict(fields)
    fields.update(broadcast)
    csv_path = fields.pop("csv", None)
    split = {
        side: _parse_int_list(fields.pop(side), f"{prefix}.{side}", minimum=None)
        if side in fields
        else None
        for side in ("train_classes", "test_classes")
    }
    synth = None
    if csv_path is None:
        missing = [k for k in _SYNTH_REQUIRED if k not in fields]
        if missing:
            raise ValueError(
                f"{prefix}: dataset needs either a csv path or the synthetic fields; "
                f"missing {missing}"
            )
        values = {
            "n_classes": _parse_int(fields.pop("n_classes"), f"{prefix}.n_classes", 2),
            "per_class": _parse_int(fields.pop("per_class"), f"{prefix}.per_class", 1),
            "dim": _parse_int(fields.pop("dim"), f"{prefix}.dim", 1),
        }
        for key, default in _SYNTH_OPTIONAL.items():
            raw = fields.pop(key, None)
            if raw is None:
                values[key] = default
            elif key == "seed":
                values[key] = _parse_int(raw, f"{prefix}.seed", minimum=0)
            else:
                values[key] = _parse_float(raw, f"{prefix}.{key}", minimum=0.0)
        try:
            synth = SyntheticSpec(**values)
        except ValueError as exc:
            raise ValueError(f"{prefix}: {exc}") from None
    elif fields:
        raise ValueError(
            f"{prefix}: csv dataset cannot also set synthetic fields {sorted(fields)}"
        )

    ds = DatasetConfig(
        name=name,
        csv_path=csv_path,
        synthetic=synth,
        train_classes=split["train_classes"],
        test_classes=split["test_classes"],
    )
    _resolve_split(ds, prefix)
    return ds


def _resolve_split(ds, prefix):
    ids = ds.all_class_ids()
    if ds.train_classes is None and ds.test_classes is None:
        half = (len(ids) + 1) // 2
        ds.train_classes = list(ids[:half])
        ds.test_classes = list(ids[half:])
    if ds.train_classes is None or ds.test_classes is None:
        raise ValueError(
            f"{prefix}: train_classes and test_classes must be given together"
        )
    known = set(ids)
    for side in ("train_classes", "test_classes"):
        values = getattr(ds, side)
        if not values:
            raise ValueError(f"{prefix}.{side}: must be nonempty")
        unknown = sorted(set(values) - known)
        if unknown:
            raise ValueError(
                f"{prefix}.{side}: class ids {unknown} not present in the dataset "
                f"(available: {sorted(known)})"
            )
    overlap = sorted(set(ds.train_classes) & set(ds.test_classes))
    if overlap:
        raise ValueError(f"{prefix}: train/test class overlap {overlap}")


def _validate(cfg):
    if cfg.embedder == FEEDFORWARD and cfg.layer_dims is None:
        raise ValueError("layer_dims: required when embedder = feedforward")
    if cfg.embedder == IDENTITY and cfg.layer_dims is not None:
        raise ValueError("layer_dims: only valid when embedder = feedforward")
    if not (0.0 <= cfg.momentum < 1.0):
        raise ValueError(f"momentum: expected a number in [0, 1), got {cfg.momentum!r}")
    for ds in cfg.datasets:
        for n in cfg.n_way:
            if n > len(ds.test_classes):
                raise ValueError(
                    f"n_way = {n} exceeds the {len(ds.test_classes)} test classes "
                    f"of dataset {ds.name!r}"
                )
    if cfg.mode == CROSS:
        if len(cfg.datasets) < 2:
            raise ValueError("mode = cross needs at least two datasets")
        dims = {ds.name: ds.dim for ds in cfg.datasets}
        if len(set(dims.values())) > 1:
            raise ValueError(f"mode = cross needs equal feature dimensions, got {dims}")
    if cfg.embedder == FEEDFORWARD:
        if len(cfg.layer_dims) < 2:
            raise ValueError("layer_dims: feedforward embedder needs >= 2 entries")
        for ds in cfg.datasets:
            if ds.dim != cfg.layer_dims[0]:
                raise ValueError(
                    f"layer_dims[0] = {cfg.layer_dims[0]} does not match the "
                    f"dimension {ds.dim} of dataset {ds.name!r}"
                )
