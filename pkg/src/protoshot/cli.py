"""Command-line front end.

Subcommands::

    run                run the configured benchmark grid, write result CSVs
    gen-data           draw a synthetic domain and write it as CSV
    export-embeddings  embed a CSV dataset and dump rows plus prototypes
    report             pretty-print an emitted result table

``run`` reads an optional config file (see :mod:`protoshot.config` for the
schema); any flag given on the command line overrides the file value. Exit
status is 0 on success and 2 on any configuration or runtime error, with a
diagnostic on stderr.
"""

import argparse
import sys

from .bench import ResultTable, export_embeddings, format_report, run_config, write_results
from .config import parse_config
from .datasets import generate_synthetic, load_csv, save_csv, SyntheticSpec
from .embedder import IdentityEmbedder, load_params
from .prototypes import make_strategy


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="protoshot",
        description="Few-shot prototype benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the configured benchmark grid")
    run.add_argument("--config", help="path to a key = value config file")
    run.add_argument("--seed", help="run seed (nonnegative integer)")
    run.add_argument("--mode", help="intra or cross")
    run.add_argument("--strategy", help="comma list: uniform, inverse_distance, influence")
    run.add_argument("--n-way", help="comma list of way counts")
    run.add_argument("--k-shot", help="comma list of shot counts")
    run.add_argument("--episodes", help="test episodes per grid cell")
    run.add_argument("--out", default="results", help="directory for result CSVs")
    run.add_argument(
        "--data",
        action="append",
        metavar="NAME=PATH",
        help="declare a CSV dataset (repeatable)",
    )
    run.add_argument("--train-classes", help="comma list applied to every dataset")
    run.add_argument("--test-classes", help="comma list applied to every dataset")

    gen = sub.add_parser("gen-data", help="write a synthetic domain as CSV")
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.add_argument("--n-classes", type=int, default=6)
    gen.add_argument("--per-class", type=int, default=40)
    gen.add_argument("--dim", type=int, default=8)
    gen.add_argument("--class-separation", type=float, default=2.5)
    gen.add_argument("--within-std", type=float, default=1.0)
    gen.add_argument("--outlier-fraction", type=float, default=0.0)
    gen.add_argument("--outlier-scale", type=float, default=1.0)
    gen.add_argument("--seed", type=int, default=0)

    exp = sub.add_parser("export-embeddings", help="dump embeddings plus prototypes")
    exp.add_argument("--data", required=True, metavar="NAME=PATH", help="CSV dataset")
    exp.add_argument("--params", help="embedder checkpoint (default: identity)")
    exp.add_argument("--strategy", default="uniform", help="comma list of strategies")
    exp.add_argument("--out", required=True, help="output CSV path")

    rep = sub.add_parser("report", help="pretty-print a result table CSV")
    rep.add_argument("table", help="path to an emitted results CSV")
    return parser


def _cmd_run(args):
    overrides = {
        "seed": args.seed,
        "mode": args.mode,
        "strategies": args.strategy,
        "n_way": args.n_way,
        "k_shot": args.k_shot,
        "test_episodes": args.episodes,
        "data": args.data,
        "train_classes": args.train_classes,
        "test_classes": args.test_classes,
    }
    config = parse_config(args.config, overrides)
    table = run_config(config)
    path, latest = write_results(table, args.out)
    print(f"wrote {path}")
    print(f"wrote {latest}")
    print(format_report(table))
    return 0


def _cmd_gen_data(args):
    spec = SyntheticSpec(
        n_classes=args.n_classes,
        per_class=args.per_class,
        dim=args.dim,
        class_separation=args.class_separation,
        within_std=args.within_std,
        outlier_fraction=args.outlier_fraction,
        outlier_scale=args.outlier_scale,
        seed=args.seed,
    )
    dataset = generate_synthetic(spec)
    save_csv(dataset, args.out)
    print(f"wrote {args.out} ({len(dataset)} rows, {spec.n_classes} classes, dim {spec.dim})")
    return 0


def _cmd_export(args):
    name, sep, path = args.data.partition("=")
    if not sep or not name.strip() or not path.strip():
        raise ValueError(f"--data: expected NAME=PATH, got {args.data!r}")
    dataset = load_csv(path.strip(), name.strip())
    embedder = load_params(args.params) if args.params else IdentityEmbedder()
    kinds = [item.strip() for item in args.strategy.split(",") if item.strip()]
    if not kinds:
        raise ValueError(f"--strategy: expected a nonempty comma list, got {args.strategy!r}")
    strategies = [make_strategy(kind) for kind in kinds]
    export_embeddings(dataset, embedder, strategies, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_report(args):
    try:
        with open(args.table, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValueError(f"cannot read {args.table!r}: {exc}") from None
    print(format_report(ResultTable.from_csv(text)))
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "gen-data": _cmd_gen_data,
    "export-embeddings": _cmd_export,
    "report": _cmd_report,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, FloatingPointError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
