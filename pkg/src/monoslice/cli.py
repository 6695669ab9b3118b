"""Command-line entry point.

Subcommands wire the pipeline end to end and own every file artifact:

  ingest     traces file -> normalized model artifact + summary
  calibrate  model artifact -> calibrated weights artifact
  optimize   model + weights artifacts -> frontier artifact
  partition  frontier artifact -> selected class->cluster listing
  report     named groups of frontier artifacts -> per-metric ranks
  serve      frontier artifact -> read-only HTTP result service

Every artifact embeds the SHA-256 of the originally ingested traces
file; commands refuse to mix artifacts from different inputs.  A run
manifest is written before any trial executes.  Exit codes: 0 success,
1 internal/runtime error, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import os
import statistics
import sys

from . import __version__
from .artifacts import (
    ArtifactError,
    check_same_input,
    frontier_doc,
    frontier_from_doc,
    manifest_doc,
    model_doc,
    model_from_doc,
    read_artifact,
    sha256_bytes,
    weights_doc,
    weights_from_doc,
    write_artifact,
)
from .features import build_feature_bundle
from .hpo import (
    CalibrationError,
    Dimension,
    SearchSpace,
    WeightVector,
    calibrate_weights,
    optimize,
)
from .metrics import METRIC_NAMES
from .stats import scott_knott
from .trace_model import (
    EmptyGraphError,
    TraceParseError,
    TraceValidationError,
    build_call_graph,
    parse_trace_file,
    pruned_classes,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2

OUT_DIR_ENV = "MONOSLICE_OUT"

#: per-metric optimization direction: "-" minimized, "+" maximized
METRIC_DIRECTIONS = {"bcs": "-", "icp": "-", "sm": "+", "mq": "+", "ifn": "-", "ned": "-"}


class UsageError(ValueError):
    """Bad flags or bad inputs detected before any work runs."""


def _out_dir(args) -> str:
    out = args.out or os.environ.get(OUT_DIR_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write(out_dir: str, name: str, doc: dict) -> str:
    path = os.path.join(out_dir, name)
    write_artifact(path, doc)
    print(f"wrote {path}")
    return path


def _load_model(path: str):
    doc = read_artifact(path, "model")
    model = model_from_doc(doc)
    graph = build_call_graph(model)
    bundle = build_feature_bundle(model, graph)
    return doc, model, graph, bundle


# ------------------------------------------------------------------ ingest


def cmd_ingest(args) -> int:
    try:
        with open(args.traces, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.traces}: {exc}") from exc
    model = parse_trace_file(raw)
    graph = build_call_graph(model)
    pruned = pruned_classes(model, graph)

    print(f"{len(model.classes)} classes, {len(model.entry_points)} traces")
    print(f"pruned: {', '.join(pruned) if pruned else 'none'}")
    coverage = len(graph.nodes) / len(model.classes)
    print(f"coverage: {len(graph.nodes)}/{len(model.classes)} classes ({coverage:.3f})")

    out = _out_dir(args)
    _write(out, "model.json", model_doc(model, sha256_bytes(raw)))
    return EXIT_OK


# --------------------------------------------------------------- calibrate


def cmd_calibrate(args) -> int:
    if args.n_runs < 2:
        raise UsageError("--n-runs must be at least 2")
    if args.epochs < 1:
        raise UsageError("--epochs must be at least 1")
    model_art, model, graph, bundle = _load_model(args.model)
    out = _out_dir(args)
    _write(
        out,
        "manifest-calibrate.json",
        manifest_doc(
            input_path=args.model,
            input_sha256=model_art["input_sha256"],
            command="calibrate",
            seed=args.seed,
            space=SearchSpace.gcn(),
            out_dir=out,
            n_runs=args.n_runs,
        ),
    )
    result = calibrate_weights(
        model, bundle, n_runs=args.n_runs, seed=args.seed, epochs=args.epochs
    )
    w = result.weights
    print(
        f"weights: w_sm={w.w_sm:.6f} w_icp={w.w_icp:.6f} "
        f"w_ned={w.w_ned:.6f} w_bcs={w.w_bcs:.6f}"
    )
    print(f"runs: {args.n_runs - result.n_failed}/{args.n_runs} succeeded")
    _write(out, "weights.json", weights_doc(result, model_art["input_sha256"], args.n_runs, args.seed))
    return EXIT_OK


# ---------------------------------------------------------------- optimize


def _baseline_space(bundle) -> SearchSpace:
    n = len(bundle.nodes)
    return SearchSpace(dimensions=(Dimension("k", 2, max(2, min(13, n)), integer=True),))


def cmd_optimize(args) -> int:
    if args.budget < 1:
        raise UsageError("--budget must be at least 1")
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    if args.epochs < 1:
        raise UsageError("--epochs must be at least 1")
    if (args.weights is None) == (args.preset is None):
        raise UsageError("exactly one of --weights or --preset is required")

    model_art, model, graph, bundle = _load_model(args.model)
    correlations = None
    if args.weights is not None:
        weights_art = read_artifact(args.weights, "weights")
        check_same_input(model_art, weights_art)
        weights = weights_from_doc(weights_art)
        correlations = weights_art.get("correlations")
    else:
        weights = WeightVector.uniform()

    out = _out_dir(args)
    space = SearchSpace.gcn() if args.algorithm == "gcn" else _baseline_space(bundle)
    _write(
        out,
        "manifest-optimize.json",
        manifest_doc(
            input_path=args.model,
            input_sha256=model_art["input_sha256"],
            command="optimize",
            seed=args.seed,
            space=space,
            out_dir=out,
            budget=args.budget,
        ),
    )
    frontier = optimize(
        model,
        bundle,
        weights,
        budget=args.budget,
        seed=args.seed,
        epochs=args.epochs,
        jobs=args.jobs,
        algorithm=args.algorithm,
    )
    selected = frontier.selected_trial()
    n_ok = sum(t.ok for t in frontier.trials)
    print(f"trials: {n_ok}/{len(frontier.trials)} succeeded")
    if selected is None:
        print("selected: none (every trial failed)")
    else:
        metrics = " ".join(
            f"{name}={getattr(selected.metrics, name):.6f}" for name in METRIC_NAMES
        )
        print(f"selected: trial {selected.id} {selected.hyper_params} {metrics}")
    _write(
        out,
        "frontier.json",
        frontier_doc(
            frontier,
            graph,
            model_art["input_sha256"],
            algorithm=args.algorithm,
            budget=args.budget,
            seed=args.seed,
            correlations=correlations,
        ),
    )
    return EXIT_OK


# --------------------------------------------------------------- partition


def cmd_partition(args) -> int:
    doc = read_artifact(args.frontier, "frontier")
    frontier = frontier_from_doc(doc)
    selected = frontier.selected_trial()
    if selected is None:
        print("no successful trial to print", file=sys.stderr)
        return EXIT_ERROR
    partition = selected.partition
    print(f"trial {selected.id}: k={partition.k}")
    clusters: dict[int, list[str]] = {}
    for name, cluster in partition.assignment.items():
        clusters.setdefault(cluster, []).append(name)
    for cluster in range(partition.k):
        members = ", ".join(sorted(clusters.get(cluster, [])))
        print(f"cluster {cluster}: {members}")
    return EXIT_OK


# ------------------------------------------------------------------ report


def _parse_config_args(pairs: list[str]) -> dict[str, list[str]]:
    configs: dict[str, list[str]] = {}
    for pair in pairs:
        name, sep, path = pair.partition("=")
        if not sep or not name or not path:
            raise UsageError(f"expected NAME=PATH, got {pair!r}")
        configs.setdefault(name, []).append(path)
    if len(configs) < 2:
        raise UsageError("report needs at least two named configurations")
    return configs


def _selected_metrics(path: str) -> dict[str, float]:
    doc = read_artifact(path, "frontier")
    if doc.get("metric_order") != list(METRIC_NAMES):
        raise ArtifactError(
            f"artifact {path}: mismatched metric set {doc.get('metric_order')!r}"
        )
    selected = frontier_from_doc(doc).selected_trial()
    if selected is None:
        raise ArtifactError(f"artifact {path} has no successful trial to compare")
    return selected.metrics.as_dict()


def cmd_report(args) -> int:
    configs = _parse_config_args(args.configs)
    samples = {
        name: [_selected_metrics(path) for path in paths]
        for name, paths in configs.items()
    }

    rows = []
    for metric in METRIC_NAMES:
        direction = METRIC_DIRECTIONS[metric]
        groups = {
            name: [values[metric] for values in metric_samples]
            for name, metric_samples in samples.items()
        }
        ranked = scott_knott(groups, lower_is_better=direction == "-")
        ordered = sorted(groups, key=lambda n: (ranked.ranks[n], n))
        for name in ordered:
            rows.append(
                (f"{metric} [{direction}]", name, str(ranked.ranks[name]),
                 f"{statistics.median(groups[name]):.6f}", str(len(groups[name])))
            )

    header = ("metric", "config", "rank", "median", "n")
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(5)]
    print("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip())
    for row in rows:
        print("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return EXIT_OK


# ------------------------------------------------------------------- serve


def cmd_serve(args) -> int:
    from .service import serve

    return serve(args.frontier, host=args.host, port=args.port)


# ------------------------------------------------------------------- main


def _add_out(parser) -> None:
    parser.add_argument(
        "--out",
        default=None,
        help=f"output directory (default: ${OUT_DIR_ENV} or current directory)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monoslice",
        description="Recommend microservice partitions for a monolith from runtime traces.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and normalize a traces file")
    p.add_argument("traces", help="raw traces JSON file")
    _add_out(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("calibrate", help="derive metric weights from random runs")
    p.add_argument("model", help="model artifact from `ingest`")
    p.add_argument("--n-runs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=300)
    _add_out(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("optimize", help="run the budgeted hyper-parameter search")
    p.add_argument("model", help="model artifact from `ingest`")
    p.add_argument("--weights", default=None, help="weights artifact from `calibrate`")
    p.add_argument(
        "--preset",
        choices=("uniform",),
        default=None,
        help="use a fixed weight preset instead of a weights artifact",
    )
    p.add_argument("--budget", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--algorithm", choices=("gcn", "baseline"), default="gcn")
    _add_out(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("partition", help="print the selected partition of a frontier")
    p.add_argument("frontier", help="frontier artifact from `optimize`")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("report", help="rank named configurations per metric")
    p.add_argument(
        "configs",
        nargs="+",
        metavar="NAME=PATH",
        help="frontier artifacts grouped into named configurations",
    )
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="serve a frontier artifact over HTTP")
    p.add_argument("frontier", help="frontier artifact from `optimize`")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8177)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (
        UsageError,
        ArtifactError,
        TraceParseError,
        TraceValidationError,
        EmptyGraphError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CalibrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except KeyboardInterrupt:
        return EXIT_ERROR
    except Exception as exc:  # pragma: no cover - last-resort guard
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
