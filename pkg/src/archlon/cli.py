"""Command-line pipeline: enumerate, evaluate, landscape, lon, ils, report.

Stages hand data to each other through files (CSV for tables, JSON for
graphs and reports), so externally produced fitness tables plug in at any
point. All outputs are written atomically and are byte-identical for
identical inputs; the thread count never affects results.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import arch_space, fitness, landscape, lon, search, trainer
from .fileio import atomic_write_json


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


_MANIFEST_KEYS = {
    "depth", "width", "seed", "out_dir", "threads", "provider", "table", "dataset",
    "schema", "task", "batch_runs", "max_epochs", "details", "out", "strength",
    "dot", "mlon", "runs", "k", "t", "top",
}


def _apply_manifest(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill unset options from the manifest file; explicit flags win."""
    if not getattr(args, "manifest", None):
        return
    path = Path(args.manifest)
    if not path.is_file():
        parser.error(f"manifest file not found: {path}")
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        parser.error(f"manifest is not valid JSON: {exc}")
    if not isinstance(manifest, dict):
        parser.error("manifest must be a JSON object")
    for key, value in manifest.items():
        if key not in _MANIFEST_KEYS:
            parser.error(f"unknown manifest key {key!r}")
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _require(args: argparse.Namespace, parser: argparse.ArgumentParser, *names: str) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            parser.error(f"--{name.replace('_', '-')} is required (flag or manifest)")


def _space_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> arch_space.SpaceConfig:
    _require(args, parser, "depth", "width")
    return arch_space.SpaceConfig(max_depth=int(args.depth), max_width=int(args.width))


def _out_dir(args: argparse.Namespace) -> Path:
    return Path(args.out_dir if args.out_dir is not None else ".")


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--depth", type=_positive_int, default=None, help="maximum hidden-layer count")
    sub.add_argument("--width", type=_positive_int, default=None, help="maximum layer width")
    sub.add_argument("--seed", type=_non_negative_int, default=None, help="base seed (default 0)")
    sub.add_argument("--out-dir", dest="out_dir", default=None, help="output directory (default .)")
    sub.add_argument(
        "--threads", type=_positive_int, default=None,
        help="worker threads for internal parallelism; never affects outputs",
    )
    sub.add_argument("--manifest", default=None, help="JSON file with default values for flags")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="archlon",
        description="Architecture-space fitness landscape and local optima network analysis",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p_enum = commands.add_parser("enumerate", help="list the whole architecture space as CSV")
    _add_common(p_enum)
    p_enum.add_argument("--out", default=None, help="output CSV path (default OUT_DIR/space.csv)")

    p_eval = commands.add_parser("evaluate", help="produce a total fitness table CSV")
    _add_common(p_eval)
    p_eval.add_argument(
        "--provider", default=None,
        help="synthetic:linear | synthetic:bimodal | table:<path> | trainer",
    )
    p_eval.add_argument("--out", default=None, help="output CSV path (default OUT_DIR/fitness.csv)")
    p_eval.add_argument("--dataset", default=None, help="training dataset CSV (trainer provider)")
    p_eval.add_argument("--schema", default=None, help="JSON schema file (trainer provider)")
    p_eval.add_argument("--task", default=None, choices=["classification", "regression"])
    p_eval.add_argument("--batch-runs", dest="batch_runs", type=_positive_int, default=None,
                        help="models trained per architecture (default 30)")
    p_eval.add_argument("--max-epochs", dest="max_epochs", type=_positive_int, default=None,
                        help="training epoch cap (default 100)")
    p_eval.add_argument("--details", default=None, help="optional per-run detail CSV path")

    p_land = commands.add_parser("landscape", help="extract basins of attraction from a table")
    _add_common(p_land)
    p_land.add_argument("--table", default=None, help="fitness table CSV")

    p_lon = commands.add_parser("lon", help="build the local optima network and its report")
    _add_common(p_lon)
    p_lon.add_argument("--table", default=None, help="fitness table CSV")
    p_lon.add_argument("--strength", type=_positive_int, default=None,
                       help="perturbation strength D (default 2)")
    p_lon.add_argument("--dot", action="store_const", const=True, default=None,
                       help="also write lon.dot")
    p_lon.add_argument("--mlon", action="store_const", const=True, default=None,
                       help="also write mlon.json")

    p_ils = commands.add_parser("ils", help="run seeded iterated local search over a table")
    _add_common(p_ils)
    p_ils.add_argument("--table", default=None, help="fitness table CSV")
    p_ils.add_argument("--runs", type=_positive_int, default=None, help="run count (default 100)")
    p_ils.add_argument("--k", type=_positive_int, default=None, help="perturbation strength (default 2)")
    p_ils.add_argument("--t", type=_positive_int, default=None, help="stopping threshold (default 20)")
    p_ils.add_argument("--top", type=_positive_int, default=None,
                       help="top-m set size for first-hit tracking (default 5)")

    p_report = commands.add_parser("report", help="summary report for an ingested fitness table")
    _add_common(p_report)
    p_report.add_argument("--table", default=None, help="fitness table CSV")
    p_report.add_argument("--strength", type=_positive_int, default=None,
                          help="perturbation strength D (default 2)")

    return parser


def _load_table(args, parser) -> fitness.FitnessTable:
    _require(args, parser, "table")
    cfg = _space_config(args, parser)
    return fitness.load_fitness_table(args.table, cfg)


def cmd_enumerate(args, parser) -> int:
    cfg = _space_config(args, parser)
    out = Path(args.out) if args.out else _out_dir(args) / "space.csv"
    arch_space.write_space_csv(cfg, out)
    print(f"wrote {cfg.size} architectures to {out}")
    return 0


def _trainer_table(args, parser, cfg):
    _require(args, parser, "dataset", "schema", "task")
    schema_path = Path(args.schema)
    if not schema_path.is_file():
        raise trainer.IngestError(f"schema file not found: {schema_path}")
    schema = json.loads(schema_path.read_text())
    data = trainer.ingest_dataset(args.dataset, schema, args.task)
    train_cfg = trainer.TrainConfig(
        batch_runs=args.batch_runs if args.batch_runs is not None else 30,
        max_epochs=args.max_epochs if args.max_epochs is not None else 100,
        base_seed=args.seed if args.seed is not None else 0,
    )
    values: dict[arch_space.Arch, float] = {}
    detail_rows = []
    for arch in arch_space.iter_space(cfg):
        try:
            batch = trainer.evaluate_batch(arch, data, train_cfg)
        except (trainer.TrainingError, fitness.DegenerateTargetsError) as exc:
            raise RuntimeError(f"architecture {arch_space.encode_arch(arch)}: {exc}") from exc
        values[arch] = batch.mean_r2
        if args.details:
            text = arch_space.encode_arch(arch)
            for run, (seed, r2, epochs) in enumerate(
                zip(batch.seeds, batch.per_run_r2, batch.epochs_used)
            ):
                detail_rows.append((text, run, seed, r2, epochs))
    name = f"trainer:{Path(args.dataset).name}"
    table = fitness.FitnessTable(space=cfg, values=values, provenance=name)
    return table, detail_rows


def cmd_evaluate(args, parser) -> int:
    _require(args, parser, "provider")
    cfg = _space_config(args, parser)
    provider = args.provider
    detail_rows = None
    if provider == "synthetic:linear":
        table = fitness.build_table(fitness.linear_provider(), cfg)
    elif provider == "synthetic:bimodal":
        table = fitness.build_table(fitness.bimodal_provider(), cfg)
    elif provider.startswith("table:"):
        source = provider[len("table:"):]
        if not Path(source).is_file():
            raise FileNotFoundError(f"fitness table not found: {source}")
        table = fitness.load_fitness_table(source, cfg, provenance=f"table:{Path(source).name}")
    elif provider == "trainer":
        if args.dataset is not None and not Path(args.dataset).is_file():
            raise FileNotFoundError(f"dataset not found: {args.dataset}")
        table, detail_rows = _trainer_table(args, parser, cfg)
    else:
        parser.error(f"unknown provider {provider!r}")
    out = Path(args.out) if args.out else _out_dir(args) / "fitness.csv"
    fitness.save_fitness_table(table, out)
    if args.details and detail_rows is not None:
        trainer.write_batch_details_csv(detail_rows, args.details)
    print(f"wrote fitness table ({table.provenance}) to {out}")
    return 0


def cmd_landscape(args, parser) -> int:
    table = _load_table(args, parser)
    land = landscape.Landscape(table)
    basins = landscape.compute_basins(land)
    out_dir = _out_dir(args)
    landscape.write_basins_csv(basins, land, out_dir / "basins.csv")
    landscape.write_basin_summary_csv(basins, land, out_dir / "optima.csv")
    print(f"{len(basins.optima)} local optima over {table.space.size} solutions; "
          f"wrote {out_dir / 'basins.csv'} and {out_dir / 'optima.csv'}")
    return 0


def _analyse(table: fitness.FitnessTable, strength: int, threads: int):
    land = landscape.Landscape(table)
    basins = landscape.compute_basins(land)
    graph = lon.build_lon(basins, land, strength_d=strength, threads=threads)
    mlon_graph = lon.derive_mlon(graph)
    metrics = lon.compute_metrics(graph, mlon_graph)
    return graph, mlon_graph, metrics


def cmd_lon(args, parser) -> int:
    table = _load_table(args, parser)
    strength = args.strength if args.strength is not None else 2
    threads = args.threads if args.threads is not None else 1
    graph, mlon_graph, metrics = _analyse(table, strength, threads)
    out_dir = _out_dir(args)
    lon.export_lon_json(graph, out_dir / "lon.json")
    if args.dot:
        lon.export_lon_dot(graph, out_dir / "lon.dot")
    if args.mlon:
        lon.export_lon_json(mlon_graph, out_dir / "mlon.json")
    atomic_write_json(out_dir / "report.json", lon.build_report(graph, mlon_graph, metrics))
    print(f"LO={metrics.node_count} Edg={metrics.edge_count} Fnl={metrics.funnel_count} "
          f"GO={arch_space.encode_arch(metrics.global_optimum.arch)}")
    return 0


def cmd_ils(args, parser) -> int:
    table = _load_table(args, parser)
    cfg = search.IlsConfig(
        perturbation_strength=args.k if args.k is not None else 2,
        stopping_threshold=args.t if args.t is not None else 20,
        runs=args.runs if args.runs is not None else 100,
        base_seed=args.seed if args.seed is not None else 0,
        top_m=args.top if args.top is not None else 5,
    )
    land = landscape.Landscape(table)
    traces = search.run_many(land, cfg)
    summary = search.aggregate_ils(traces)
    out_dir = _out_dir(args)
    search.write_ils_csv(traces, out_dir / "ils_runs.csv")
    atomic_write_json(out_dir / "ils_summary.json", search.summary_to_dict(summary, cfg))
    print(f"{summary.runs} runs: go_fraction={summary.go_fraction}, "
          f"median_first_top_m_hit={summary.median_first_top_m_hit}")
    return 0


def cmd_report(args, parser) -> int:
    table = _load_table(args, parser)
    strength = args.strength if args.strength is not None else 2
    threads = args.threads if args.threads is not None else 1
    graph, mlon_graph, metrics = _analyse(table, strength, threads)
    out_dir = _out_dir(args)
    atomic_write_json(out_dir / "report.json", lon.build_report(graph, mlon_graph, metrics))
    print(f"GO={arch_space.encode_arch(metrics.global_optimum.arch)} "
          f"LO={metrics.node_count} Edg={metrics.edge_count} Fnl={metrics.funnel_count}")
    return 0


_COMMANDS = {
    "enumerate": cmd_enumerate,
    "evaluate": cmd_evaluate,
    "landscape": cmd_landscape,
    "lon": cmd_lon,
    "ils": cmd_ils,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    _apply_manifest(args, parser)
    try:
        return _COMMANDS[args.command](args, parser)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
