#!/usr/bin/env python3
"""End-to-end desk-scale experiment on a synthetic landscape.

Enumerates the space, evaluates fitness, extracts basins, builds the LON and
its monotonic reduction, computes metrics, runs seeded iterated local search,
and leaves every artifact (CSV/JSON/DOT) in the output directory.
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from archlon.arch_space import SpaceConfig, encode_arch, write_space_csv
from archlon.fileio import atomic_write_json
from archlon.fitness import bimodal_provider, build_table, linear_provider, save_fitness_table
from archlon.landscape import Landscape, compute_basins, write_basin_summary_csv, write_basins_csv
from archlon.lon import (
    build_lon,
    build_report,
    compute_metrics,
    derive_mlon,
    export_lon_dot,
    export_lon_json,
)
from archlon.search import IlsConfig, aggregate_ils, run_many, summary_to_dict, write_ils_csv

PROVIDERS = {"linear": linear_provider, "bimodal": bimodal_provider}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--provider", choices=sorted(PROVIDERS), default="bimodal")
    parser.add_argument("--depth", type=int, default=3)
    parser.add_argument("--width", type=int, default=10)
    parser.add_argument("--strength", type=int, default=2)
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", type=Path, default=Path("out"))
    args = parser.parse_args()

    started = time.perf_counter()
    cfg = SpaceConfig(max_depth=args.depth, max_width=args.width)
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)

    write_space_csv(cfg, out / "space.csv")
    table = build_table(PROVIDERS[args.provider](), cfg)
    save_fitness_table(table, out / "fitness.csv")
    print(f"space: {cfg.size} architectures ({args.provider})")

    land = Landscape(table)
    basins = compute_basins(land)
    write_basins_csv(basins, land, out / "basins.csv")
    write_basin_summary_csv(basins, land, out / "optima.csv")
    print(f"local optima: {len(basins.optima)}")

    lon = build_lon(basins, land, strength_d=args.strength)
    mlon = derive_mlon(lon)
    metrics = compute_metrics(lon, mlon)
    export_lon_json(lon, out / "lon.json")
    export_lon_json(mlon, out / "mlon.json")
    export_lon_dot(lon, out / "lon.dot")
    atomic_write_json(out / "report.json", build_report(lon, mlon, metrics))
    print(
        f"LON: LO={metrics.node_count} Edg={metrics.edge_count} "
        f"Fnl={metrics.funnel_count} GO={encode_arch(metrics.global_optimum.arch)} "
        f"(fitness {metrics.global_optimum.fitness:.6g})"
    )

    ils_cfg = IlsConfig(runs=args.runs, base_seed=args.seed)
    traces = run_many(land, ils_cfg)
    summary = aggregate_ils(traces)
    write_ils_csv(traces, out / "ils_runs.csv")
    atomic_write_json(out / "ils_summary.json", summary_to_dict(summary, ils_cfg))
    print(
        f"ILS: go_fraction={summary.go_fraction} "
        f"median_first_top_m_hit={summary.median_first_top_m_hit} "
        f"mean_evaluations_to_go={summary.mean_evaluations_to_go}"
    )
    print(f"artifacts in {out} ({time.perf_counter() - started:.2f}s)")


if __name__ == "__main__":
    main()
