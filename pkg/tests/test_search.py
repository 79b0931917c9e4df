import csv
import json
import random

import pytest

from archlon.arch_space import SpaceConfig, neighborhood
from archlon.fitness import FitnessTable, bimodal_provider, build_table
from archlon.landscape import Landscape, compute_basins
from archlon.lon import build_lon, compute_metrics, derive_mlon
from archlon.search import (
    IlsConfig,
    aggregate_ils,
    perturb,
    run_ils,
    run_many,
    summary_to_dict,
    top_m_architectures,
    write_ils_csv,
)
from archlon.seeding import make_rng


def test_config_validation():
    for bad in (
        dict(perturbation_strength=0),
        dict(stopping_threshold=0),
        dict(runs=0),
        dict(top_m=0),
    ):
        with pytest.raises(ValueError):
            IlsConfig(**bad)


def test_perturb_single_move_from_corner():
    cfg = SpaceConfig(3, 10)
    rng = make_rng(1)
    for _ in range(20):
        assert perturb((1,), 1, cfg, rng) in {(2,), (1, 1)}


def test_perturb_deterministic():
    cfg = SpaceConfig(3, 10)
    a = perturb((4, 3), 2, cfg, make_rng(99))
    b = perturb((4, 3), 2, cfg, make_rng(99))
    assert a == b


def test_perturb_two_moves_reach_length_two_set():
    cfg = SpaceConfig(2, 5)
    start = (3, 3)
    reachable = set()
    for first in neighborhood(start, cfg):
        for second in neighborhood(first, cfg):
            reachable.add(second)
    rng = make_rng(7)
    for _ in range(50):
        assert perturb(start, 2, cfg, rng) in reachable


def test_top_m_architectures(bimodal_land):
    top = top_m_architectures(bimodal_land, 5)
    assert len(top) == 5
    fits = [bimodal_land.fitness_of(a) for a in top]
    assert fits == sorted(fits, reverse=True)
    assert top[0] == (3, 3, 3)


def test_trace_deterministic(bimodal_land):
    cfg = IlsConfig(base_seed=123)
    assert run_ils(bimodal_land, cfg, 4) == run_ils(bimodal_land, cfg, 4)


def test_run_seed_zero_uses_base_seed(bimodal_land):
    cfg = IlsConfig(base_seed=77)
    assert run_ils(bimodal_land, cfg, 0).run_seed == 77


def test_unimodal_always_finds_global(linear_land):
    cfg = IlsConfig(runs=20, base_seed=5)
    for trace in run_many(linear_land, cfg):
        assert trace.found_global
        assert trace.accepted_optima[0] == (10, 10, 10)


def test_singleton_space():
    land = Landscape(FitnessTable(space=SpaceConfig(1, 1), values={(1,): 0.5}, provenance="t"))
    trace = run_ils(land, IlsConfig(base_seed=3), 0)
    assert trace.evaluation_count == 1
    assert trace.found_global
    assert trace.global_hit_evaluation == 1
    assert trace.first_top_m_hit == 1


def test_accepted_fitness_never_decreases(bimodal_land):
    cfg = IlsConfig(runs=10, base_seed=2024)
    for trace in run_many(bimodal_land, cfg):
        fits = [bimodal_land.fitness_of(a) for a in trace.accepted_optima]
        assert all(a <= b for a, b in zip(fits, fits[1:]))


def test_evaluation_budget(bimodal_land):
    cfg = IlsConfig(runs=10, base_seed=31)
    for trace in run_many(bimodal_land, cfg):
        assert 1 <= trace.evaluation_count <= 1110


def test_first_hits_are_consistent(bimodal_land):
    cfg = IlsConfig(runs=30, base_seed=8)
    for trace in run_many(bimodal_land, cfg):
        if trace.found_global:
            assert trace.first_top_m_hit is not None
            assert trace.first_top_m_hit <= trace.global_hit_evaluation
        if trace.first_top_m_hit is not None:
            assert trace.first_top_m_hit <= trace.evaluation_count


def test_aggregate_single_trace(bimodal_land):
    trace = run_ils(bimodal_land, IlsConfig(base_seed=0), 0)
    summary = aggregate_ils([trace])
    assert summary.runs == 1
    assert summary.median_first_top_m_hit == summary.mean_first_top_m_hit


def test_aggregate_order_invariance(bimodal_land):
    traces = run_many(bimodal_land, IlsConfig(runs=25, base_seed=6))
    shuffled = traces[:]
    random.Random(0).shuffle(shuffled)
    assert aggregate_ils(traces) == aggregate_ils(shuffled)


def test_aggregate_unimodal_fraction(linear_land):
    traces = run_many(linear_land, IlsConfig(runs=100, base_seed=0))
    assert aggregate_ils(traces).go_fraction == 1.0


def test_aggregate_requires_traces():
    with pytest.raises(ValueError):
        aggregate_ils([])


def single_funnel_land():
    # multimodal landscape whose monotonic network has one funnel
    cfg = SpaceConfig(2, 7)
    return Landscape(build_table(bimodal_provider(), cfg))


def test_single_funnel_reaches_global_with_large_t():
    land = single_funnel_land()
    lon = build_lon(compute_basins(land), land, strength_d=2)
    mlon = derive_mlon(lon)
    metrics = compute_metrics(lon, mlon)
    assert metrics.node_count > 1
    assert metrics.funnel_count == 1
    traces = run_many(land, IlsConfig(stopping_threshold=1000, runs=50, base_seed=3))
    assert aggregate_ils(traces).go_fraction == 1.0


def test_multi_funnel_runs_match_reachability():
    # with two funnels, a run either finds the global optimum or ends absorbed
    # at a sink from which no improving path exists
    cfg = SpaceConfig(2, 10)
    land = Landscape(build_table(bimodal_provider(), cfg))
    lon = build_lon(compute_basins(land), land, strength_d=2)
    mlon = derive_mlon(lon)
    go = max(lon.nodes.values(), key=lambda n: n.fitness).arch
    go_funnel = mlon.funnels[go]
    assert len(mlon.sinks) == 2
    traces = run_many(land, IlsConfig(stopping_threshold=1000, runs=50, base_seed=11))
    for trace in traces:
        if trace.found_global:
            continue
        final = trace.accepted_optima[-1]
        assert final in mlon.sinks and final != go
        # a run can only be denied the global optimum if it started outside
        # the global optimum's funnel
        assert trace.accepted_optima[0] not in go_funnel


def test_ils_csv_and_summary(tmp_path, bimodal_land):
    cfg = IlsConfig(runs=5, base_seed=17)
    traces = run_many(bimodal_land, cfg)
    path = tmp_path / "ils_runs.csv"
    write_ils_csv(traces, path)
    with open(path, newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 5
    assert rows[0].keys() == {
        "run", "seed", "evaluations", "first_top_m_hit", "found_global", "global_hit_evaluation",
    }
    assert rows[0]["run"] == "0"
    assert rows[0]["found_global"] in {"true", "false"}

    payload = summary_to_dict(aggregate_ils(traces), cfg)
    text = json.dumps(payload)  # every field must be JSON-serialisable
    assert json.loads(text)["runs"] == 5
    assert payload["k"] == 2 and payload["t"] == 20 and payload["top_m"] == 5
