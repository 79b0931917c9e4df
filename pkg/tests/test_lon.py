import json

import pytest

from archlon.arch_space import SpaceConfig, canonical_key, enumerate_space, neighborhood
from archlon.fitness import FitnessTable, bimodal_provider, build_table
from archlon.landscape import BasinMap, Landscape, compute_basins
from archlon.lon import (
    LonConstructionError,
    LonEdge,
    LonGraph,
    LonNode,
    build_lon,
    build_report,
    compute_metrics,
    derive_mlon,
    export_lon_dot,
    export_lon_json,
    graph_to_dict,
    incoming_strength,
    load_lon_json,
    topological_order,
)


def make_land(cfg, values):
    return Landscape(FitnessTable(space=cfg, values=values, provenance="test"))


# --- independent oracle: explicit sequence enumeration plus its own climber ---

def oracle_hill_climb(start, cfg, values):
    current = start
    while True:
        candidates = sorted(neighborhood(current, cfg), key=canonical_key)
        if not candidates:
            return current
        best = candidates[0]
        for candidate in candidates[1:]:
            if values[candidate] > values[best]:
                best = candidate
        if values[best] > values[current]:
            current = best
        else:
            return current


def oracle_sequences(start, cfg, max_len):
    """Every move sequence of length 1..max_len as an explicit tuple of stops."""
    sequences = []
    frontier = [(start,)]
    for _ in range(max_len):
        grown = []
        for seq in frontier:
            for nbr in neighborhood(seq[-1], cfg):
                grown.append(seq + (nbr,))
        sequences.extend(grown)
        frontier = grown
    return sequences


def oracle_edges(cfg, values, strength):
    optima = {
        arch
        for arch in enumerate_space(cfg)
        if all(values[arch] >= values[t] for t in neighborhood(arch, cfg))
    }
    weights = {}
    for opt in optima:
        for seq in oracle_sequences(opt, cfg, strength):
            target = oracle_hill_climb(seq[-1], cfg, values)
            weights[(opt, target)] = weights.get((opt, target), 0) + 1
    return weights


@pytest.mark.parametrize("depth,width", [(2, 5), (2, 10)])
def test_lon_matches_independent_oracle(depth, width):
    cfg = SpaceConfig(depth, width)
    table = build_table(bimodal_provider(), cfg)
    land = Landscape(table)
    lon = build_lon(compute_basins(land), land, strength_d=2)
    expected = oracle_edges(cfg, table.values, 2)
    actual = {key: edge.weight for key, edge in lon.edges.items()}
    assert actual == expected


def test_lon_three_solution_chain():
    cfg = SpaceConfig(1, 3)
    land = make_land(cfg, {(1,): 0.0, (2,): 1.0, (3,): 2.0})
    lon = build_lon(compute_basins(land), land, strength_d=2)
    assert set(lon.nodes) == {(3,)}
    assert set(lon.edges) == {((3,), (3,))}
    edge = lon.edges[((3,), (3,))]
    assert edge.weight == 3  # all three length-1..2 sequences climb back
    assert edge.kind == "self"


def test_lon_unimodal_full_space(linear_land):
    lon = build_lon(compute_basins(linear_land), linear_land, strength_d=2)
    assert len(lon.nodes) == 1
    kinds = {edge.kind for edge in lon.edges.values()}
    assert kinds == {"self"}


def test_weight_conservation():
    cfg = SpaceConfig(2, 5)
    table = build_table(bimodal_provider(), cfg)
    land = Landscape(table)
    lon = build_lon(compute_basins(land), land, strength_d=2)
    for opt in lon.nodes:
        total = sum(edge.weight for edge in lon.edges.values() if edge.source == opt)
        assert total == len(oracle_sequences(opt, cfg, 2))


def test_lon_rejects_bad_strength(linear_land):
    with pytest.raises(ValueError):
        build_lon(compute_basins(linear_land), linear_land, strength_d=0)


def test_lon_rejects_inconsistent_basins():
    cfg = SpaceConfig(1, 2)
    land = make_land(cfg, {(1,): 0.0, (2,): 1.0})
    bogus = BasinMap(terminus={(1,): (1,), (2,): (2,)}, optima=frozenset({(2,)}), basin_sizes={(2,): 2})
    with pytest.raises(LonConstructionError):
        build_lon(bogus, land, strength_d=2)


def test_lon_rejects_equal_fitness_optima():
    cfg = SpaceConfig(1, 3)
    land = make_land(cfg, {(1,): 1.0, (2,): 0.0, (3,): 1.0})
    basins = compute_basins(land)
    assert len(basins.optima) == 2
    with pytest.raises(LonConstructionError, match="share fitness"):
        build_lon(basins, land, strength_d=2)


def two_node_graph():
    cfg = SpaceConfig(1, 10)
    a, b = (3,), (8,)
    nodes = {a: LonNode(a, 1.0, 4), b: LonNode(b, 2.0, 6)}
    edges = {
        (a, b): LonEdge(a, b, 5, "improving"),
        (b, a): LonEdge(b, a, 2, "deteriorating"),
    }
    return LonGraph(
        space=cfg, strength_d=2, provenance="handmade", fitness_digest="0" * 64,
        nodes=nodes, edges=edges,
    )


def test_mlon_definitional_example():
    lon = two_node_graph()
    lon.edges[((8,), (8,))] = LonEdge((8,), (8,), 7, "self")
    mlon = derive_mlon(lon)
    assert set(mlon.edges) == {((3,), (8,))}
    assert mlon.sinks == ((8,),)
    assert mlon.funnels == {(8,): frozenset({(3,), (8,)})}


def test_mlon_single_node(linear_land):
    lon = build_lon(compute_basins(linear_land), linear_land, strength_d=2)
    mlon = derive_mlon(lon)
    assert mlon.sinks == ((10, 10, 10),)
    assert len(mlon.funnels) == 1


def test_mlon_is_dag_and_global_optimum_is_sink(bimodal_land):
    lon = build_lon(compute_basins(bimodal_land), bimodal_land, strength_d=2)
    mlon = derive_mlon(lon)
    order = topological_order(mlon)
    assert len(order) == len(mlon.nodes)
    best = max(mlon.nodes.values(), key=lambda n: n.fitness).arch
    assert best in mlon.sinks
    assert all(source != best for source, _ in mlon.edges)


def test_funnels_cover_all_nodes_and_may_overlap(bimodal_land):
    lon = build_lon(compute_basins(bimodal_land), bimodal_land, strength_d=2)
    mlon = derive_mlon(lon)
    covered = set()
    for members in mlon.funnels.values():
        covered |= members
    assert covered == set(mlon.nodes)
    assert len(mlon.funnels) == len(mlon.sinks)


def test_metrics_single_node(linear_land):
    lon = build_lon(compute_basins(linear_land), linear_land, strength_d=2)
    metrics = compute_metrics(lon, derive_mlon(lon))
    assert metrics.node_count == 1
    assert metrics.edge_count == 0
    assert metrics.funnel_count == 1
    assert metrics.lo_fitness_sd == 0.0
    assert metrics.improving_to_deteriorating_ratio is None
    assert metrics.global_optimum.arch == (10, 10, 10)
    assert metrics.incoming_strength == {(10, 10, 10): 0}


def test_metrics_two_node_example():
    lon = two_node_graph()
    metrics = compute_metrics(lon, derive_mlon(lon))
    assert metrics.node_count == 2
    assert metrics.edge_count == 2
    # the ratio counts edges, not summed weights
    assert metrics.improving_to_deteriorating_ratio == 1.0
    assert metrics.improving_weight_total == 5
    assert metrics.deteriorating_weight_total == 2
    assert metrics.incoming_strength == {(8,): 5, (3,): 2}
    assert metrics.global_optimum.arch == (8,)
    assert metrics.basin_size_distribution == {(3,): 4, (8,): 6}


def test_metrics_deterministic_across_pipeline_runs(full_cfg):
    def run():
        land = Landscape(build_table(bimodal_provider(), full_cfg))
        lon = build_lon(compute_basins(land), land, strength_d=2)
        return graph_to_dict(lon), compute_metrics(lon, derive_mlon(lon))

    (dict_a, metrics_a), (dict_b, metrics_b) = run(), run()
    assert dict_a == dict_b
    assert metrics_a == metrics_b


def test_threads_do_not_change_output(bimodal_land):
    basins = compute_basins(bimodal_land)
    serial = build_lon(basins, bimodal_land, strength_d=2, threads=1)
    threaded = build_lon(basins, bimodal_land, strength_d=2, threads=4)
    assert graph_to_dict(serial) == graph_to_dict(threaded)


def test_json_export_single_node(tmp_path, linear_land):
    lon = build_lon(compute_basins(linear_land), linear_land, strength_d=2)
    path = tmp_path / "lon.json"
    export_lon_json(lon, path)
    payload = json.loads(path.read_text())
    assert set(payload) == {"meta", "nodes", "edges"}
    assert set(payload["meta"]) == {"depth", "width", "strength_D", "provider", "fitness_table_digest"}
    assert len(payload["nodes"]) == 1
    assert set(payload["nodes"][0]) == {"arch", "fitness", "basin_size", "incoming_strength"}
    assert [e for e in payload["edges"] if e["kind"] != "self"] == []


def test_json_round_trip(tmp_path, bimodal_land):
    lon = build_lon(compute_basins(bimodal_land), bimodal_land, strength_d=2)
    path = tmp_path / "lon.json"
    export_lon_json(lon, path)
    loaded = load_lon_json(path)
    assert loaded.nodes == lon.nodes
    assert loaded.edges == lon.edges
    assert loaded.space == lon.space
    assert loaded.strength_d == lon.strength_d
    assert loaded.fitness_digest == lon.fitness_digest


def test_json_node_and_edge_ordering(bimodal_land):
    payload = graph_to_dict(build_lon(compute_basins(bimodal_land), bimodal_land, strength_d=2))
    archs = [n["arch"] for n in payload["nodes"]]
    assert archs == sorted(archs, key=lambda text: canonical_key(tuple(map(int, text.split("-")))))
    keys = [(e["source"], e["target"]) for e in payload["edges"]]
    assert keys == sorted(
        keys,
        key=lambda st: (
            canonical_key(tuple(map(int, st[0].split("-")))),
            canonical_key(tuple(map(int, st[1].split("-")))),
        ),
    )


def test_dot_export_golden(tmp_path):
    path = tmp_path / "lon.dot"
    export_lon_dot(two_node_graph(), path)
    assert path.read_text() == (
        "digraph lon {\n"
        '  "3" [label="3", fitness="1.0", basin_size=4];\n'
        '  "8" [label="8", fitness="2.0", basin_size=6];\n'
        '  "3" -> "8" [weight=5, kind=improving];\n'
        '  "8" -> "3" [weight=2, kind=deteriorating];\n'
        "}\n"
    )


def test_incoming_strength_ignores_self_loops():
    lon = two_node_graph()
    lon.edges[((3,), (3,))] = LonEdge((3,), (3,), 100, "self")
    assert incoming_strength(lon) == {(8,): 5, (3,): 2}


def test_report_shape(bimodal_land):
    lon = build_lon(compute_basins(bimodal_land), bimodal_land, strength_d=2)
    mlon = derive_mlon(lon)
    report = build_report(lon, mlon, compute_metrics(lon, mlon))
    assert report["summary"].keys() == {"GO", "LO", "Edg", "Fnl"}
    assert isinstance(report["summary"]["GO"]["architecture"], str)
    assert report["summary"]["LO"] == report["node_count"]
    assert sum(report["basin_sizes"].values()) == 1110
    assert set(report["funnels"]) == set(report["sinks"])
