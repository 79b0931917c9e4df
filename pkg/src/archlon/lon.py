"""Local optima network construction, monotonic reduction, funnels, metrics.

Nodes are the local optima of a landscape. For every optimum, all move
sequences of length 1..D through the directed neighbourhood are enumerated
exhaustively; each sequence terminus is mapped to its hill-climbing optimum,
and the edge weight to that optimum counts the raw number of sequences.
Weights are never normalised, so they are path counts, not probabilities.

The monotonic network keeps only fitness-improving edges. Its sinks (zero
improving out-degree, self-loops ignored) anchor funnels: the funnel of a
sink is every node from which the sink is reachable along improving edges.
"""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import fsum, sqrt
from typing import Mapping

from .arch_space import Arch, SpaceConfig, canonical_key, decode_arch, encode_arch
from .fitness import table_digest
from .landscape import BasinMap, Landscape


class LonConstructionError(ValueError):
    """The basin map is inconsistent or optima fitness values collide."""


@dataclass(frozen=True)
class LonNode:
    arch: Arch
    fitness: float
    basin_size: int


@dataclass(frozen=True)
class LonEdge:
    source: Arch
    target: Arch
    weight: int
    kind: str  # "improving" | "deteriorating" | "self"


@dataclass
class LonGraph:
    space: SpaceConfig
    strength_d: int
    provenance: str
    fitness_digest: str
    nodes: dict[Arch, LonNode]
    edges: dict[tuple[Arch, Arch], LonEdge]


@dataclass
class MlonGraph:
    """LON restricted to improving edges, with sinks and their funnels."""

    space: SpaceConfig
    strength_d: int
    provenance: str
    fitness_digest: str
    nodes: dict[Arch, LonNode]
    edges: dict[tuple[Arch, Arch], LonEdge]
    sinks: tuple[Arch, ...]
    funnels: dict[Arch, frozenset[Arch]]


def _outgoing_counts(land, terminus: Mapping[Arch, Arch], opt: Arch, strength_d: int) -> Counter:
    """Raw sequence counts from one optimum: every length-1..D move sequence
    contributes one count to the optimum of its final solution."""
    counts: Counter = Counter()

    def walk(node: Arch, remaining: int) -> None:
        for nbr in land.neighbors(node):
            counts[terminus[nbr]] += 1
            if remaining > 1:
                walk(nbr, remaining - 1)

    walk(opt, strength_d)
    return counts


def build_lon(basins: BasinMap, land: Landscape, strength_d: int = 2, threads: int = 1) -> LonGraph:
    """Exhaustive bounded-perturbation LON over the given basin map.

    Edge weights conserve the total sequence count per source; output is
    independent of the thread count.
    """
    if strength_d < 1:
        raise ValueError(f"perturbation strength must be >= 1, got {strength_d}")
    optima = sorted(basins.optima, key=canonical_key)
    for opt in optima:
        if basins.terminus.get(opt) != opt:
            raise LonConstructionError(f"optimum {encode_arch(opt)} is not its own terminus")
    for arch, end in basins.terminus.items():
        if end not in basins.optima:
            raise LonConstructionError(
                f"terminus {encode_arch(end)} of {encode_arch(arch)} is not a recorded optimum"
            )
    seen_fitness: dict[float, Arch] = {}
    for opt in optima:
        fit = land.fitness_of(opt)
        other = seen_fitness.get(fit)
        if other is not None:
            raise LonConstructionError(
                f"optima {encode_arch(other)} and {encode_arch(opt)} share fitness {fit!r}; "
                "edge kinds would be undefined"
            )
        seen_fitness[fit] = opt

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_source = list(
                pool.map(lambda opt: _outgoing_counts(land, basins.terminus, opt, strength_d), optima)
            )
    else:
        per_source = [_outgoing_counts(land, basins.terminus, opt, strength_d) for opt in optima]

    nodes = {
        opt: LonNode(arch=opt, fitness=land.fitness_of(opt), basin_size=basins.basin_sizes[opt])
        for opt in optima
    }
    edges: dict[tuple[Arch, Arch], LonEdge] = {}
    for opt, counts in zip(optima, per_source):
        source_fit = land.fitness_of(opt)
        for target in sorted(counts, key=canonical_key):
            if target == opt:
                kind = "self"
            elif land.fitness_of(target) > source_fit:
                kind = "improving"
            else:
                kind = "deteriorating"
            edges[(opt, target)] = LonEdge(source=opt, target=target, weight=counts[target], kind=kind)

    return LonGraph(
        space=land.space,
        strength_d=strength_d,
        provenance=land.table.provenance,
        fitness_digest=table_digest(land.table),
        nodes=nodes,
        edges=edges,
    )


def derive_mlon(lon: LonGraph) -> MlonGraph:
    """Keep improving edges only; self-loops and deteriorating edges drop out."""
    edges = {key: edge for key, edge in lon.edges.items() if edge.kind == "improving"}
    out_degree = {arch: 0 for arch in lon.nodes}
    reverse: dict[Arch, list[Arch]] = {arch: [] for arch in lon.nodes}
    for source, target in edges:
        out_degree[source] += 1
        reverse[target].append(source)

    sinks = tuple(sorted((a for a, deg in out_degree.items() if deg == 0), key=canonical_key))
    funnels: dict[Arch, frozenset[Arch]] = {}
    for sink in sinks:
        members = {sink}
        frontier = [sink]
        while frontier:
            node = frontier.pop()
            for pred in reverse[node]:
                if pred not in members:
                    members.add(pred)
                    frontier.append(pred)
        funnels[sink] = frozenset(members)

    return MlonGraph(
        space=lon.space,
        strength_d=lon.strength_d,
        provenance=lon.provenance,
        fitness_digest=lon.fitness_digest,
        nodes=dict(lon.nodes),
        edges=edges,
        sinks=sinks,
        funnels=funnels,
    )


def topological_order(mlon: MlonGraph) -> list[Arch]:
    """Kahn's algorithm over improving edges; raises on any cycle."""
    in_degree = {arch: 0 for arch in mlon.nodes}
    forward: dict[Arch, list[Arch]] = {arch: [] for arch in mlon.nodes}
    for source, target in mlon.edges:
        in_degree[target] += 1
        forward[source].append(target)
    ready = sorted((a for a, deg in in_degree.items() if deg == 0), key=canonical_key)
    order: list[Arch] = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        for nxt in sorted(forward[node], key=canonical_key):
            in_degree[nxt] -= 1
            if in_degree[nxt] == 0:
                ready.append(nxt)
        ready.sort(key=canonical_key)
    if len(order) != len(mlon.nodes):
        raise ValueError("monotonic network contains a cycle")
    return order


def incoming_strength(graph: LonGraph | MlonGraph) -> dict[Arch, int]:
    """Sum of non-self edge weights into each node."""
    strength = {arch: 0 for arch in graph.nodes}
    for edge in graph.edges.values():
        if edge.kind != "self":
            strength[edge.target] += edge.weight
    return strength


@dataclass(frozen=True)
class LonMetrics:
    node_count: int
    edge_count: int  # self-loops excluded
    funnel_count: int
    global_optimum: LonNode
    lo_fitness_sd: float
    improving_edge_count: int
    deteriorating_edge_count: int
    improving_weight_total: int
    deteriorating_weight_total: int
    improving_to_deteriorating_ratio: float | None
    incoming_strength: Mapping[Arch, int]
    basin_size_distribution: Mapping[Arch, int]


def compute_metrics(lon: LonGraph, mlon: MlonGraph) -> LonMetrics:
    """Network summary; the ratio compares edge counts, not summed weights,
    with the weight totals reported alongside."""
    nodes = list(lon.nodes.values())
    top_fitness = max(node.fitness for node in nodes)
    top_nodes = [node for node in nodes if node.fitness == top_fitness]
    if len(top_nodes) != 1:
        raise LonConstructionError("the maximum-fitness node is not unique")
    global_optimum = top_nodes[0]

    improving = [e for e in lon.edges.values() if e.kind == "improving"]
    deteriorating = [e for e in lon.edges.values() if e.kind == "deteriorating"]
    ratio = len(improving) / len(deteriorating) if deteriorating else None

    mean_fit = fsum(node.fitness for node in nodes) / len(nodes)
    sd = sqrt(fsum((node.fitness - mean_fit) ** 2 for node in nodes) / len(nodes))

    return LonMetrics(
        node_count=len(nodes),
        edge_count=len(improving) + len(deteriorating),
        funnel_count=len(mlon.sinks),
        global_optimum=global_optimum,
        lo_fitness_sd=sd,
        improving_edge_count=len(improving),
        deteriorating_edge_count=len(deteriorating),
        improving_weight_total=sum(e.weight for e in improving),
        deteriorating_weight_total=sum(e.weight for e in deteriorating),
        improving_to_deteriorating_ratio=ratio,
        incoming_strength=incoming_strength(lon),
        basin_size_distribution={node.arch: node.basin_size for node in nodes},
    )


def _sorted_edges(graph: LonGraph | MlonGraph) -> list[LonEdge]:
    return [
        graph.edges[key]
        for key in sorted(graph.edges, key=lambda st: (canonical_key(st[0]), canonical_key(st[1])))
    ]


def graph_to_dict(graph: LonGraph | MlonGraph) -> dict:
    """JSON form: meta, nodes in canonical order, edges sorted by (source, target)."""
    strength = incoming_strength(graph)
    nodes = [graph.nodes[a] for a in sorted(graph.nodes, key=canonical_key)]
    return {
        "meta": {
            "depth": graph.space.max_depth,
            "width": graph.space.max_width,
            "strength_D": graph.strength_d,
            "provider": graph.provenance,
            "fitness_table_digest": graph.fitness_digest,
        },
        "nodes": [
            {
                "arch": encode_arch(node.arch),
                "fitness": node.fitness,
                "basin_size": node.basin_size,
                "incoming_strength": strength[node.arch],
            }
            for node in nodes
        ],
        "edges": [
            {
                "source": encode_arch(edge.source),
                "target": encode_arch(edge.target),
                "weight": edge.weight,
                "kind": edge.kind,
            }
            for edge in _sorted_edges(graph)
        ],
    }


def graph_from_dict(payload: dict) -> LonGraph:
    meta = payload["meta"]
    space = SpaceConfig(max_depth=meta["depth"], max_width=meta["width"])
    nodes: dict[Arch, LonNode] = {}
    for entry in payload["nodes"]:
        arch = decode_arch(entry["arch"], space)
        nodes[arch] = LonNode(arch=arch, fitness=entry["fitness"], basin_size=entry["basin_size"])
    edges: dict[tuple[Arch, Arch], LonEdge] = {}
    for entry in payload["edges"]:
        source = decode_arch(entry["source"], space)
        target = decode_arch(entry["target"], space)
        edges[(source, target)] = LonEdge(
            source=source, target=target, weight=entry["weight"], kind=entry["kind"]
        )
    return LonGraph(
        space=space,
        strength_d=meta["strength_D"],
        provenance=meta["provider"],
        fitness_digest=meta["fitness_table_digest"],
        nodes=nodes,
        edges=edges,
    )


def export_lon_json(graph: LonGraph | MlonGraph, path) -> None:
    from .fileio import atomic_write_json

    atomic_write_json(path, graph_to_dict(graph))


def load_lon_json(path) -> LonGraph:
    with open(path) as handle:
        return graph_from_dict(json.load(handle))


def export_lon_dot(graph: LonGraph | MlonGraph, path) -> None:
    """DOT digraph: one node statement per optimum (label is the architecture
    encoding), one edge statement per edge with weight and kind attributes."""
    from .fileio import atomic_write_text

    lines = ["digraph lon {"]
    for arch in sorted(graph.nodes, key=canonical_key):
        node = graph.nodes[arch]
        name = encode_arch(arch)
        lines.append(
            f'  "{name}" [label="{name}", fitness="{node.fitness!r}", basin_size={node.basin_size}];'
        )
    for edge in _sorted_edges(graph):
        lines.append(
            f'  "{encode_arch(edge.source)}" -> "{encode_arch(edge.target)}" '
            f"[weight={edge.weight}, kind={edge.kind}];"
        )
    lines.append("}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def build_report(lon: LonGraph, mlon: MlonGraph, metrics: LonMetrics) -> dict:
    """Flat report dict with a compact summary block (GO, LO, Edg, Fnl)."""
    return {
        "provenance": lon.provenance,
        "depth": lon.space.max_depth,
        "width": lon.space.max_width,
        "strength_D": lon.strength_d,
        "fitness_table_digest": lon.fitness_digest,
        "summary": {
            "GO": {
                "architecture": encode_arch(metrics.global_optimum.arch),
                "fitness": metrics.global_optimum.fitness,
            },
            "LO": metrics.node_count,
            "Edg": metrics.edge_count,
            "Fnl": metrics.funnel_count,
        },
        "node_count": metrics.node_count,
        "edge_count": metrics.edge_count,
        "funnel_count": metrics.funnel_count,
        "global_optimum": {
            "architecture": encode_arch(metrics.global_optimum.arch),
            "fitness": metrics.global_optimum.fitness,
            "basin_size": metrics.global_optimum.basin_size,
        },
        "lo_fitness_sd": metrics.lo_fitness_sd,
        "improving_edge_count": metrics.improving_edge_count,
        "deteriorating_edge_count": metrics.deteriorating_edge_count,
        "improving_weight_total": metrics.improving_weight_total,
        "deteriorating_weight_total": metrics.deteriorating_weight_total,
        "improving_to_deteriorating_ratio": metrics.improving_to_deteriorating_ratio,
        "incoming_strength": {
            encode_arch(arch): metrics.incoming_strength[arch]
            for arch in sorted(metrics.incoming_strength, key=canonical_key)
        },
        "basin_sizes": {
            encode_arch(arch): metrics.basin_size_distribution[arch]
            for arch in sorted(metrics.basin_size_distribution, key=canonical_key)
        },
        "sinks": [encode_arch(arch) for arch in mlon.sinks],
        "funnels": {
            encode_arch(sink): [
                encode_arch(a) for a in sorted(mlon.funnels[sink], key=canonical_key)
            ]
            for sink in mlon.sinks
        },
    }
