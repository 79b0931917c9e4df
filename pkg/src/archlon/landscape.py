"""Local optima and basins of attraction via best-improvement hill climbing.

A landscape couples a space with a total fitness table. Hill climbing moves
to the fittest neighbour while that strictly improves fitness; the basin of
an optimum is the set of starting points whose climb ends there.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping

from .arch_space import Arch, canonical_key, encode_arch, enumerate_space, neighborhood
from .fitness import FitnessTable


class NeutralityWarning(UserWarning):
    """Some solution has a neighbour with exactly equal fitness; the non-strict
    optimum definition and strict-improvement climbing can then disagree."""


class Landscape:
    """Immutable (space, neighbourhood, fitness) triple with cached lookups."""

    def __init__(self, table: FitnessTable):
        self.table = table
        self.space = table.space
        self._neighbor_cache: dict[Arch, tuple[Arch, ...]] = {}
        self._solutions: tuple[Arch, ...] | None = None

    @property
    def solutions(self) -> tuple[Arch, ...]:
        if self._solutions is None:
            self._solutions = tuple(enumerate_space(self.space))
        return self._solutions

    def fitness_of(self, arch: Arch) -> float:
        return self.table.values[arch]

    def neighbors(self, arch: Arch) -> tuple[Arch, ...]:
        """Directed neighbourhood in canonical order (fixes argmax tie-breaks)."""
        cached = self._neighbor_cache.get(arch)
        if cached is None:
            cached = tuple(sorted(neighborhood(arch, self.space), key=canonical_key))
            self._neighbor_cache[arch] = cached
        return cached


def _best_neighbor(land, arch: Arch) -> Arch | None:
    """Fittest neighbour, earliest canonical on ties; None if there are none."""
    best = None
    best_fit = None
    for candidate in land.neighbors(arch):
        fit = land.fitness_of(candidate)
        if best_fit is None or fit > best_fit:
            best, best_fit = candidate, fit
    return best


def hill_climb_path(start: Arch, land) -> list[Arch]:
    """Trajectory of best-improvement climbing from start, terminus last.

    Fitness along the returned path is strictly increasing, so the walk
    visits each solution at most once and needs no step bound.
    """
    path = [start]
    current = start
    current_fit = land.fitness_of(current)
    while True:
        best = _best_neighbor(land, current)
        if best is None:
            break
        best_fit = land.fitness_of(best)
        if best_fit > current_fit:
            current, current_fit = best, best_fit
            path.append(current)
        else:
            break
    return path


def hill_climb(start: Arch, land) -> Arch:
    """Terminus of best-improvement climbing from start."""
    return hill_climb_path(start, land)[-1]


def find_local_optima(land: Landscape) -> set[Arch]:
    """Direct scan for solutions whose fitness matches or exceeds all neighbours'.

    Emits a NeutralityWarning if any solution ties a neighbour exactly.
    """
    optima: set[Arch] = set()
    neutral = 0
    for arch in land.solutions:
        fit = land.fitness_of(arch)
        is_optimum = True
        for other in land.neighbors(arch):
            other_fit = land.fitness_of(other)
            if other_fit == fit:
                neutral += 1
            if other_fit > fit:
                is_optimum = False
        if is_optimum:
            optima.add(arch)
    if neutral:
        warnings.warn(
            NeutralityWarning(
                f"{neutral} solution-to-neighbour relation(s) carry exactly equal "
                "fitness; optima and hill-climb termini may disagree"
            )
        )
    return optima


@dataclass(frozen=True)
class BasinMap:
    """Hill-climbing terminus for every solution, plus the induced partition."""

    terminus: Mapping[Arch, Arch]
    optima: frozenset[Arch]
    basin_sizes: Mapping[Arch, int]


def compute_basins(land: Landscape) -> BasinMap:
    """Climb from every solution. Trajectories are memoised: climbing is a
    deterministic pure function of the current node, so every node along a
    walk shares the walk's terminus."""
    terminus: dict[Arch, Arch] = {}
    for start in land.solutions:
        if start in terminus:
            continue
        trail: list[Arch] = []
        current = start
        current_fit = land.fitness_of(current)
        while current not in terminus:
            trail.append(current)
            best = _best_neighbor(land, current)
            if best is None:
                break
            best_fit = land.fitness_of(best)
            if best_fit > current_fit:
                current, current_fit = best, best_fit
            else:
                break
        end = terminus.get(current, current)
        for node in trail:
            terminus[node] = end

    sizes: dict[Arch, int] = {}
    for end in terminus.values():
        sizes[end] = sizes.get(end, 0) + 1
    optima = frozenset(sizes)
    return BasinMap(terminus=terminus, optima=optima, basin_sizes=sizes)


def write_basins_csv(basins: BasinMap, land: Landscape, path) -> None:
    """Per-solution terminus listing: architecture,terminus,is_optimum."""
    from .fileio import atomic_write_text

    lines = ["architecture,terminus,is_optimum"]
    for arch in land.solutions:
        end = basins.terminus[arch]
        flag = "true" if arch in basins.optima else "false"
        lines.append(f"{encode_arch(arch)},{encode_arch(end)},{flag}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_basin_summary_csv(basins: BasinMap, land: Landscape, path) -> None:
    """Per-optimum summary: optimum,fitness,basin_size."""
    from .fileio import atomic_write_text
    from .fitness import format_fitness

    lines = ["optimum,fitness,basin_size"]
    for arch in sorted(basins.optima, key=canonical_key):
        lines.append(
            f"{encode_arch(arch)},{format_fitness(land.fitness_of(arch))},{basins.basin_sizes[arch]}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")
