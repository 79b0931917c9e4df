"""Iterated local search with seeded runs and evaluation accounting.

Each run alternates a k-move random perturbation with best-improvement hill
climbing, accepting the new optimum when its fitness is at least the
incumbent's. The run stops after t consecutive iterations without a strict
fitness improvement. Because this is an analysis harness over a fully
enumerated space, every run also records retrospective statistics: how many
unique architectures had their fitness consulted, and when the first global
top-m architecture (and the global optimum) was first consulted.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Sequence

from .arch_space import Arch, SpaceConfig, canonical_key, neighborhood
from .landscape import Landscape, hill_climb
from .seeding import derive_run_seed, make_rng


@dataclass(frozen=True)
class IlsConfig:
    perturbation_strength: int = 2
    stopping_threshold: int = 20
    runs: int = 100
    base_seed: int = 0
    top_m: int = 5

    def __post_init__(self) -> None:
        if self.perturbation_strength < 1:
            raise ValueError("perturbation_strength must be >= 1")
        if self.stopping_threshold < 1:
            raise ValueError("stopping_threshold must be >= 1")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.top_m < 1:
            raise ValueError("top_m must be >= 1")


@dataclass(frozen=True)
class IlsTrace:
    run_index: int
    run_seed: int
    accepted_optima: tuple[Arch, ...]
    evaluation_count: int
    first_top_m_hit: int | None
    found_global: bool
    global_hit_evaluation: int | None


class _CountingLandscape:
    """Landscape view that records the order in which unique architectures
    have their fitness consulted (1-based indices)."""

    __slots__ = ("_land", "consulted")

    def __init__(self, land: Landscape):
        self._land = land
        self.consulted: dict[Arch, int] = {}

    @property
    def space(self):
        return self._land.space

    def neighbors(self, arch: Arch):
        return self._land.neighbors(arch)

    def fitness_of(self, arch: Arch) -> float:
        if arch not in self.consulted:
            self.consulted[arch] = len(self.consulted) + 1
        return self._land.fitness_of(arch)


def perturb(arch: Arch, k: int, cfg: SpaceConfig, rng) -> Arch:
    """k successive uniform draws, each from the current solution's neighbourhood."""
    current = arch
    for _ in range(k):
        nbrs = sorted(neighborhood(current, cfg), key=canonical_key)
        if not nbrs:
            return current
        current = nbrs[int(rng.integers(len(nbrs)))]
    return current


def top_m_architectures(land: Landscape, m: int) -> tuple[Arch, ...]:
    """The m fittest architectures of the full table, fitness descending."""
    ranked = sorted(land.solutions, key=lambda a: (-land.fitness_of(a), canonical_key(a)))
    return tuple(ranked[:m])


def run_ils(land: Landscape, cfg: IlsConfig, run_index: int) -> IlsTrace:
    """One seeded run; (base_seed, run_index) fully determines the trace.

    Acceptance moves the incumbent whenever fitness does not deteriorate, but
    the stopping counter resets only on a strict improvement: with globally
    unique fitness the two coincide, and a perturbation that merely climbs
    back to the incumbent must not keep a run alive forever.
    """
    seed = derive_run_seed(cfg.base_seed, run_index)
    rng = make_rng(seed)
    counting = _CountingLandscape(land)
    top_set = set(top_m_architectures(land, cfg.top_m))
    global_optimum = top_m_architectures(land, 1)[0]

    start = land.solutions[int(rng.integers(len(land.solutions)))]
    incumbent = hill_climb(start, counting)
    accepted = [incumbent]
    since_improvement = 0
    while since_improvement < cfg.stopping_threshold:
        candidate = perturb(incumbent, cfg.perturbation_strength, land.space, rng)
        optimum = hill_climb(candidate, counting)
        if counting.fitness_of(optimum) >= counting.fitness_of(incumbent):
            if counting.fitness_of(optimum) > counting.fitness_of(incumbent):
                since_improvement = 0
            incumbent = optimum
            accepted.append(optimum)
        since_improvement += 1

    first_hit = min(
        (index for arch, index in counting.consulted.items() if arch in top_set), default=None
    )
    global_hit = counting.consulted.get(global_optimum)
    return IlsTrace(
        run_index=run_index,
        run_seed=seed,
        accepted_optima=tuple(accepted),
        evaluation_count=len(counting.consulted),
        first_top_m_hit=first_hit,
        found_global=global_hit is not None,
        global_hit_evaluation=global_hit,
    )


def run_many(land: Landscape, cfg: IlsConfig) -> list[IlsTrace]:
    return [run_ils(land, cfg, run_index) for run_index in range(cfg.runs)]


@dataclass(frozen=True)
class IlsSummary:
    runs: int
    go_fraction: float
    mean_evaluations_to_go: float | None
    median_first_top_m_hit: float | None
    mean_first_top_m_hit: float | None
    top_m_hit_fraction: float


def aggregate_ils(traces: Sequence[IlsTrace]) -> IlsSummary:
    """Order-invariant aggregate of run traces."""
    if not traces:
        raise ValueError("aggregate_ils needs at least one trace")
    hits = sorted(t.first_top_m_hit for t in traces if t.first_top_m_hit is not None)
    go_evals = sorted(t.global_hit_evaluation for t in traces if t.found_global)
    return IlsSummary(
        runs=len(traces),
        go_fraction=len(go_evals) / len(traces),
        mean_evaluations_to_go=(sum(go_evals) / len(go_evals)) if go_evals else None,
        median_first_top_m_hit=float(statistics.median(hits)) if hits else None,
        mean_first_top_m_hit=(sum(hits) / len(hits)) if hits else None,
        top_m_hit_fraction=len(hits) / len(traces),
    )


def write_ils_csv(traces: Sequence[IlsTrace], path) -> None:
    from .fileio import atomic_write_text

    lines = ["run,seed,evaluations,first_top_m_hit,found_global,global_hit_evaluation"]
    for trace in sorted(traces, key=lambda t: t.run_index):
        first = "" if trace.first_top_m_hit is None else str(trace.first_top_m_hit)
        globally = "" if trace.global_hit_evaluation is None else str(trace.global_hit_evaluation)
        found = "true" if trace.found_global else "false"
        lines.append(
            f"{trace.run_index},{trace.run_seed},{trace.evaluation_count},{first},{found},{globally}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def summary_to_dict(summary: IlsSummary, cfg: IlsConfig) -> dict:
    return {
        "runs": summary.runs,
        "k": cfg.perturbation_strength,
        "t": cfg.stopping_threshold,
        "top_m": cfg.top_m,
        "base_seed": cfg.base_seed,
        "go_fraction": summary.go_fraction,
        "mean_evaluations_to_go": summary.mean_evaluations_to_go,
        "median_first_top_m_hit": summary.median_first_top_m_hit,
        "mean_first_top_m_hit": summary.mean_first_top_m_hit,
        "top_m_hit_fraction": summary.top_m_hit_fraction,
    }
