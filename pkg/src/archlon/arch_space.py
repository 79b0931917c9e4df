"""Bounded feedforward architecture space: encoding, enumeration, neighbourhoods.

An architecture is the tuple of its hidden-layer widths, e.g. ``(4, 3)``.
The space holds every tuple of length 1..max_depth with entries in
1..max_width. Two move operators connect architectures: width offsets
(one layer's width changes by one) and depth offsets (one layer is cloned
adjacently or pruned).
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from typing import Iterator

Arch = tuple[int, ...]


@dataclass(frozen=True)
class SpaceConfig:
    """Bounds of the architecture space.

    max_depth: largest allowed number of hidden layers.
    max_width: largest allowed neuron count per layer.
    """

    max_depth: int
    max_width: int

    def __post_init__(self) -> None:
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.max_width < 1:
            raise ValueError(f"max_width must be >= 1, got {self.max_width}")

    @property
    def size(self) -> int:
        """Total number of architectures, sum of max_width**l for l in 1..max_depth."""
        return sum(self.max_width**depth for depth in range(1, self.max_depth + 1))


def canonical_key(arch: Arch) -> tuple[int, Arch]:
    """Sort key for the canonical order: ascending depth, then lexicographic widths."""
    return (len(arch), arch)


def validate_arch(arch: Arch, cfg: SpaceConfig) -> None:
    """Raise ValueError unless arch is a valid member of the space."""
    if not 1 <= len(arch) <= cfg.max_depth:
        raise ValueError(f"architecture depth {len(arch)} outside [1, {cfg.max_depth}]")
    for width in arch:
        if not isinstance(width, int) or isinstance(width, bool):
            raise ValueError(f"layer width {width!r} is not an integer")
        if not 1 <= width <= cfg.max_width:
            raise ValueError(f"layer width {width} outside [1, {cfg.max_width}]")


def encode_arch(arch: Arch) -> str:
    """Canonical text form: widths joined by '-', e.g. '4-3'."""
    return "-".join(str(width) for width in arch)


def decode_arch(text: str, cfg: SpaceConfig | None = None) -> Arch:
    """Parse the dash encoding; validates against cfg when given."""
    parts = text.strip().split("-")
    try:
        arch = tuple(int(part) for part in parts)
    except ValueError:
        raise ValueError(f"unparseable architecture {text!r}") from None
    if not arch:
        raise ValueError("empty architecture encoding")
    if cfg is not None:
        validate_arch(arch, cfg)
    return arch


def iter_space(cfg: SpaceConfig) -> Iterator[Arch]:
    for depth in range(1, cfg.max_depth + 1):
        yield from itertools.product(range(1, cfg.max_width + 1), repeat=depth)


def enumerate_space(cfg: SpaceConfig) -> list[Arch]:
    """Every architecture exactly once, in canonical order."""
    return list(iter_space(cfg))


def width_offsets(arch: Arch, cfg: SpaceConfig) -> set[Arch]:
    """All architectures differing from arch by +-1 in exactly one layer width."""
    out: set[Arch] = set()
    for i, width in enumerate(arch):
        if width > 1:
            out.add(arch[:i] + (width - 1,) + arch[i + 1 :])
        if width < cfg.max_width:
            out.add(arch[:i] + (width + 1,) + arch[i + 1 :])
    return out


def depth_offsets(arch: Arch, cfg: SpaceConfig) -> set[Arch]:
    """All single-layer clones (adjacent duplicate, if depth allows) and prunes
    (layer removal, if at least one layer remains)."""
    out: set[Arch] = set()
    n = len(arch)
    if n < cfg.max_depth:
        for i in range(n):
            out.add(arch[: i + 1] + (arch[i],) + arch[i + 1 :])
    if n > 1:
        for i in range(n):
            out.add(arch[:i] + arch[i + 1 :])
    return out


def neighborhood(arch: Arch, cfg: SpaceConfig) -> set[Arch]:
    """Union of width and depth offsets. Never contains arch itself."""
    return width_offsets(arch, cfg) | depth_offsets(arch, cfg)


def adjacency_pairs(cfg: SpaceConfig) -> set[tuple[Arch, Arch]]:
    """All unordered neighbour pairs {s, t} with t in N(s) or s in N(t).

    Each pair is returned once, ordered by canonical key within the tuple.
    The relation is symmetrised: pruning-induced asymmetry of the directed
    neighbourhood does not produce extra pairs.
    """
    pairs: set[tuple[Arch, Arch]] = set()
    for source in iter_space(cfg):
        for target in neighborhood(source, cfg):
            if canonical_key(source) <= canonical_key(target):
                pairs.add((source, target))
            else:
                pairs.add((target, source))
    return pairs


def directed_neighbor_count(cfg: SpaceConfig) -> int:
    """Number of ordered pairs (s, t) with t in N(s)."""
    return sum(len(neighborhood(arch, cfg)) for arch in iter_space(cfg))


@dataclass(frozen=True)
class AdjacencyReport:
    """Both edge-count readings of the landscape graph, plus the mean degree
    of the symmetrised graph (2 * pairs / |S|)."""

    symmetrised_pairs: int
    directed_pairs: int
    mean_degree: float


def adjacency_report(cfg: SpaceConfig) -> AdjacencyReport:
    pairs = len(adjacency_pairs(cfg))
    return AdjacencyReport(
        symmetrised_pairs=pairs,
        directed_pairs=directed_neighbor_count(cfg),
        mean_degree=2 * pairs / cfg.size,
    )


def write_space_csv(cfg: SpaceConfig, path) -> None:
    """CSV listing of the space: header 'architecture', canonical order."""
    from .fileio import atomic_write_text

    rows = ["architecture"]
    rows.extend(encode_arch(arch) for arch in iter_space(cfg))
    atomic_write_text(path, "\n".join(rows) + "\n")


def read_space_csv(path) -> list[Arch]:
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["architecture"]:
            raise ValueError(f"expected header ['architecture'], got {header}")
        return [decode_arch(row[0]) for row in reader if row]
