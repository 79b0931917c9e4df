"""Fitness metric, provider contract, table I/O, and synthetic oracle landscapes.

Fitness is the coefficient of determination, 1 - SSres/SStot, for both task
kinds; classification scores are the uniform average over output dimensions.
A fitness table is a total map from every architecture in a space to one
finite real value. Two synthetic providers, one unimodal and one multimodal,
serve as fully enumerable test landscapes with globally unique fitness.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from typing import Callable, Mapping, Protocol, Sequence

import numpy as np

from .arch_space import Arch, SpaceConfig, decode_arch, encode_arch, iter_space


class DegenerateTargetsError(ValueError):
    """Actual values carry no variance, so the score is undefined."""


class TableFormatError(ValueError):
    """A fitness table file does not parse row by row."""


class TableCompletenessError(ValueError):
    """A fitness table does not cover the space exactly once per architecture."""


def r_squared(actual: Sequence[float], predicted: Sequence[float]) -> float:
    """1 - SSres/SStot over paired predictions; at most 1, unbounded below.

    Raises DegenerateTargetsError when the actual values are all identical.
    """
    y = np.asarray(actual, dtype=float)
    y_hat = np.asarray(predicted, dtype=float)
    if y.ndim != 1 or y_hat.ndim != 1:
        raise ValueError("r_squared expects 1-dimensional sequences")
    if y.size == 0:
        raise ValueError("r_squared expects non-empty sequences")
    if y.shape != y_hat.shape:
        raise ValueError(f"length mismatch: {y.shape[0]} actual vs {y_hat.shape[0]} predicted")
    residual = float(np.sum((y - y_hat) ** 2))
    total = float(np.sum((y - y.mean()) ** 2))
    if total == 0.0:
        raise DegenerateTargetsError("actual values have zero variance")
    return 1.0 - residual / total


def r_squared_multioutput(actual, predicted) -> float:
    """Uniform average of per-dimension scores for vector-valued targets."""
    y = np.asarray(actual, dtype=float)
    y_hat = np.asarray(predicted, dtype=float)
    if y.ndim != 2 or y_hat.ndim != 2:
        raise ValueError("r_squared_multioutput expects 2-dimensional inputs")
    if y.shape != y_hat.shape:
        raise ValueError(f"shape mismatch: {y.shape} actual vs {y_hat.shape} predicted")
    scores = [r_squared(y[:, dim], y_hat[:, dim]) for dim in range(y.shape[1])]
    return sum(scores) / len(scores)


class FitnessProvider(Protocol):
    """Deterministic architecture scorer: equal input, bit-identical output."""

    name: str

    def evaluate(self, arch: Arch) -> float: ...


@dataclass(frozen=True)
class CallableProvider:
    name: str
    fn: Callable[[Arch], float]

    def evaluate(self, arch: Arch) -> float:
        return self.fn(arch)


# Positional factor base: breaks permutation ties between layers so synthetic
# fitness values stay globally unique (verified by scan, not assumed).
POSITIONAL_BASE = 1.01

# Vanishing tie-breaker for the per-layer height profile below. The raw
# profile repeats values across widths (same height at two widths), which no
# positional base can separate for depth-1 architectures; the quadratic term
# is zero at both peaks and separates everything else.
_HEIGHT_TIEBREAK = 1e-6


def synthetic_linear(arch: Arch) -> float:
    """Unimodal oracle landscape: wider and deeper is always fitter.

    The single local optimum sits at the full-depth, full-width architecture.
    """
    return sum(width * POSITIONAL_BASE**i for i, width in enumerate(arch))


def _bimodal_height(width: int) -> float:
    base = 5.0 - abs(width - 3) if width <= 5 else 4.5 - abs(width - 8)
    return base + _HEIGHT_TIEBREAK * (width - 3) * (width - 8)


def synthetic_bimodal(arch: Arch) -> float:
    """Multimodal oracle landscape: two height peaks per layer, at widths 3 and 8."""
    return sum(_bimodal_height(width) * POSITIONAL_BASE**i for i, width in enumerate(arch))


def linear_provider() -> CallableProvider:
    return CallableProvider("synthetic:linear", synthetic_linear)


def bimodal_provider() -> CallableProvider:
    return CallableProvider("synthetic:bimodal", synthetic_bimodal)


@dataclass(frozen=True)
class FitnessTable:
    """Total map from every architecture in a space to a finite fitness value."""

    space: SpaceConfig
    values: Mapping[Arch, float]
    provenance: str = ""

    def __post_init__(self) -> None:
        expected = set(iter_space(self.space))
        have = set(self.values)
        missing = expected - have
        extra = have - expected
        if missing:
            names = ", ".join(encode_arch(a) for a in sorted(missing, key=lambda a: (len(a), a))[:5])
            raise TableCompletenessError(
                f"fitness table missing {len(missing)} architecture(s), e.g. {names}"
            )
        if extra:
            names = ", ".join(encode_arch(a) for a in sorted(extra, key=lambda a: (len(a), a))[:5])
            raise TableCompletenessError(
                f"fitness table has {len(extra)} architecture(s) outside the space, e.g. {names}"
            )
        for arch, value in self.values.items():
            if not np.isfinite(value):
                raise ValueError(f"non-finite fitness {value!r} for {encode_arch(arch)}")

    def fitness_of(self, arch: Arch) -> float:
        return self.values[arch]

    def __getitem__(self, arch: Arch) -> float:
        return self.values[arch]


def build_table(provider: FitnessProvider, cfg: SpaceConfig) -> FitnessTable:
    """Evaluate the provider over the whole space."""
    values = {arch: float(provider.evaluate(arch)) for arch in iter_space(cfg)}
    return FitnessTable(space=cfg, values=values, provenance=provider.name)


class TableProvider:
    """FitnessProvider backed by an existing table (the only route for fitness
    data produced outside this package)."""

    def __init__(self, table: FitnessTable):
        self.table = table
        self.name = table.provenance or "table"

    def evaluate(self, arch: Arch) -> float:
        return self.table.fitness_of(arch)


# 17 significant digits round-trip any double exactly.
_FITNESS_FORMAT = "{:.17g}"


def format_fitness(value: float) -> str:
    return _FITNESS_FORMAT.format(value)


def save_fitness_table(table: FitnessTable, path) -> None:
    """CSV with header 'architecture,fitness', rows in canonical space order."""
    from .fileio import atomic_write_text

    lines = ["architecture,fitness"]
    for arch in iter_space(table.space):
        lines.append(f"{encode_arch(arch)},{format_fitness(table.values[arch])}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_fitness_table(path, cfg: SpaceConfig, provenance: str | None = None) -> FitnessTable:
    """Read a fitness CSV (any row order) and validate totality over cfg."""
    values: dict[Arch, float] = {}
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["architecture", "fitness"]:
            raise TableFormatError(f"expected header 'architecture,fitness', got {header}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise TableFormatError(f"line {line_no}: expected 2 fields, got {len(row)}")
            try:
                arch = decode_arch(row[0], cfg)
            except ValueError as exc:
                raise TableFormatError(f"line {line_no}: {exc}") from None
            try:
                value = float(row[1])
            except ValueError:
                raise TableFormatError(f"line {line_no}: unparseable fitness {row[1]!r}") from None
            if not np.isfinite(value):
                raise TableFormatError(f"line {line_no}: non-finite fitness {row[1]!r}")
            if arch in values:
                raise TableFormatError(f"line {line_no}: duplicate architecture {row[0]!r}")
            values[arch] = value
    name = provenance if provenance is not None else f"table:{path}"
    return FitnessTable(space=cfg, values=values, provenance=name)


def table_digest(table: FitnessTable) -> str:
    """SHA-256 over the canonical CSV rows; identifies the fitness data exactly."""
    hasher = hashlib.sha256()
    for arch in iter_space(table.space):
        hasher.update(f"{encode_arch(arch)},{format_fitness(table.values[arch])}\n".encode())
    return hasher.hexdigest()
