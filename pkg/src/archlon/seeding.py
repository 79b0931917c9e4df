"""Seed derivation for reproducible multi-run experiments.

Run seeds are derived as base_seed XOR splitmix64(run_index). The finisher
maps 0 to 0, so run 0 always uses the base seed itself, and distinct run
indices get well-separated streams.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(value: int) -> int:
    """SplitMix64 finisher: a cheap, platform-independent integer mixer."""
    z = value & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_run_seed(base_seed: int, run_index: int) -> int:
    if base_seed < 0 or run_index < 0:
        raise ValueError("seeds and run indices must be non-negative")
    return (base_seed & _MASK64) ^ splitmix64(run_index)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))
