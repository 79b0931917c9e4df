#!/usr/bin/env python3
"""Regenerate the bundled datasets under data/ deterministically.

linear.csv: noiseless y = 2x + 1 over an even grid, one numeric input.
two_blobs.csv: two linearly separable Gaussian blobs, two numeric inputs.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

BLOB_SEED = 20240714
N_PER_BLOB = 100
N_LINEAR = 2000


def write_linear(data_dir: Path) -> None:
    x = np.linspace(-1.0, 1.0, N_LINEAR)
    y = 2.0 * x + 1.0
    lines = ["x,y"]
    lines.extend(f"{xi:.17g},{yi:.17g}" for xi, yi in zip(x, y))
    (data_dir / "linear.csv").write_text("\n".join(lines) + "\n")
    (data_dir / "linear.schema.json").write_text(
        json.dumps({"target": "y", "columns": {"x": "numeric"}}, indent=2) + "\n"
    )


def write_two_blobs(data_dir: Path) -> None:
    rng = np.random.Generator(np.random.PCG64(BLOB_SEED))
    neg = rng.normal(loc=(-2.0, -2.0), scale=0.5, size=(N_PER_BLOB, 2))
    pos = rng.normal(loc=(2.0, 2.0), scale=0.5, size=(N_PER_BLOB, 2))
    lines = ["f1,f2,label"]
    lines.extend(f"{p[0]:.17g},{p[1]:.17g},neg" for p in neg)
    lines.extend(f"{p[0]:.17g},{p[1]:.17g},pos" for p in pos)
    (data_dir / "two_blobs.csv").write_text("\n".join(lines) + "\n")
    (data_dir / "two_blobs.schema.json").write_text(
        json.dumps(
            {"target": "label", "columns": {"f1": "numeric", "f2": "numeric"}}, indent=2
        )
        + "\n"
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--data-dir", default=Path(__file__).resolve().parent.parent / "data", type=Path
    )
    args = parser.parse_args()
    args.data_dir.mkdir(parents=True, exist_ok=True)
    write_linear(args.data_dir)
    write_two_blobs(args.data_dir)
    print(f"wrote linear.csv and two_blobs.csv to {args.data_dir}")


if __name__ == "__main__":
    main()
