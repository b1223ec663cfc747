#!/usr/bin/env python3
"""Self-contained walkthrough: synthetic data, import, and a query session.

Writes nothing outside a temp directory; output is the rendered result of
each command, prefixed by the command itself.
"""

import tempfile
from pathlib import Path

import numpy as np

from eggdb.fitdata import Dataset
from eggdb.session import Session

COMMANDS = [
    "top 5",
    "top 5 with size < 8 by fitness",
    "top 5 matching sqrt(v0)",
    "pareto",
    "count-pattern v0 * v1",
    "distribution with size <= 4 limited at 10 by count",
    "insert t0*sqrt(x0) + t1*x4",
    "top 3",
    "pareto by dl",
]


def make_dataset(rows: int = 150, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    X = np.abs(rng.normal(1.0, 0.5, (rows, 5))) + 0.1
    y = 2.0 * np.sqrt(X[:, 0]) + 3.0 * X[:, 4]
    return Dataset(X, y)


def make_import_file(path: Path) -> None:
    path.write_text(
        "\n".join(
            [
                "x0^p0 + p1*x1,0.2;3.1,0.89",
                "t0*x4 + t1,3.1;0.4,-0.12",
                "sin(t0*x1),1.7,-2.4",
                "t0*sqrt(x0),2.2,-0.9",
                "t0*x0*x0 + t1*x3,0.5;0.1,-1.5",
            ]
        )
        + "\n"
    )


def main() -> None:
    session = Session(dataset=make_dataset(), seed=1, default_restarts=5, calculate_dl=True)
    with tempfile.TemporaryDirectory() as tmp:
        models = Path(tmp) / "models.csv"
        make_import_file(models)
        print(f"> import {models.name}")
        print(session.run_command(f"import {models}").render())
        for command in COMMANDS:
            print(f"\n> {command}")
            print(session.run_command(command).render())


if __name__ == "__main__":
    main()
