#!/usr/bin/env python3
"""Record real service payloads into frontend/tests/fixtures.json.

The frontend test suite runs against these recorded payloads instead of a
live service, so the query builder and views are checked against what the
backend actually returns.  Re-run this script whenever the command grammar
or payload shapes change.
"""

import json
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from eggdb.fitdata import Dataset
from eggdb.session import Session
from eggdb.shell import create_app

# Keep in sync with the specs exercised in frontend/tests/builder.test.ts:
# every string the builder can emit for those specs must be recorded here.
BUILDER_COMMANDS = [
    "top 10",
    "top 5 with size < 8",
    "top 5 with size < 8 with parameters >= 1 by dl",
    "top 10 matching sqrt(v0)",
    "top 10 not matching root sqrt(v0)",
    "distribution with size <= 4 limited at 10 by count",
    "distribution by fitness with at least 1 from top 5",
    "pareto by fitness",
    "pareto by dl",
]


def build_session() -> Session:
    rng = np.random.default_rng(0)
    X = np.abs(rng.normal(1.0, 0.5, (120, 5))) + 0.1
    y = 2.0 * np.sqrt(X[:, 0]) + 3.0 * X[:, 4]
    session = Session(dataset=Dataset(X, y), seed=1, default_restarts=3, calculate_dl=True)
    for text in [
        "insert t0*sqrt(x0) + t1*x4",
        "insert t0*x0 + t1",
        "insert t0*x4 + t1*x1",
        "insert sin(t0*x1)",
        "insert t0*sqrt(x0)",
    ]:
        session.run_command(text)
    return session


def main() -> None:
    session = build_session()
    client = TestClient(create_app(session))

    commands = {}
    for text in BUILDER_COMMANDS:
        resp = client.post("/command", json={"text": text})
        commands[text] = {"status": resp.status_code, "body": resp.json()}

    pareto = client.get("/pareto", params={"by": "fitness"}).json()
    dist = client.get(
        "/distribution", params={"by": "count", "size_op": "<=", "size": 4, "limit": 10}
    ).json()
    some_id = int(session.run_command("top 1").rows[0][0])
    report = client.get(f"/expr/{some_id}").json()

    out = {
        "commands": commands,
        "pareto": pareto,
        "distribution": dist,
        "report": report,
        "report_id": some_id,
    }
    dest = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures.json"
    dest.parent.mkdir(parents=True, exist_ok=True)
    dest.write_text(json.dumps(out, indent=2) + "\n")
    print(f"wrote {dest} ({len(commands)} commands)")


if __name__ == "__main__":
    main()
