"""CLI REPL and local JSON service exposing a session.

The service binds localhost and carries no auth; it exists for local
exploration and the web console.  All commands, mutating or not, go through
one lock so two writers can never interleave.
"""

# No `from __future__ import annotations` here: FastAPI must resolve the
# endpoint annotations at registration time, and the request model is local
# to create_app.
import argparse
import sys
import threading
from dataclasses import dataclass
from typing import IO, Optional

from .fitdata import Dataset, load_dataset
from .session import CommandError, CommandResult, Session, UnknownIdError


@dataclass
class LaunchConfig:
    dataset: Optional[str] = None
    test: Optional[str] = None
    target: Optional[str] = None
    loss: str = "mse"
    calculate_dl: bool = False
    load: Optional[str] = None
    import_path: Optional[str] = None
    parse_parameters: bool = False
    seed: int = 0
    restarts: int = 10
    serve: bool = False
    port: int = 8000


def build_session(config: LaunchConfig) -> Session:
    dataset = None
    if config.dataset:
        dataset = load_dataset(config.dataset, target=config.target, test_path=config.test)
    session = Session(
        dataset=dataset,
        loss_kind=config.loss,
        seed=config.seed,
        default_restarts=config.restarts,
        calculate_dl=config.calculate_dl,
    )
    if config.load:
        session.load(config.load)
    if config.import_path:
        imported, errors = session.import_file(config.import_path, config.parse_parameters)
        for err in errors:
            print(f"import: {err}", file=sys.stderr)
    for warning in session.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    session.warnings.clear()
    return session


def _error_text(command: str, exc: CommandError) -> str:
    caret = " " * exc.position + "^"
    return f"error: {exc.message}\n  {command}\n  {caret}"


def repl_loop(session: Session, stdin: IO[str] = sys.stdin, stdout: IO[str] = sys.stdout) -> int:
    """Read commands line by line; per-command errors keep the loop alive."""
    try:
        import readline  # noqa: F401  (line editing + history when on a tty)
    except ImportError:
        pass
    interactive = stdin.isatty() if hasattr(stdin, "isatty") else False
    while True:
        if interactive:
            stdout.write("> ")
            stdout.flush()
        try:
            line = stdin.readline()
        except KeyboardInterrupt:
            stdout.write("\n")
            return 0
        if not line:
            return 0
        line = line.strip()
        if not line:
            continue
        if line in ("quit", "exit"):
            return 0
        try:
            result = session.run_command(line)
            stdout.write(result.render() + "\n")
        except CommandError as exc:
            stdout.write(_error_text(line, exc) + "\n")
        for warning in session.warnings:
            stdout.write(f"warning: {warning}\n")
        session.warnings.clear()
        stdout.flush()


def create_app(session: Session):
    from fastapi import FastAPI
    from fastapi.responses import JSONResponse
    from pydantic import BaseModel

    app = FastAPI(title="eggdb")
    lock = threading.Lock()

    class CommandBody(BaseModel):
        text: str

    def run(text: str) -> CommandResult:
        with lock:
            return session.run_command(text)

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/command")
    def command(body: CommandBody):
        try:
            return run(body.text).to_json()
        except UnknownIdError as exc:
            return JSONResponse({"error": exc.message, "position": exc.position}, status_code=404)
        except CommandError as exc:
            return JSONResponse({"error": exc.message, "position": exc.position}, status_code=400)

    @app.get("/pareto")
    def pareto(by: str = "fitness"):
        try:
            return run(f"pareto by {by}").to_json()
        except CommandError as exc:
            return JSONResponse({"error": exc.message, "position": exc.position}, status_code=400)

    @app.get("/distribution")
    def distribution(
        by: str = "count",
        size_op: Optional[str] = None,
        size: Optional[int] = None,
        limit: Optional[int] = None,
        at_least: Optional[int] = None,
        from_top: Optional[int] = None,
    ):
        parts = ["distribution"]
        if size_op is not None and size is not None:
            parts.append(f"with size {size_op} {size}")
        if limit is not None:
            parts.append(f"limited at {limit}")
        parts.append(f"by {by}")
        if at_least is not None:
            parts.append(f"with at least {at_least}")
        if from_top is not None:
            parts.append(f"from top {from_top}")
        try:
            return run(" ".join(parts)).to_json()
        except CommandError as exc:
            return JSONResponse({"error": exc.message, "position": exc.position}, status_code=400)

    @app.get("/expr/{cid}")
    def expr_report(cid: int):
        try:
            with lock:
                return session.report_payload(cid)
        except UnknownIdError as exc:
            return JSONResponse({"error": exc.message, "position": exc.position}, status_code=404)
        except CommandError as exc:
            return JSONResponse({"error": exc.message, "position": exc.position}, status_code=400)

    return app


def parse_args(argv: Optional[list[str]] = None) -> LaunchConfig:
    parser = argparse.ArgumentParser(prog="eggdb", description="Explore symbolic regression model sets")
    parser.add_argument("--dataset", help="training CSV (header row; last column is the target)")
    parser.add_argument("--test", help="test partition CSV")
    parser.add_argument("--target", help="name of the target column")
    parser.add_argument("--loss", choices=["mse", "gaussian"], default="mse")
    parser.add_argument("--calculate-dl", action="store_true", help="compute DL at registration time")
    parser.add_argument("--load", help="snapshot to load at startup")
    parser.add_argument("--import", dest="import_path", help="expression CSV to import at startup")
    parser.add_argument("--parse-parameters", action="store_true", help="extract parameter values from the expression text")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--restarts", type=int, default=10, help="default optimizer restarts")
    parser.add_argument("--serve", action="store_true", help="run the JSON service instead of the REPL")
    parser.add_argument("--port", type=int, default=8000)
    ns = parser.parse_args(argv)
    return LaunchConfig(
        dataset=ns.dataset,
        test=ns.test,
        target=ns.target,
        loss=ns.loss,
        calculate_dl=ns.calculate_dl,
        load=ns.load,
        import_path=ns.import_path,
        parse_parameters=ns.parse_parameters,
        seed=ns.seed,
        restarts=ns.restarts,
        serve=ns.serve,
        port=ns.port,
    )


def main(argv: Optional[list[str]] = None) -> int:
    config = parse_args(argv)
    session = build_session(config)
    if config.serve:
        import uvicorn

        uvicorn.run(create_app(session), host="127.0.0.1", port=config.port)
        return 0
    return repl_loop(session)


if __name__ == "__main__":
    sys.exit(main())
