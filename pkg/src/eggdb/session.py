"""Command language, dispatch, orchestration, persistence, and import.

Command grammar (EBNF):

    command   := top | report | subtrees | optimize | insert | pareto
               | count | dist | save | load | import | simplify
    top       := "top" INT filter* criterion? matching?
    filter    := "with" ("size" | "cost" | "parameters") CMP INT
    criterion := "by" ("fitness" | "dl")
    matching  := ["not"] "matching" ["root"] PATTERN
    report    := "report" INT
    subtrees  := "subtrees" INT
    optimize  := "optimize" INT [INT]            -- id, optional restarts
    insert    := "insert" EXPRESSION
    pareto    := "pareto" [criterion]
    count     := "count-pattern" PATTERN
    dist      := "distribution" ["with" "size" CMP INT] ["limited" "at" INT]
                 "by" ("count" | "fitness") ["with" "at" "least" INT]
                 ["from" "top" INT]
    save      := "save" PATH        load   := "load" PATH
    import    := "import" PATH ["True" | "False"]
    simplify  := "simplify" INT
    CMP       := "<" | "<=" | "=" | ">" | ">="

Snapshots are binary: magic ``EGDB``, a format version, a SHA-256 checksum,
then length-prefixed pickled sections (graph, catalog, session metadata).
"""

from __future__ import annotations

import hashlib
import io
import pickle
import re
import struct
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import blocks, eqsat
from .catalog import (
    FilterAtom,
    FilterPredicate,
    MissingDescriptionLength,
    PatternConstraint,
    Row,
    ScoreCatalog,
)
from .egraph import EGraph
from .expr import (
    Expr,
    ExprSyntaxError,
    Pattern,
    dialect_for_extension,
    parse_expression,
    parse_pattern,
    param_indices,
    render,
    size_of,
)
from .fitdata import Dataset, FitFailure, FitRecord, description_length, fit_params, fitness_of, metrics
from .matchdb import MatchIndex, match_pattern, closure_of_matches

SNAPSHOT_MAGIC = b"EGDB"
SNAPSHOT_VERSION = 1

TABLE_COLUMNS = ("Id", "Expression", "Fitness", "Parameters", "Size", "DL")
BLOCK_COLUMNS = ("Pattern", "Count", "Avg. Fitness")


class CommandError(ValueError):
    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at position {position})")
        self.message = message
        self.position = position


class UnknownIdError(CommandError):
    def __init__(self, cid: int):
        super().__init__(f"unknown or unevaluated expression id {cid}", 0)
        self.id = cid


class SnapshotError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Command parsing


@dataclass(frozen=True)
class TopCmd:
    n: int
    filters: tuple[FilterAtom, ...] = ()
    criterion: str = "fitness"
    pattern: Optional[Pattern] = None
    negated: bool = False
    root_only: bool = False


@dataclass(frozen=True)
class ReportCmd:
    id: int


@dataclass(frozen=True)
class SubtreesCmd:
    id: int


@dataclass(frozen=True)
class OptimizeCmd:
    id: int
    restarts: Optional[int] = None


@dataclass(frozen=True)
class InsertCmd:
    text: str


@dataclass(frozen=True)
class ParetoCmd:
    criterion: str = "fitness"


@dataclass(frozen=True)
class CountPatternCmd:
    pattern: Pattern


@dataclass(frozen=True)
class DistributionCmd:
    size_op: Optional[str] = None
    size_bound: Optional[int] = None
    limit: Optional[int] = None
    criterion: str = "count"
    min_count: int = 1
    from_top: Optional[int] = None


@dataclass(frozen=True)
class SaveCmd:
    path: str


@dataclass(frozen=True)
class LoadCmd:
    path: str


@dataclass(frozen=True)
class ImportCmd:
    path: str
    parse_parameters: bool = False


@dataclass(frozen=True)
class SimplifyCmd:
    id: int


Command = object

_WORD_RE = re.compile(r"\S+")
_CMP = ("<=", ">=", "<", "=", ">")


class _CmdScanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_space(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek_word(self) -> Optional[str]:
        self._skip_space()
        m = _WORD_RE.match(self.text, self.pos)
        return m.group() if m else None

    def next_word(self, what: str = "argument") -> str:
        self._skip_space()
        m = _WORD_RE.match(self.text, self.pos)
        if not m:
            raise CommandError(f"expected {what}", self.pos)
        self.pos = m.end()
        return m.group()

    def accept(self, word: str) -> bool:
        self._skip_space()
        m = _WORD_RE.match(self.text, self.pos)
        if m and m.group() == word:
            self.pos = m.end()
            return True
        return False

    def expect(self, word: str) -> None:
        self._skip_space()
        if not self.accept(word):
            found = self.peek_word() or "end of command"
            raise CommandError(f"expected {word!r}, found {found!r}", self.pos)

    def int_arg(self, what: str, minimum: Optional[int] = None) -> int:
        self._skip_space()
        start = self.pos
        word = self.next_word(what)
        try:
            value = int(word)
        except ValueError:
            raise CommandError(f"expected an integer {what}, found {word!r}", start)
        if minimum is not None and value < minimum:
            raise CommandError(f"{what} must be >= {minimum}, found {value}", start)
        return value

    def comparator(self) -> str:
        self._skip_space()
        for op in _CMP:
            if self.text.startswith(op, self.pos):
                self.pos += len(op)
                return op
        found = self.peek_word() or "end of command"
        raise CommandError(f"expected a comparator, found {found!r}", self.pos)

    def rest(self, what: str) -> str:
        self._skip_space()
        if self.pos >= len(self.text):
            raise CommandError(f"expected {what}", self.pos)
        start = self.pos
        self.pos = len(self.text)
        return self.text[start:]

    def end(self) -> None:
        self._skip_space()
        if self.pos < len(self.text):
            raise CommandError(f"unexpected trailing input {self.text[self.pos:]!r}", self.pos)

    def pattern_arg(self) -> Pattern:
        start = self.pos
        text = self.rest("a pattern")
        try:
            return parse_pattern(text)
        except ExprSyntaxError as exc:
            raise CommandError(exc.message, start + exc.position)


def _parse_criterion(s: _CmdScanner, allowed: Sequence[str]) -> str:
    word = s.next_word("criterion")
    if word not in allowed:
        raise CommandError(f"criterion must be one of {', '.join(allowed)}", s.pos - len(word))
    return word


def parse_command(text: str) -> Command:
    s = _CmdScanner(text)
    name = s.next_word("a command")
    if name == "top":
        return _parse_top(s)
    if name == "report":
        cmd = ReportCmd(s.int_arg("id", 0))
        s.end()
        return cmd
    if name == "subtrees":
        cmd = SubtreesCmd(s.int_arg("id", 0))
        s.end()
        return cmd
    if name == "optimize":
        cid = s.int_arg("id", 0)
        restarts = s.int_arg("restart count", 1) if s.peek_word() else None
        s.end()
        return OptimizeCmd(cid, restarts)
    if name == "insert":
        return InsertCmd(s.rest("an expression"))
    if name == "pareto":
        criterion = "fitness"
        if s.accept("by"):
            criterion = _parse_criterion(s, ("fitness", "dl"))
        s.end()
        return ParetoCmd(criterion)
    if name == "count-pattern":
        return CountPatternCmd(s.pattern_arg())
    if name == "distribution":
        return _parse_distribution(s)
    if name == "save":
        return SaveCmd(s.rest("a path").strip())
    if name == "load":
        return LoadCmd(s.rest("a path").strip())
    if name == "import":
        return _parse_import(s)
    if name == "simplify":
        cmd = SimplifyCmd(s.int_arg("id", 0))
        s.end()
        return cmd
    raise CommandError(f"unknown command {name!r}", 0)


def _parse_top(s: _CmdScanner) -> TopCmd:
    n = s.int_arg("count", 0)
    filters: list[FilterAtom] = []
    criterion = "fitness"
    pattern = None
    negated = False
    root_only = False
    while True:
        word = s.peek_word()
        if word == "with":
            s.next_word()
            start = s.pos
            fld = s.next_word("a filter field")
            if fld not in ("size", "cost", "parameters"):
                raise CommandError(f"filter field must be size, cost, or parameters", start)
            op = s.comparator()
            bound = s.int_arg("bound")
            filters.append(FilterAtom(fld, op, bound))
        elif word == "by":
            s.next_word()
            criterion = _parse_criterion(s, ("fitness", "dl"))
        elif word in ("matching", "not"):
            if word == "not":
                s.next_word()
                negated = True
            s.expect("matching")
            if s.accept("root"):
                root_only = True
            pattern = s.pattern_arg()
            break
        else:
            s.end()
            break
    return TopCmd(n, tuple(filters), criterion, pattern, negated, root_only)


def _parse_distribution(s: _CmdScanner) -> DistributionCmd:
    size_op = size_bound = limit = from_top = None
    criterion = None
    min_count = 1
    while s.peek_word() is not None:
        if s.accept("with"):
            if s.accept("size"):
                size_op = s.comparator()
                start = s.pos
                size_bound = s.int_arg("size bound", 0)
                if size_bound > blocks.HARD_SIZE_CAP:
                    raise CommandError(
                        f"size bound is capped at {blocks.HARD_SIZE_CAP}", start
                    )
            elif s.accept("at"):
                s.expect("least")
                min_count = s.int_arg("minimum count", 0)
            else:
                found = s.peek_word() or "end of command"
                raise CommandError(f"expected 'size' or 'at least', found {found!r}", s.pos)
        elif s.accept("limited"):
            s.expect("at")
            limit = s.int_arg("limit", 0)
        elif s.accept("by"):
            criterion = _parse_criterion(s, ("count", "fitness"))
        elif s.accept("from"):
            s.expect("top")
            from_top = s.int_arg("count", 0)
        else:
            found = s.peek_word()
            raise CommandError(f"unexpected argument {found!r}", s.pos)
    if criterion is None:
        raise CommandError("distribution requires 'by count' or 'by fitness'", s.pos)
    return DistributionCmd(size_op, size_bound, limit, criterion, min_count, from_top)


def _parse_import(s: _CmdScanner) -> ImportCmd:
    path = s.next_word("a path")
    parse_params = False
    word = s.peek_word()
    if word is not None:
        flag = s.next_word()
        if flag not in ("True", "False"):
            raise CommandError(f"expected True or False, found {flag!r}", s.pos - len(flag))
        parse_params = flag == "True"
    s.end()
    return ImportCmd(path, parse_params)


# ---------------------------------------------------------------------------
# Results


def fmt_num(value: Optional[float]) -> str:
    if value is None:
        return "--"
    return f"{value:.6g}"


def fmt_params(params: Sequence[float]) -> str:
    return "[" + ", ".join(fmt_num(p) for p in params) + "]"


@dataclass
class CommandResult:
    columns: tuple[str, ...] = ()
    rows: list[tuple[str, ...]] = field(default_factory=list)
    message: Optional[str] = None

    def render(self) -> str:
        parts = []
        if self.columns:
            widths = [len(c) for c in self.columns]
            for row in self.rows:
                widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
            fmt = "  ".join(f"{{:<{w}}}" for w in widths)
            parts.append(fmt.format(*self.columns).rstrip())
            for row in self.rows:
                parts.append(fmt.format(*row).rstrip())
        if self.message is not None:
            parts.append(self.message)
        return "\n".join(parts)

    def to_json(self) -> dict:
        out: dict = {
            "columns": [c.lower().replace(". ", "_").replace(" ", "_") for c in self.columns],
            "rows": [dict(zip((c.lower().replace(". ", "_").replace(" ", "_") for c in self.columns), row)) for row in self.rows],
        }
        if self.message is not None:
            out["message"] = self.message
        return out


def _score_row(row: Row) -> tuple[str, ...]:
    return (
        str(row.id),
        row.expression,
        fmt_num(row.fitness),
        fmt_params(row.params),
        str(row.size),
        fmt_num(row.dl),
    )


# ---------------------------------------------------------------------------
# Session


class Session:
    """One interactive exploration state: e-graph, indices, dataset, config.

    Mutating commands (insert, optimize, import, load) run in the single
    writer phase; the shell layer serializes them.
    """

    def __init__(
        self,
        dataset: Optional[Dataset] = None,
        loss_kind: str = "mse",
        seed: int = 0,
        default_restarts: int = 10,
        calculate_dl: bool = False,
    ) -> None:
        self.dataset = dataset
        self.loss_kind = loss_kind
        self.seed = seed
        self.default_restarts = default_restarts
        self.calculate_dl = calculate_dl
        self.op_counter = 0
        self.warnings: list[str] = []
        self._fresh_graph()

    def _fresh_graph(self) -> None:
        self.egraph = EGraph()
        self.index = MatchIndex(self.egraph)
        self.catalog = ScoreCatalog(cost_fn=lambda cid: self.egraph.min_cost(cid))
        self.egraph.on_merge.append(self.catalog.on_merge)

    def _next_seed(self) -> int:
        self.op_counter += 1
        return self.seed + self.op_counter

    def _require_dataset(self) -> Dataset:
        if self.dataset is None:
            raise CommandError("no dataset loaded; evaluation commands need --dataset", 0)
        return self.dataset

    # -- core operations ----------------------------------------------------

    def matched_ids(self, pattern: Pattern, root_only: bool) -> frozenset[int]:
        matches = match_pattern(self.egraph, self.index.db, pattern)
        roots = {root for root, _ in matches}
        if root_only or not roots:
            return frozenset(roots)
        return frozenset(closure_of_matches(self.egraph, iter(roots)))

    def _register(self, cid: int, tree: Expr, theta: Sequence[float], fitness: float) -> FitRecord:
        rec = FitRecord(
            params=tuple(float(t) for t in theta),
            fitness=float(fitness),
            dl=None,
            size=size_of(tree),
            n_params=len(param_indices(tree)),
            loss_kind=self.loss_kind,
        )
        if self.calculate_dl and self.dataset is not None:
            rec.dl = description_length(tree, list(rec.params), self.dataset)
        self.catalog.register(cid, tree, rec)
        return rec

    def insert_expression(self, text: str, dialect: str = "generic") -> int:
        data = self._require_dataset()
        try:
            tree, _ = parse_expression(text, dialect=dialect)
        except ExprSyntaxError as exc:
            raise CommandError(exc.message, exc.position)
        cid = self.egraph.add_expr(tree)
        if cid in self.catalog:
            return cid
        try:
            theta, fitness = fit_params(
                tree, data, self.loss_kind, restarts=self.default_restarts, seed=self._next_seed()
            )
        except FitFailure as exc:
            self.warnings.append(f"fit failed for {render(tree)}: {exc}")
            return cid
        self._register(cid, tree, theta, fitness)
        return cid

    def optimize(self, cid: int, restarts: Optional[int] = None) -> Row:
        data = self._require_dataset()
        cid = self._canonical_registered(cid)
        tree = self.catalog.tree(cid)
        old = self.catalog.record(cid)
        try:
            theta, fitness = fit_params(
                tree,
                data,
                self.loss_kind,
                restarts=restarts or self.default_restarts,
                seed=self._next_seed(),
            )
        except FitFailure as exc:
            raise CommandError(str(exc), 0)
        if fitness > old.fitness:
            self._register(cid, tree, theta, fitness)
        return self._row_for(cid)

    def _canonical_registered(self, cid: int) -> int:
        try:
            cid = self.egraph.find(cid)
        except KeyError:
            raise UnknownIdError(cid)
        if cid not in self.catalog:
            raise UnknownIdError(cid)
        return cid

    def _row_for(self, cid: int) -> Row:
        rec = self.catalog.record(cid)
        return Row(cid, render(self.catalog.tree(cid)), rec.fitness, rec.params, rec.size, rec.dl)

    def report_payload(self, cid: int) -> dict:
        data = self._require_dataset()
        cid = self._canonical_registered(cid)
        rec = self.catalog.record(cid)
        tree = self.catalog.tree(cid)
        theta = list(rec.params)
        train = metrics(tree, theta, data.X, data.y)
        dl = description_length(tree, theta, data)
        if rec.dl is None:
            self.catalog.set_dl(cid, dl)
        payload = {
            "id": str(cid),
            "expression": render(tree),
            "fitness": fmt_num(rec.fitness),
            "parameters": fmt_params(rec.params),
            "size": str(rec.size),
            "dl": fmt_num(self.catalog.record(cid).dl),
            "train": {
                "mse": fmt_num(train.mse),
                "r2": fmt_num(train.r2) if train.r2 is not None else "undefined",
                "nll": fmt_num(train.nll),
                "dl": fmt_num(dl),
            },
        }
        if data.test is not None:
            test = metrics(tree, theta, data.test.X, data.test.y)
            test_dl = description_length(tree, theta, data.test)
            payload["test"] = {
                "mse": fmt_num(test.mse),
                "r2": fmt_num(test.r2) if test.r2 is not None else "undefined",
                "nll": fmt_num(test.nll),
                "dl": fmt_num(test_dl),
            }
        return payload

    def subtrees(self, cid: int) -> list[Row]:
        data = self._require_dataset()
        cid = self._canonical_registered(cid)
        tree = self.catalog.tree(cid)
        rows = []
        for sub in _proper_subtrees(tree):
            sub_id = self.egraph.add_expr(sub)
            if sub_id not in self.catalog:
                try:
                    theta, fitness = fit_params(
                        sub, data, self.loss_kind, restarts=1, seed=self._next_seed()
                    )
                except FitFailure:
                    continue
                self._register(sub_id, sub, theta, fitness)
            rows.append(self._row_for(sub_id))
        return rows

    def simplify(self, cid: int) -> Expr:
        cid = self._canonical_registered(cid)
        return eqsat.simplify(self.egraph, cid)

    # -- import -------------------------------------------------------------

    def import_file(self, path: str, parse_parameters: bool = False) -> tuple[int, list[str]]:
        ext = path.rsplit(".", 1)[-1] if "." in path else ""
        dialect = dialect_for_extension(ext)
        if dialect is None:
            self.warnings.append(f"unknown extension {ext!r}; falling back to the generic dialect")
            dialect = "generic"
        imported = 0
        errors: list[str] = []
        mixing = False
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line:
                    continue
                try:
                    imported += self._import_row(line, dialect, parse_parameters)
                except (ExprSyntaxError, CommandError, ValueError) as exc:
                    errors.append(f"line {lineno}: {exc}")
        return imported, errors

    def _import_row(self, line: str, dialect: str, parse_parameters: bool) -> int:
        parts = line.rsplit(",", 2)
        if len(parts) != 3:
            raise ValueError("expected 3 comma-separated columns")
        expr_text, theta_text, fitness_text = parts
        fitness = float(fitness_text)
        values = [float(v) for v in theta_text.split(";") if v.strip()] if theta_text.strip() else []
        tree, theta = parse_expression(
            expr_text, dialect=dialect, extract_literals=parse_parameters, values=values or None
        )
        cid = self.egraph.add_expr(tree)
        # Fitness from the file is stored verbatim, never recomputed.
        self._register(cid, tree, theta, fitness)
        return 1

    # -- persistence --------------------------------------------------------

    def save(self, path: str) -> None:
        sections = [
            pickle.dumps(self.egraph.to_state()),
            pickle.dumps(self.catalog.to_state()),
            pickle.dumps(
                {
                    "loss_kind": self.loss_kind,
                    "seed": self.seed,
                    "op_counter": self.op_counter,
                    "default_restarts": self.default_restarts,
                    "calculate_dl": self.calculate_dl,
                }
            ),
        ]
        body = b"".join(struct.pack("<Q", len(s)) + s for s in sections)
        with open(path, "wb") as fh:
            fh.write(SNAPSHOT_MAGIC)
            fh.write(struct.pack("<I", SNAPSHOT_VERSION))
            fh.write(hashlib.sha256(body).digest())
            fh.write(body)

    def load(self, path: str) -> None:
        with open(path, "rb") as fh:
            blob = fh.read()
        buf = io.BytesIO(blob)
        if buf.read(4) != SNAPSHOT_MAGIC:
            raise SnapshotError("not a snapshot file (bad magic)")
        (version,) = struct.unpack("<I", buf.read(4))
        if version != SNAPSHOT_VERSION:
            raise SnapshotError(f"snapshot version {version} not supported (expected {SNAPSHOT_VERSION})")
        checksum = buf.read(32)
        body = buf.read()
        if hashlib.sha256(body).digest() != checksum:
            raise SnapshotError("snapshot is corrupt (checksum mismatch)")
        sections = []
        view = io.BytesIO(body)
        for _ in range(3):
            header = view.read(8)
            if len(header) != 8:
                raise SnapshotError("snapshot is truncated")
            (length,) = struct.unpack("<Q", header)
            sections.append(pickle.loads(view.read(length)))
        graph_state, catalog_state, meta = sections
        self.egraph = EGraph.from_state(graph_state)
        self.index = MatchIndex(self.egraph)
        self.catalog = ScoreCatalog.from_state(
            catalog_state, cost_fn=lambda cid: self.egraph.min_cost(cid)
        )
        self.egraph.on_merge.append(self.catalog.on_merge)
        self.loss_kind = meta["loss_kind"]
        self.seed = meta["seed"]
        self.op_counter = meta["op_counter"]
        self.default_restarts = meta["default_restarts"]
        self.calculate_dl = meta["calculate_dl"]

    # -- dispatch -----------------------------------------------------------

    def run_command(self, text: str) -> CommandResult:
        cmd = parse_command(text)
        if isinstance(cmd, TopCmd):
            constraint = None
            if cmd.pattern is not None:
                constraint = PatternConstraint(self.matched_ids(cmd.pattern, cmd.root_only), cmd.negated)
            try:
                rows = self.catalog.top(
                    cmd.n, FilterPredicate(cmd.filters), cmd.criterion, constraint
                )
            except MissingDescriptionLength as exc:
                raise CommandError(str(exc), 0)
            return CommandResult(TABLE_COLUMNS, [_score_row(r) for r in rows])
        if isinstance(cmd, ParetoCmd):
            try:
                rows = self.catalog.pareto(cmd.criterion)
            except MissingDescriptionLength as exc:
                raise CommandError(str(exc), 0)
            return CommandResult(TABLE_COLUMNS, [_score_row(r) for r in rows])
        if isinstance(cmd, ReportCmd):
            payload = self.report_payload(cmd.id)
            lines = [
                f"Id: {payload['id']}",
                f"Expression: {payload['expression']}",
                f"Fitness: {payload['fitness']}",
                f"Parameters: {payload['parameters']}",
                f"Size: {payload['size']}",
                f"DL: {payload['dl']}",
            ]
            for part in ("train", "test"):
                if part in payload:
                    m = payload[part]
                    lines.append(
                        f"{part.capitalize()}: MSE={m['mse']} R2={m['r2']} NLL={m['nll']} DL={m['dl']}"
                    )
            return CommandResult(message="\n".join(lines))
        if isinstance(cmd, SubtreesCmd):
            rows = self.subtrees(cmd.id)
            return CommandResult(TABLE_COLUMNS, [_score_row(r) for r in rows])
        if isinstance(cmd, OptimizeCmd):
            row = self.optimize(cmd.id, cmd.restarts)
            return CommandResult(TABLE_COLUMNS, [_score_row(row)])
        if isinstance(cmd, InsertCmd):
            cid = self.insert_expression(cmd.text)
            if cid in self.catalog:
                return CommandResult(TABLE_COLUMNS, [_score_row(self._row_for(cid))])
            return CommandResult(message=f"stored id {cid} (fit failed; no record)")
        if isinstance(cmd, CountPatternCmd):
            count = blocks.count_pattern(self.egraph, self.index.db, cmd.pattern)
            return CommandResult(message=str(count))
        if isinstance(cmd, DistributionCmd):
            ids = self.catalog.top_ids_by_fitness(cmd.from_top)
            entries = [
                (self.catalog.tree(cid), self.catalog.record(cid).fitness) for cid in ids
            ]
            rows = blocks.distribution(
                entries, cmd.size_op, cmd.size_bound, cmd.limit, cmd.criterion, cmd.min_count
            )
            return CommandResult(
                BLOCK_COLUMNS,
                [(r.pattern, str(r.count), fmt_num(r.avg_fitness)) for r in rows],
            )
        if isinstance(cmd, SaveCmd):
            self.save(cmd.path)
            return CommandResult(message=f"saved to {cmd.path}")
        if isinstance(cmd, LoadCmd):
            try:
                self.load(cmd.path)
            except SnapshotError as exc:
                raise CommandError(str(exc), 0)
            return CommandResult(message=f"loaded {cmd.path}")
        if isinstance(cmd, ImportCmd):
            imported, errors = self.import_file(cmd.path, cmd.parse_parameters)
            msg = f"imported {imported} expressions"
            if errors:
                msg += f" ({len(errors)} rows failed)"
                msg += "\n" + "\n".join(errors)
            return CommandResult(message=msg)
        if isinstance(cmd, SimplifyCmd):
            simplified = self.simplify(cmd.id)
            return CommandResult(message=render(simplified))
        raise CommandError(f"unhandled command {cmd!r}", 0)


def _proper_subtrees(tree: Expr) -> list[Expr]:
    """Distinct proper subtrees in pre-order, parameters re-indexed per subtree."""
    from .expr import normalize_params

    out: list[Expr] = []
    seen: set = set()

    def walk(node: Expr, is_root: bool) -> None:
        if not is_root:
            normalized, _ = normalize_params(node)
            if normalized not in seen:
                seen.add(normalized)
                out.append(normalized)
        if hasattr(node, "child"):
            walk(node.child, False)
        elif hasattr(node, "left"):
            walk(node.left, False)
            walk(node.right, False)

    walk(tree, True)
    return out
