"""Score-ordered indices, per-size Pareto buckets, and top/pareto queries.

The two orderings (fitness descending, description length ascending) are
kept as sorted key lists with bisect insertion; the contract is logarithmic
search with ordered traversal, and any ordered container would do.  Ties in
the criterion break by smaller size, then smaller e-class id.
"""

from __future__ import annotations

import math
from bisect import insort
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .expr import Expr, render
from .fitdata import FitRecord


class MissingDescriptionLength(RuntimeError):
    def __init__(self) -> None:
        super().__init__(
            "no description length recorded; start with --calculate-dl or run `report` first"
        )


@dataclass(frozen=True)
class FilterAtom:
    field: str  # size | cost | parameters
    op: str  # < <= = > >=
    bound: int

    def check(self, value: float) -> bool:
        if self.op == "<":
            return value < self.bound
        if self.op == "<=":
            return value <= self.bound
        if self.op == "=":
            return value == self.bound
        if self.op == ">":
            return value > self.bound
        if self.op == ">=":
            return value >= self.bound
        raise ValueError(f"unknown comparator {self.op!r}")


@dataclass(frozen=True)
class FilterPredicate:
    """Conjunction of integer comparisons over size, cost, and parameters."""

    atoms: tuple[FilterAtom, ...] = ()

    def check(self, record: FitRecord, cost: float) -> bool:
        for atom in self.atoms:
            value = {
                "size": record.size,
                "cost": cost,
                "parameters": record.n_params,
            }[atom.field]
            if not atom.check(value):
                return False
        return True


@dataclass(frozen=True)
class Row:
    id: int
    expression: str
    fitness: float
    params: tuple[float, ...]
    size: int
    dl: Optional[float]


@dataclass(frozen=True)
class PatternConstraint:
    matched_ids: frozenset[int]
    negated: bool = False

    def admits(self, cid: int) -> bool:
        return (cid in self.matched_ids) != self.negated


class ScoreCatalog:
    def __init__(self, cost_fn: Optional[Callable[[int], float]] = None) -> None:
        self._records: dict[int, tuple[Expr, FitRecord]] = {}
        self._by_fitness: list[tuple[float, int, int]] = []  # (-fitness, size, id)
        self._by_dl: list[tuple[float, int, int]] = []  # (dl, size, id)
        self._buckets: dict[int, dict[str, list]] = {}
        self.cost_fn = cost_fn or (lambda cid: math.inf)

    # -- maintenance --------------------------------------------------------

    def __contains__(self, cid: int) -> bool:
        return cid in self._records

    def __len__(self) -> int:
        return len(self._records)

    def ids(self) -> list[int]:
        return sorted(self._records)

    def record(self, cid: int) -> FitRecord:
        return self._records[cid][1]

    def tree(self, cid: int) -> Expr:
        return self._records[cid][0]

    def _bucket(self, size: int) -> dict[str, list]:
        return self._buckets.setdefault(size, {"fitness": [], "dl": []})

    def _index(self, cid: int, rec: FitRecord) -> None:
        key = (-rec.fitness, rec.size, cid)
        insort(self._by_fitness, key)
        insort(self._bucket(rec.size)["fitness"], key)
        if rec.dl is not None:
            dkey = (rec.dl, rec.size, cid)
            insort(self._by_dl, dkey)
            insort(self._bucket(rec.size)["dl"], dkey)

    def _deindex(self, cid: int, rec: FitRecord) -> None:
        key = (-rec.fitness, rec.size, cid)
        self._by_fitness.remove(key)
        self._bucket(rec.size)["fitness"].remove(key)
        if rec.dl is not None:
            dkey = (rec.dl, rec.size, cid)
            self._by_dl.remove(dkey)
            self._bucket(rec.size)["dl"].remove(dkey)

    @staticmethod
    def _better(a: FitRecord, b: FitRecord) -> FitRecord:
        """Prefer the larger fitness; on ties the smaller recorded DL."""
        if a.fitness != b.fitness:
            return a if a.fitness > b.fitness else b
        a_dl = math.inf if a.dl is None else a.dl
        b_dl = math.inf if b.dl is None else b.dl
        return a if a_dl <= b_dl else b

    def register(self, cid: int, tree: Expr, rec: FitRecord) -> None:
        if not math.isfinite(rec.fitness):
            raise ValueError("non-finite fitness rejected")
        if cid in self._records:
            old_tree, old = self._records[cid]
            best = self._better(old, rec)
            if best is old:
                return
            self._deindex(cid, old)
            tree = tree if best is rec else old_tree
            rec = best
        self._records[cid] = (tree, rec)
        self._index(cid, rec)

    def set_dl(self, cid: int, dl: float) -> None:
        tree, rec = self._records[cid]
        self._deindex(cid, rec)
        rec.dl = dl
        self._records[cid] = (tree, rec)
        self._index(cid, rec)

    def on_merge(self, kept: int, dropped: int) -> None:
        """E-graph merge hook: unify registrations under the kept id."""
        if dropped not in self._records:
            return
        tree, rec = self._records.pop(dropped)
        self._deindex(dropped, rec)
        self.register(kept, tree, rec)

    # -- queries ------------------------------------------------------------

    def _row(self, cid: int) -> Row:
        tree, rec = self._records[cid]
        return Row(cid, render(tree), rec.fitness, rec.params, rec.size, rec.dl)

    def _sequence(self, criterion: str) -> list[tuple[float, int, int]]:
        if criterion == "fitness":
            return self._by_fitness
        if criterion == "dl":
            if not self._by_dl:
                raise MissingDescriptionLength()
            return self._by_dl
        raise ValueError(f"unknown criterion {criterion!r}")

    def top(
        self,
        n: int,
        filt: Optional[FilterPredicate] = None,
        criterion: str = "fitness",
        constraint: Optional[PatternConstraint] = None,
    ) -> list[Row]:
        if n < 0:
            raise ValueError("top count must be non-negative")
        rows: list[Row] = []
        for _, _, cid in self._sequence(criterion):
            if len(rows) >= n:
                break
            rec = self._records[cid][1]
            if filt is not None and not filt.check(rec, self.cost_fn(cid)):
                continue
            if constraint is not None and not constraint.admits(cid):
                continue
            rows.append(self._row(cid))
        return rows

    def pareto(self, criterion: str = "fitness") -> list[Row]:
        """Non-dominated sweep over the per-size buckets, ascending size."""
        seq_present = self._sequence(criterion)  # raises when dl is absent
        assert seq_present is not None
        rows: list[Row] = []
        best = math.inf
        for size in sorted(self._buckets):
            bucket = self._buckets[size][criterion]
            if not bucket:
                continue
            key, _, cid = bucket[0]
            if key < best:
                best = key
                rows.append(self._row(cid))
        return rows

    def top_ids_by_fitness(self, n: Optional[int] = None) -> list[int]:
        ids = [cid for _, _, cid in self._by_fitness]
        return ids if n is None else ids[:n]

    # -- persistence --------------------------------------------------------

    def to_state(self) -> dict:
        return {
            "records": {
                cid: (tree, (rec.params, rec.fitness, rec.dl, rec.size, rec.n_params, rec.loss_kind))
                for cid, (tree, rec) in self._records.items()
            }
        }

    @classmethod
    def from_state(cls, state: dict, cost_fn: Optional[Callable[[int], float]] = None) -> "ScoreCatalog":
        cat = cls(cost_fn)
        for cid, (tree, fields) in state["records"].items():
            params, fitness, dl, size, n_params, loss_kind = fields
            cat.register(cid, tree, FitRecord(tuple(params), fitness, dl, size, n_params, loss_kind))
        return cat
