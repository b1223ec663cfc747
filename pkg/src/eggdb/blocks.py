"""Building-block extraction and the count-pattern / distribution queries.

Mining is purely syntactic: a leaf yields the wildcard and itself, a unary
node wraps every child pattern, and a binary node combines the cross product
of its children's patterns.  Constants are abstracted to parameter leaves.
Patterns carry anonymous wildcards; indices are assigned left-to-right only
when a pattern is rendered or aggregated for display.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .egraph import EGraph
from .expr import Binary, Const, Expr, Param, Pattern, PatVar, Unary, Var, render
from .matchdb import PatternDB, closure_of_matches, match_pattern

HARD_SIZE_CAP = 10

_WILDCARD = PatVar(0)
_ANON_PARAM = Param(0)


def get_patterns(root: Expr, size_cap: Optional[int] = HARD_SIZE_CAP) -> list[tuple[Pattern, int]]:
    """All building-block patterns of the tree, with their sizes (multiset).

    ``size_cap`` prunes oversized patterns during construction; ``None``
    disables the cap (the pattern count grows like 1 + f(n-1)^2 per level of
    a complete binary tree, so uncapped mining is only viable for small trees).
    """
    memo: dict[Expr, list[tuple[Pattern, int]]] = {}

    def go(node: Expr) -> list[tuple[Pattern, int]]:
        cached = memo.get(node)
        if cached is not None:
            return cached
        out: list[tuple[Pattern, int]] = [(_WILDCARD, 1)]
        if isinstance(node, Unary):
            for pat, s in go(node.child):
                if size_cap is None or s + 1 <= size_cap:
                    out.append((Unary(node.op, pat), s + 1))
        elif isinstance(node, Binary):
            left = go(node.left)
            # Equal children share one recursion; the cross product squares it.
            right = left if node.left == node.right else go(node.right)
            for lp, ls in left:
                for rp, rs in right:
                    s = 1 + ls + rs
                    if size_cap is None or s <= size_cap:
                        out.append((Binary(node.op, lp, rp), s))
        else:
            leaf: Pattern = _ANON_PARAM if isinstance(node, (Const, Param)) else node
            out.append((leaf, 1))
        memo[node] = out
        return out

    return go(root)


def canonical_pattern(p: Pattern) -> Pattern:
    """Re-number wildcards and parameter leaves left-to-right for display."""
    counters = {"v": 0, "t": 0}

    def walk(node: Pattern) -> Pattern:
        if isinstance(node, PatVar):
            counters["v"] += 1
            return PatVar(counters["v"] - 1)
        if isinstance(node, Param):
            counters["t"] += 1
            return Param(counters["t"] - 1)
        if isinstance(node, Unary):
            return Unary(node.op, walk(node.child))
        if isinstance(node, Binary):
            left = walk(node.left)
            return Binary(node.op, left, walk(node.right))
        return node

    return walk(p)


def count_pattern(g: EGraph, db: PatternDB, p: Pattern) -> int:
    """Distinct canonical e-classes containing the pattern anywhere."""
    roots = {root for root, _ in match_pattern(g, db, p)}
    if not roots:
        return 0
    return len(closure_of_matches(g, iter(roots)))


@dataclass(frozen=True)
class BlockRow:
    pattern: str
    count: int
    avg_fitness: float


@dataclass
class BlockStats:
    """Aggregated (pattern -> frequency, fitness sum) over mined expressions."""

    table: dict[Pattern, list[float]] = field(default_factory=dict)

    def add(self, pattern: Pattern, fitness: float) -> None:
        cell = self.table.setdefault(pattern, [0, 0.0])
        cell[0] += 1
        cell[1] += fitness


def _size_ok(size: int, op: Optional[str], bound: Optional[int]) -> bool:
    if op is None or bound is None:
        return True
    return {
        "<": size < bound,
        "<=": size <= bound,
        "=": size == bound,
        ">": size > bound,
        ">=": size >= bound,
    }[op]


def distribution(
    entries: Iterable[tuple[Expr, float]],
    size_op: Optional[str] = None,
    size_bound: Optional[int] = None,
    limit: Optional[int] = None,
    criterion: str = "count",
    min_count: int = 1,
) -> list[BlockRow]:
    """Aggregate building blocks of the given (expression, fitness) entries.

    Every occurrence counts: an expression containing a pattern twice adds 2
    to its frequency and twice its fitness to the sum.  The size bound must
    stay within the hard mining cap of 10.
    """
    if size_bound is not None and size_op in ("<", "<=", "=") :
        if size_op == "<":
            cap = min(size_bound - 1, HARD_SIZE_CAP)
        else:
            cap = min(size_bound, HARD_SIZE_CAP)
    else:
        cap = HARD_SIZE_CAP
    stats = BlockStats()
    for tree, fitness in entries:
        for pattern, size in get_patterns(tree, size_cap=cap):
            if _size_ok(size, size_op, size_bound):
                stats.add(pattern, fitness)
    rows = [
        BlockRow(render(canonical_pattern(p)), int(count), fit_sum / count)
        for p, (count, fit_sum) in stats.table.items()
        if count >= min_count
    ]
    if criterion == "count":
        rows.sort(key=lambda r: (-r.count, r.pattern))
    elif criterion == "fitness":
        rows.sort(key=lambda r: (-r.avg_fitness, r.pattern))
    else:
        raise ValueError(f"unknown criterion {criterion!r}")
    return rows if limit is None else rows[:limit]
