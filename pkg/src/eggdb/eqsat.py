"""Bounded equality saturation over a small algebraic rule set.

Each iteration matches every rule against the current graph, instantiates
the right-hand sides, merges the resulting classes with the matched roots,
and repairs.  The loop stops at a fixpoint (no merge and no growth) or when
the iteration/e-node budget runs out.  Rules only add equalities; nothing is
ever removed from the graph.

Rule files hold one rule per line, ``lhs => rhs``, in the pattern syntax of
:mod:`eggdb.expr`; blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .egraph import EGraph
from .expr import Expr, Pattern, parse_pattern, pattern_vars
from .matchdb import PatternDB, instantiate, match_pattern

DEFAULT_MAX_ITERATIONS = 30
DEFAULT_MAX_ENODES = 1_000_000


@dataclass(frozen=True)
class RewriteRule:
    name: str
    lhs: Pattern
    rhs: Pattern

    def __post_init__(self) -> None:
        if self.lhs == self.rhs:
            raise ValueError(f"rule {self.name}: sides are identical")
        if not pattern_vars(self.rhs) <= pattern_vars(self.lhs):
            raise ValueError(f"rule {self.name}: rhs uses unbound pattern variables")


@dataclass
class SaturationReport:
    iterations: int
    merges: int
    saturated: bool


def rule(name: str, lhs: str, rhs: str) -> RewriteRule:
    return RewriteRule(name, parse_pattern(lhs), parse_pattern(rhs))


def parse_rules(text: str) -> list[RewriteRule]:
    rules = []
    for i, line in enumerate(text.splitlines()):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=>" not in line:
            raise ValueError(f"line {i + 1}: expected 'lhs => rhs'")
        lhs, rhs = line.split("=>", 1)
        rules.append(rule(f"line-{i + 1}", lhs.strip(), rhs.strip()))
    return rules


def load_rules(path: str) -> list[RewriteRule]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_rules(fh.read())


# Commutativity is redundant given the sorted-children canonicalization of
# the e-graph but kept for documentation.  All identities hold under the
# protected evaluation semantics (log and sqrt take the absolute value of
# their argument) on the points where the original expression is finite.
DEFAULT_RULES: list[RewriteRule] = [
    rule("commute-add", "v0 + v1", "v1 + v0"),
    rule("commute-mul", "v0 * v1", "v1 * v0"),
    rule("assoc-add-l", "(v0 + v1) + v2", "v0 + (v1 + v2)"),
    rule("assoc-add-r", "v0 + (v1 + v2)", "(v0 + v1) + v2"),
    rule("assoc-mul-l", "(v0 * v1) * v2", "v0 * (v1 * v2)"),
    rule("assoc-mul-r", "v0 * (v1 * v2)", "(v0 * v1) * v2"),
    rule("distribute", "v0 * (v1 + v2)", "v0 * v1 + v0 * v2"),
    rule("factor", "v0 * v1 + v0 * v2", "v0 * (v1 + v2)"),
    rule("add-zero", "v0 + 0", "v0"),
    rule("sub-zero", "v0 - 0", "v0"),
    rule("mul-one", "v0 * 1", "v0"),
    rule("mul-zero", "v0 * 0", "0"),
    rule("div-one", "v0 / 1", "v0"),
    rule("sub-self", "v0 - v0", "0"),
    rule("div-self", "v0 / v0", "1"),
    rule("double-neg", "0 - (0 - v0)", "v0"),
    rule("pow-one", "v0 ^ 1", "v0"),
    rule("pow-zero", "v0 ^ 0", "1"),
    rule("log-exp", "log(exp(v0))", "v0"),
    rule("sqrt-square", "sqrt(v0 * v0)", "abs(v0)"),
]


def run_saturation(
    g: EGraph,
    rules: Sequence[RewriteRule],
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    max_enodes: int = DEFAULT_MAX_ENODES,
) -> SaturationReport:
    report = SaturationReport(iterations=0, merges=0, saturated=False)
    for _ in range(max_iterations):
        if g.num_enodes > max_enodes:
            break
        db = PatternDB.from_egraph(g)
        pending = []
        for r in rules:
            for root, subst in match_pattern(g, db, r.lhs):
                pending.append((root, r.rhs, subst))
        nodes_before = g.num_enodes
        merged = 0
        for root, rhs, subst in pending:
            new_id = instantiate(g, rhs, subst)
            if g.find(new_id) != g.find(root):
                g.merge(new_id, root)
                merged += 1
        g.rebuild()
        report.iterations += 1
        report.merges += merged
        if merged == 0 and g.num_enodes == nodes_before:
            report.saturated = True
            break
    return report


def simplify(
    g: EGraph,
    cid: int,
    rules: Sequence[RewriteRule] | None = None,
    max_iterations: int = 5,
    max_enodes: int = 50_000,
) -> Expr:
    """Saturate under the rules, then extract the cheapest form of the class.

    A zero-iteration budget returns the current best extraction.
    """
    if rules is None:
        rules = DEFAULT_RULES
    if max_iterations > 0:
        run_saturation(g, rules, max_iterations=max_iterations, max_enodes=max_enodes)
    return g.extract_best(cid)
