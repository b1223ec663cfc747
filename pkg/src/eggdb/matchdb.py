"""Trie-backed pattern database and e-matching with substitution maps.

Each grammar token maps to a trie: the first level keys the e-classes that
contain an e-node with that token, and deeper levels key the e-node's
children ids in child order.  Matching walks pattern and trie together,
pruning partial substitutions that cannot reach a consistent binding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .egraph import COMMUTATIVE, EGraph, ENode, is_param_token, leaf_token
from .expr import Binary, Const, Param, Pattern, PatVar, Unary, Var

Trie = dict  # int -> Trie; empty dict terminates a path


class UnboundPatternVariable(KeyError):
    pass


@dataclass(frozen=True)
class Substitution:
    """Bindings of pattern variables and pattern operator positions.

    ``vars`` maps pattern-variable indices to canonical e-class ids; ``ops``
    maps operator positions (child-index paths from the pattern root) to the
    e-class the operator matched in.
    """

    vars: dict[int, int] = field(default_factory=dict)
    ops: dict[tuple[int, ...], int] = field(default_factory=dict)

    def key(self) -> tuple:
        return (tuple(sorted(self.vars.items())), tuple(sorted(self.ops.items())))

    def op_class(self, pattern: Pattern, token: str) -> int:
        """The class bound at the unique position of ``token`` in the pattern."""
        paths = [p for p in _token_paths(pattern, ()) if p[0] == token]
        if len(paths) != 1:
            raise ValueError(f"token {token!r} is not unique in the pattern")
        return self.ops[paths[0][1]]


def _token_paths(p: Pattern, path: tuple[int, ...]) -> list[tuple[str, tuple[int, ...]]]:
    if isinstance(p, Unary):
        return [(p.op, path)] + _token_paths(p.child, path + (0,))
    if isinstance(p, Binary):
        return (
            [(p.op, path)]
            + _token_paths(p.left, path + (0,))
            + _token_paths(p.right, path + (1,))
        )
    return []


class PatternDB:
    """Token tries over the canonical e-nodes of one e-graph."""

    def __init__(self) -> None:
        self.tries: dict[str, Trie] = {}
        self.param_classes: set[int] = set()

    @classmethod
    def from_egraph(cls, g: EGraph) -> "PatternDB":
        db = cls()
        for cid, ec in g.classes.items():
            for node in ec.nodes:
                db._insert(g, cid, node)
        return db

    def _insert(self, g: EGraph, cid: int, node: ENode) -> None:
        trie = self.tries.setdefault(node.op, {})
        level = trie.setdefault(cid, {})
        for child in node.children:
            level = level.setdefault(g.find(child), {})
        if is_param_token(node.op):
            self.param_classes.add(cid)

    def classes_with_token(self, token: str) -> set[int]:
        return set(self.tries.get(token, ()))


class MatchIndex:
    """Lazily keeps a PatternDB in sync with a mutating e-graph."""

    def __init__(self, g: EGraph) -> None:
        self.g = g
        self._db: Optional[PatternDB] = None
        self._version = -1

    @property
    def db(self) -> PatternDB:
        if self._db is None or self._version != self.g.version:
            self._db = PatternDB.from_egraph(self.g)
            self._version = self.g.version
        return self._db


def match_pattern(g: EGraph, db: PatternDB, p: Pattern) -> list[tuple[int, Substitution]]:
    """All (root e-class, substitution) pairs from which ``p`` is derivable."""
    results: dict[tuple, tuple[int, Substitution]] = {}

    def record(root: int, s: Substitution) -> None:
        results.setdefault((root,) + s.key(), (root, s))

    if isinstance(p, PatVar):
        for cid in g.canonical_ids():
            record(cid, Substitution({p.index: cid}, {}))
    elif isinstance(p, (Var, Const)):
        for cid in db.classes_with_token(leaf_token(p)):
            record(g.find(cid), Substitution())
    elif isinstance(p, Param):
        for cid in db.param_classes:
            record(g.find(cid), Substitution())
    else:
        for cid in db.tries.get(p.op, ()):
            for s in _match_class(g, db, p, cid, Substitution(), ()):
                record(g.find(cid), s)
    return sorted(results.values(), key=lambda rs: (rs[0],) + rs[1].key())


def _match_class(
    g: EGraph,
    db: PatternDB,
    p: Pattern,
    cid: int,
    subst: Substitution,
    path: tuple[int, ...],
) -> Iterator[Substitution]:
    cid = g.find(cid)
    if isinstance(p, PatVar):
        bound = subst.vars.get(p.index)
        if bound is None:
            yield Substitution({**subst.vars, p.index: cid}, subst.ops)
        elif bound == cid:
            yield subst
        return
    if isinstance(p, (Var, Const)):
        if cid in db.classes_with_token(leaf_token(p)):
            yield subst
        return
    if isinstance(p, Param):
        # Parameters are anonymous across models: t_k matches any parameter leaf.
        if cid in db.param_classes:
            yield subst
        return
    trie = db.tries.get(p.op, {}).get(cid)
    if trie is None:
        return
    subst = Substitution(subst.vars, {**subst.ops, path: cid})
    if isinstance(p, Unary):
        child_orders = [((p.child, path + (0,)),)]
    else:
        child_orders = [((p.left, path + (0,)), (p.right, path + (1,)))]
        if p.op in COMMUTATIVE and p.left != p.right:
            child_orders.append(((p.right, path + (1,)), (p.left, path + (0,))))
    for order in child_orders:
        yield from _match_children(g, db, order, trie, subst)


def _match_children(
    g: EGraph,
    db: PatternDB,
    pats: tuple[tuple[Pattern, tuple[int, ...]], ...],
    trie: Trie,
    subst: Substitution,
) -> Iterator[Substitution]:
    if not pats:
        yield subst
        return
    (p0, path0), rest = pats[0], pats[1:]
    for child_id, sub_trie in trie.items():
        for s in _match_class(g, db, p0, child_id, subst, path0):
            yield from _match_children(g, db, rest, sub_trie, s)


def closure_of_matches(g: EGraph, ids: Iterator[int]) -> set[int]:
    """Upward transitive closure over parent links, including the ids."""
    seen: set[int] = set()
    stack = [g.find(i) for i in ids]
    while stack:
        cid = stack.pop()
        if cid in seen:
            continue
        seen.add(cid)
        stack.extend(p for p in g.canonical_parents(cid) if p not in seen)
    return seen


def instantiate(g: EGraph, p: Pattern, s: Substitution) -> int:
    """Insert the concretized pattern bottom-up; returns its root e-class id."""
    if isinstance(p, PatVar):
        try:
            return g.find(s.vars[p.index])
        except KeyError:
            raise UnboundPatternVariable(p.index)
    if isinstance(p, Unary):
        return g.add_enode(ENode(p.op, (instantiate(g, p.child, s),)))
    if isinstance(p, Binary):
        left = instantiate(g, p.left, s)
        right = instantiate(g, p.right, s)
        return g.add_enode(ENode(p.op, (left, right)))
    return g.add_enode(ENode(leaf_token(p)))
