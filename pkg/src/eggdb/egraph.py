"""Hash-consed e-graph: e-nodes grouped in e-classes with a canonical map.

E-nodes are ``(op, children)`` tuples whose children are e-class ids.  Leaves
carry their token in ``op`` (``x0``, ``t1``, or the repr of a constant).
Children of the commutative operators ``+`` and ``*`` are stored sorted by
canonical id, so ``a + b`` and ``b + a`` hash-cons to the same e-class.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .expr import (
    BINARY_OPS,
    BINARY_WEIGHT,
    LEAF_WEIGHT,
    UNARY_OPS,
    UNARY_WEIGHT,
    Binary,
    Const,
    Expr,
    Param,
    Unary,
    Var,
)

COMMUTATIVE = ("+", "*")

_INF = float("inf")


class UnknownEClassError(KeyError):
    pass


class ExtractionError(RuntimeError):
    pass


@dataclass(frozen=True)
class ENode:
    op: str
    children: tuple[int, ...] = ()


_PARAM_RE = re.compile(r"t(\d+)$")
_VAR_RE = re.compile(r"x(\d+)$")


def leaf_token(leaf: Expr) -> str:
    if isinstance(leaf, Var):
        return f"x{leaf.index}"
    if isinstance(leaf, Param):
        return f"t{leaf.index}"
    if isinstance(leaf, Const):
        return repr(float(leaf.value))
    raise TypeError(f"not a leaf: {leaf!r}")


def token_to_leaf(token: str) -> Expr:
    m = _VAR_RE.fullmatch(token)
    if m:
        return Var(int(m.group(1)))
    m = _PARAM_RE.fullmatch(token)
    if m:
        return Param(int(m.group(1)))
    return Const(float(token))


def is_leaf_token(token: str) -> bool:
    return token not in UNARY_OPS and token not in BINARY_OPS


def is_param_token(token: str) -> bool:
    return _PARAM_RE.fullmatch(token) is not None


def is_const_token(token: str) -> bool:
    if not is_leaf_token(token):
        return False
    return _VAR_RE.fullmatch(token) is None and _PARAM_RE.fullmatch(token) is None


def node_weight(op: str) -> int:
    if op in UNARY_OPS:
        return UNARY_WEIGHT
    if op in BINARY_OPS:
        return BINARY_WEIGHT
    return LEAF_WEIGHT


@dataclass
class EClass:
    nodes: set[ENode] = field(default_factory=set)
    parents: set[tuple[ENode, int]] = field(default_factory=set)
    min_cost: float = _INF
    height: float = _INF
    is_constant: bool = False


class EGraph:
    def __init__(self) -> None:
        self._uf_parent: dict[int, int] = {}
        self._uf_size: dict[int, int] = {}
        self.hashcons: dict[ENode, int] = {}
        self.classes: dict[int, EClass] = {}
        self.worklist: set[int] = set()
        self._next_id = 0
        self.version = 0
        self.on_merge: list[Callable[[int, int], None]] = []

    # -- union-find ---------------------------------------------------------

    def find(self, cid: int) -> int:
        if cid not in self._uf_parent:
            raise UnknownEClassError(cid)
        root = cid
        while self._uf_parent[root] != root:
            root = self._uf_parent[root]
        while self._uf_parent[cid] != root:
            self._uf_parent[cid], cid = root, self._uf_parent[cid]
        return root

    def _union(self, a: int, b: int) -> tuple[int, int]:
        """Union by size; ties break toward the smaller id. Returns (kept, dropped)."""
        sa, sb = self._uf_size[a], self._uf_size[b]
        if sa > sb or (sa == sb and a < b):
            keep, drop = a, b
        else:
            keep, drop = b, a
        self._uf_parent[drop] = keep
        self._uf_size[keep] = sa + sb
        return keep, drop

    # -- construction -------------------------------------------------------

    def canonicalize(self, node: ENode) -> ENode:
        children = tuple(self.find(c) for c in node.children)
        if node.op in COMMUTATIVE:
            children = tuple(sorted(children))
        return ENode(node.op, children)

    def add_enode(self, node: ENode) -> int:
        node = self.canonicalize(node)
        existing = self.hashcons.get(node)
        if existing is not None:
            return self.find(existing)
        cid = self._next_id
        self._next_id += 1
        self._uf_parent[cid] = cid
        self._uf_size[cid] = 1
        cls = EClass(nodes={node})
        self.classes[cid] = cls
        self.hashcons[node] = cid
        for child in set(node.children):
            self.classes[self.find(child)].parents.add((node, cid))
        self._init_data(cls, node)
        self.version += 1
        return cid

    def _init_data(self, cls: EClass, node: ENode) -> None:
        if not node.children:
            cls.min_cost = LEAF_WEIGHT
            cls.height = 1
            cls.is_constant = is_const_token(node.op)
            return
        children = [self.classes[self.find(c)] for c in node.children]
        cls.min_cost = node_weight(node.op) + sum(c.min_cost for c in children)
        cls.height = 1 + max(c.height for c in children)
        cls.is_constant = all(c.is_constant for c in children)

    def add_expr(self, tree: Expr) -> int:
        if isinstance(tree, Unary):
            return self.add_enode(ENode(tree.op, (self.add_expr(tree.child),)))
        if isinstance(tree, Binary):
            left = self.add_expr(tree.left)
            right = self.add_expr(tree.right)
            return self.add_enode(ENode(tree.op, (left, right)))
        return self.add_enode(ENode(leaf_token(tree)))

    # -- merging and repair -------------------------------------------------

    def merge(self, a: int, b: int) -> int:
        a, b = self.find(a), self.find(b)
        if a == b:
            return a
        keep, drop = self._union(a, b)
        kc, dc = self.classes[keep], self.classes.pop(drop)
        kc.nodes |= dc.nodes
        kc.parents |= dc.parents
        kc.min_cost = min(kc.min_cost, dc.min_cost)
        kc.height = min(kc.height, dc.height)
        kc.is_constant = kc.is_constant or dc.is_constant
        self.worklist.add(keep)
        self.version += 1
        for hook in self.on_merge:
            hook(keep, drop)
        return keep

    def rebuild(self) -> None:
        """Restore congruence and refresh derived e-class data."""
        merged_any = bool(self.worklist)
        while self.worklist:
            todo = {self.find(c) for c in self.worklist}
            self.worklist.clear()
            for cid in todo:
                self._repair(cid)
        if merged_any:
            self._recompute_data()
        self.version += 1

    def _repair(self, cid: int) -> None:
        cls = self.classes[self.find(cid)]
        cls.nodes = {self.canonicalize(n) for n in cls.nodes}
        old_parents = list(cls.parents)
        cls.parents = set()  # merges below may add parents; keep those
        seen: dict[ENode, int] = {}
        for pnode, pid in old_parents:
            self.hashcons.pop(pnode, None)
            canon = self.canonicalize(pnode)
            pid = self.find(pid)
            if canon in seen and self.find(seen[canon]) != pid:
                pid = self.merge(seen[canon], pid)
            elif canon in self.hashcons and self.find(self.hashcons[canon]) != pid:
                pid = self.merge(self.hashcons[canon], pid)
            self.hashcons[canon] = pid
            seen[canon] = pid
        cls = self.classes[self.find(cid)]
        cls.parents.update((n, self.find(i)) for n, i in seen.items())
        for node in cls.nodes:
            self.hashcons[node] = self.find(cid)

    def _recompute_data(self) -> None:
        for cls in self.classes.values():
            cls.min_cost = _INF
            cls.height = _INF
            cls.is_constant = False
        changed = True
        while changed:
            changed = False
            for cls in self.classes.values():
                for node in cls.nodes:
                    if not node.children:
                        cost: float = LEAF_WEIGHT
                        height: float = 1
                        const = is_const_token(node.op)
                    else:
                        kids = [self.classes[self.find(c)] for c in node.children]
                        cost = node_weight(node.op) + sum(k.min_cost for k in kids)
                        height = 1 + max(k.height for k in kids)
                        const = all(k.is_constant for k in kids)
                    if cost < cls.min_cost:
                        cls.min_cost = cost
                        changed = True
                    if height < cls.height:
                        cls.height = height
                        changed = True
                    if const and not cls.is_constant:
                        cls.is_constant = True
                        changed = True

    # -- queries ------------------------------------------------------------

    @property
    def num_enodes(self) -> int:
        return len(self.hashcons)

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def canonical_ids(self) -> list[int]:
        return sorted(self.classes)

    def canonical_parents(self, cid: int) -> set[int]:
        return {self.find(pid) for _, pid in self.classes[self.find(cid)].parents}

    def min_cost(self, cid: int) -> float:
        return self.classes[self.find(cid)].min_cost

    def extract_best(self, cid: int) -> Expr:
        """An expression of minimal cost derivable from the class."""
        cid = self.find(cid)
        best: dict[int, tuple[float, ENode]] = {}
        changed = True
        while changed:
            changed = False
            for cls_id, cls in self.classes.items():
                for node in cls.nodes:
                    if node.children:
                        kids = [self.find(c) for c in node.children]
                        if any(k not in best for k in kids):
                            continue
                        cost = node_weight(node.op) + sum(best[k][0] for k in kids)
                    else:
                        cost = LEAF_WEIGHT
                    if cls_id not in best or cost < best[cls_id][0]:
                        best[cls_id] = (cost, node)
                        changed = True
        if cid not in best:
            raise ExtractionError(f"no finite-cost expression for e-class {cid}")

        def build(c: int) -> Expr:
            node = best[self.find(c)][1]
            if not node.children:
                return token_to_leaf(node.op)
            if node.op in UNARY_OPS:
                return Unary(node.op, build(node.children[0]))
            return Binary(node.op, build(node.children[0]), build(node.children[1]))

        return build(cid)

    # -- persistence --------------------------------------------------------

    def to_state(self) -> dict:
        return {
            "uf_parent": dict(self._uf_parent),
            "uf_size": dict(self._uf_size),
            "hashcons": {(n.op, n.children): cid for n, cid in self.hashcons.items()},
            "classes": {
                cid: {
                    "nodes": [(n.op, n.children) for n in sorted(cls.nodes, key=lambda n: (n.op, n.children))],
                    "parents": sorted(((n.op, n.children), pid) for n, pid in cls.parents),
                    "min_cost": cls.min_cost,
                    "height": cls.height,
                    "is_constant": cls.is_constant,
                }
                for cid, cls in self.classes.items()
            },
            "next_id": self._next_id,
        }

    @classmethod
    def from_state(cls, state: dict) -> "EGraph":
        g = cls()
        g._uf_parent = dict(state["uf_parent"])
        g._uf_size = dict(state["uf_size"])
        g.hashcons = {ENode(op, tuple(ch)): cid for (op, ch), cid in state["hashcons"].items()}
        for cid, c in state["classes"].items():
            ec = EClass(
                nodes={ENode(op, tuple(ch)) for op, ch in c["nodes"]},
                parents={(ENode(op, tuple(ch)), pid) for (op, ch), pid in c["parents"]},
                min_cost=c["min_cost"],
                height=c["height"],
                is_constant=c["is_constant"],
            )
            g.classes[cid] = ec
        g._next_id = state["next_id"]
        return g
