"""Expression and pattern syntax: AST, tokenizer, parsers, rendering.

The grammar (EBNF, shared by expressions and patterns):

    expr    := term   (("+" | "-") term)*
    term    := factor (("*" | "/") factor)*
    factor  := unary  (("^" | "|**|") unary)*
    unary   := "-" unary | atom
    atom    := NUMBER | LEAF | FUNC "(" expr ")" | "(" expr ")"
    LEAF    := "x" INT | "t" INT | "p" INT | "v" INT      -- v only in patterns
    FUNC    := "sin" | "cos" | "exp" | "log" | "sqrt" | "abs"

All binary operators are left-associative; unary functions bind tightest,
then power, then "*"/"/", then "+"/"-".
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

UNARY_OPS = ("sin", "cos", "exp", "log", "sqrt", "abs")
BINARY_OPS = ("+", "-", "*", "/", "^", "|**|")

LEAF_WEIGHT = 1
BINARY_WEIGHT = 2
UNARY_WEIGHT = 3


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Param:
    index: int


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Unary:
    op: str
    child: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class PatVar:
    """Pattern variable; matches any e-class. Repeated indices bind alike."""

    index: int


Expr = Union[Var, Param, Const, Unary, Binary]
Pattern = Union[Var, Param, Const, Unary, Binary, PatVar]
Node = Pattern


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.message = message
        self.position = position


def size_of(node: Node) -> int:
    """Total node count; a pattern variable counts as one node."""
    if isinstance(node, Unary):
        return 1 + size_of(node.child)
    if isinstance(node, Binary):
        return 1 + size_of(node.left) + size_of(node.right)
    return 1


def cost_of(node: Node) -> int:
    """Weighted cost: 1 per leaf, 2 per binary operator, 3 per unary."""
    if isinstance(node, Unary):
        return UNARY_WEIGHT + cost_of(node.child)
    if isinstance(node, Binary):
        return BINARY_WEIGHT + cost_of(node.left) + cost_of(node.right)
    return LEAF_WEIGHT


def pattern_vars(node: Node) -> set[int]:
    if isinstance(node, PatVar):
        return {node.index}
    if isinstance(node, Unary):
        return pattern_vars(node.child)
    if isinstance(node, Binary):
        return pattern_vars(node.left) | pattern_vars(node.right)
    return set()


def param_indices(node: Node) -> set[int]:
    if isinstance(node, Param):
        return {node.index}
    if isinstance(node, Unary):
        return param_indices(node.child)
    if isinstance(node, Binary):
        return param_indices(node.left) | param_indices(node.right)
    return set()


def is_expr(node: Node) -> bool:
    """A pattern with no pattern variables is an expression."""
    return not pattern_vars(node)


def _fmt(value: float) -> str:
    return repr(float(value))


def render(node: Node, params: Optional[Sequence[float]] = None) -> str:
    """Fully parenthesized infix form; reparses to a structurally equal tree.

    When ``params`` is given, parameter leaves are substituted by value.
    """
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Param):
        if params is not None:
            return _fmt(params[node.index])
        return f"t{node.index}"
    if isinstance(node, Const):
        return _fmt(node.value)
    if isinstance(node, PatVar):
        return f"v{node.index}"
    if isinstance(node, Unary):
        return f"{node.op}({render(node.child, params)})"
    if isinstance(node, Binary):
        return f"({render(node.left, params)} {node.op} {render(node.right, params)})"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Tokenizer


@dataclass(frozen=True)
class _Token:
    kind: str  # NUM | IDENT | OP | LPAREN | RPAREN | END
    text: str
    pos: int


_TOKEN_RE = re.compile(
    r"""
    (?P<SPACE>\s+)
  | (?P<NUM>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<PPOW>\|\*\*\|)
  | (?P<OP>[+\-*/^])
  | (?P<LPAREN>\()
  | (?P<RPAREN>\))
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "SPACE":
            tok_text = m.group()
            if kind == "PPOW":
                kind, tok_text = "OP", "|**|"
            tokens.append(_Token(kind, tok_text, pos))
        pos = m.end()
    tokens.append(_Token("END", "", len(text)))
    return tokens


# ---------------------------------------------------------------------------
# Dialects


@dataclass(frozen=True)
class Dialect:
    """Parser configuration for one tool's text format.

    ``param_prefixes`` name the leaf prefixes read as adjustable parameters,
    ``var_prefixes`` the ones read as variables; ``one_based_vars`` shifts
    variable indices down by one (tools that print X1..Xn).
    """

    name: str
    param_prefixes: tuple[str, ...] = ("t", "p")
    var_prefixes: tuple[str, ...] = ("x",)
    one_based_vars: bool = False
    inline_literals: bool = False


_DIALECTS: dict[str, Dialect] = {}
_EXTENSION_MAP: dict[str, str] = {}


def register_dialect(dialect: Dialect, extensions: Sequence[str] = ()) -> None:
    _DIALECTS[dialect.name] = dialect
    for ext in extensions:
        _EXTENSION_MAP[ext.lstrip(".").lower()] = dialect.name


def get_dialect(name: str) -> Dialect:
    try:
        return _DIALECTS[name]
    except KeyError:
        raise ValueError(f"unknown dialect {name!r}; registered: {sorted(_DIALECTS)}")


def dialect_for_extension(ext: str) -> Optional[str]:
    return _EXTENSION_MAP.get(ext.lstrip(".").lower())


# The generic CSV-infix dialect is the normative one; `operon` is the
# reference inline-literal dialect (caret power, named functions, variables
# printed one-based as X1..Xn).  The remaining tool names are registered as
# aliases of the closest reference grammar and are extension points: replace
# them with a bespoke Dialect (or parser) if a tool's output diverges.
register_dialect(Dialect("generic"), extensions=["csv"])
register_dialect(
    Dialect("operon", var_prefixes=("x", "X"), one_based_vars=False, inline_literals=True),
    extensions=["operon"],
)
register_dialect(Dialect("pysr", inline_literals=True), extensions=["pysr"])
for _name in ("heuristiclab", "tir", "itea", "bingo", "gomea", "sbp", "eplex", "feat"):
    register_dialect(Dialect(_name, inline_literals=True), extensions=[_name])
register_dialect(Dialect("hl", inline_literals=True), extensions=["hl"])


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, tokens: list[_Token], dialect: Dialect, allow_patterns: bool):
        self.tokens = tokens
        self.i = 0
        self.dialect = dialect
        self.allow_patterns = allow_patterns

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, text: Optional[str] = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise ExprSyntaxError(f"expected {want!r}, found {tok.text or 'end of input'!r}", tok.pos)
        return self.next()

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "END":
            raise ExprSyntaxError(f"unexpected trailing input {tok.text!r}", tok.pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind == "OP" and self.peek().text in ("+", "-"):
            op = self.next().text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek().kind == "OP" and self.peek().text in ("*", "/"):
            op = self.next().text
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Node:
        node = self.unary()
        while self.peek().kind == "OP" and self.peek().text in ("^", "|**|"):
            op = self.next().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        tok = self.peek()
        if tok.kind == "OP" and tok.text == "-":
            self.next()
            operand = self.unary()
            if isinstance(operand, Const):
                return Const(-operand.value)
            return Binary("-", Const(0.0), operand)
        return self.atom()

    def atom(self) -> Node:
        tok = self.next()
        if tok.kind == "NUM":
            return Const(float(tok.text))
        if tok.kind == "LPAREN":
            node = self.expr()
            self.expect("RPAREN")
            return node
        if tok.kind == "IDENT":
            return self.ident(tok)
        raise ExprSyntaxError(f"expected an expression, found {tok.text or 'end of input'!r}", tok.pos)

    def ident(self, tok: _Token) -> Node:
        name = tok.text
        if name in UNARY_OPS:
            self.expect("LPAREN")
            child = self.expr()
            self.expect("RPAREN")
            return Unary(name, child)
        leaf = self.leaf(name, tok.pos)
        if leaf is not None:
            return leaf
        raise ExprSyntaxError(f"unknown symbol {name!r}", tok.pos)

    def leaf(self, name: str, pos: int) -> Optional[Node]:
        m = re.fullmatch(r"([A-Za-z_]+)(\d+)", name)
        if m is None:
            return None
        prefix, idx = m.group(1), int(m.group(2))
        if prefix in self.dialect.var_prefixes:
            if self.dialect.one_based_vars or prefix.isupper():
                if idx == 0:
                    raise ExprSyntaxError(f"variable {name!r} is one-based", pos)
                idx -= 1
            return Var(idx)
        if prefix in self.dialect.param_prefixes:
            return Param(idx)
        if prefix == "v":
            if not self.allow_patterns:
                raise ExprSyntaxError(f"pattern variable {name!r} not allowed here", pos)
            return PatVar(idx)
        return None


def _extract_literals(node: Node, values: list[float]) -> Node:
    """Replace each numeric literal by a fresh parameter, in encounter order."""
    if isinstance(node, Const):
        values.append(node.value)
        return Param(len(values) - 1)
    if isinstance(node, Unary):
        return Unary(node.op, _extract_literals(node.child, values))
    if isinstance(node, Binary):
        left = _extract_literals(node.left, values)
        right = _extract_literals(node.right, values)
        return Binary(node.op, left, right)
    return node


def _renumber_params(node: Node, counter: list[int]) -> Node:
    if isinstance(node, Param):
        counter[0] += 1
        return Param(counter[0] - 1)
    if isinstance(node, Unary):
        return Unary(node.op, _renumber_params(node.child, counter))
    if isinstance(node, Binary):
        left = _renumber_params(node.left, counter)
        right = _renumber_params(node.right, counter)
        return Binary(node.op, left, right)
    return node


def fresh_parameters(node: Node) -> Node:
    """Re-number every parameter occurrence to a fresh index (encounter order)."""
    return _renumber_params(node, [0])


def normalize_params(node: Node) -> tuple[Node, list[int]]:
    """Re-index parameters densely (keeping sharing); returns the old indices."""
    order: list[int] = []
    mapping: dict[int, int] = {}

    def walk(n: Node) -> Node:
        if isinstance(n, Param):
            if n.index not in mapping:
                mapping[n.index] = len(mapping)
                order.append(n.index)
            return Param(mapping[n.index])
        if isinstance(n, Unary):
            return Unary(n.op, walk(n.child))
        if isinstance(n, Binary):
            return Binary(n.op, walk(n.left), walk(n.right))
        return n

    return walk(node), order


def parse_expression(
    text: str,
    dialect: str = "generic",
    extract_literals: bool = False,
    values: Optional[Sequence[float]] = None,
    fresh_params: bool = False,
) -> tuple[Expr, list[float]]:
    """Parse an expression, returning the tree and its parameter initial values.

    With ``extract_literals`` every numeric literal becomes a parameter in
    encounter order and its value is returned; otherwise the t/p indices in
    the text bind to ``values`` (repeated indices share one parameter unless
    ``fresh_params`` re-numbers every occurrence).
    """
    if not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    d = get_dialect(dialect)
    tree = _Parser(_tokenize(text), d, allow_patterns=False).parse()
    if fresh_params:
        tree = fresh_parameters(tree)
    if extract_literals or d.inline_literals:
        extracted: list[float] = []
        tree = _extract_literals(tree, extracted)
        return tree, extracted
    n = max(param_indices(tree), default=-1) + 1
    if values is not None:
        theta = [float(values[i]) if i < len(values) else 0.0 for i in range(n)]
    else:
        theta = [0.0] * n
    return tree, theta


def parse_pattern(text: str, dialect: str = "generic") -> Pattern:
    """Parse a pattern; ``v<i>`` leaves are pattern variables."""
    if not text.strip():
        raise ExprSyntaxError("empty pattern", 0)
    d = get_dialect(dialect)
    return _Parser(_tokenize(text), d, allow_patterns=True).parse()
