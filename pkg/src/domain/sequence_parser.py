"""Sequence expressions: tiny arithmetic language over the index n.

Pure Python, no framework dependencies.

Grammar (lowest to highest precedence):

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom (("^" | "**") unary)?
    atom   := NUMBER | "n" | FUNC "(" expr ")" | "(" expr ")"

FUNC is one of sqrt, log, floor, ceil. A bare preset name (see
SEQUENCE_PRESETS) is replaced by its expression before parsing.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple, Union

from src.domain.errors import SequenceSpecError

TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()])"
    r")"
)

FUNCTIONS: Dict[str, Callable[[float], float]] = {
    "sqrt": math.sqrt,
    "log": math.log,
    "floor": lambda v: float(math.floor(v)),
    "ceil": lambda v: float(math.ceil(v)),
}

# Named sequences used by the 0-1 law presets
SEQUENCE_PRESETS: Dict[str, str] = {
    "sqrt_nlogn": "floor(sqrt(n*log(n)))",
    "sqrtn_logn": "floor(sqrt(n)*log(n))",
    "two_sqrt_nlogn": "2*floor(sqrt(n*log(n)))",
    "linear": "n",
    "nlogn": "n*log(n)",
    "nlog2n": "n*log(n)^2",
    "floor_sqrt": "floor(sqrt(n))",
}


# ── AST ─────────────────────────────────────────────────────


@dataclass(frozen=True)
class Num:
    value: float

    def evaluate(self, n: int) -> float:
        return self.value


@dataclass(frozen=True)
class Var:
    def evaluate(self, n: int) -> float:
        return float(n)


@dataclass(frozen=True)
class Neg:
    operand: "Node"

    def evaluate(self, n: int) -> float:
        return -self.operand.evaluate(n)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"

    def evaluate(self, n: int) -> float:
        lhs = self.left.evaluate(n)
        rhs = self.right.evaluate(n)
        if self.op == "+":
            return lhs + rhs
        if self.op == "-":
            return lhs - rhs
        if self.op == "*":
            return lhs * rhs
        if self.op == "/":
            return lhs / rhs
        return math.pow(lhs, rhs)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"

    def evaluate(self, n: int) -> float:
        return FUNCTIONS[self.func](self.arg.evaluate(n))


Node = Union[Num, Var, Neg, BinOp, Call]


def _depends_on_n(node: Node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, Num):
        return False
    if isinstance(node, Neg):
        return _depends_on_n(node.operand)
    if isinstance(node, Call):
        return _depends_on_n(node.arg)
    return _depends_on_n(node.left) or _depends_on_n(node.right)


# ── Parser ──────────────────────────────────────────────────


def tokenize(text: str) -> List[Tuple[str, str]]:
    """Split an expression into (kind, value) tokens."""
    tokens: List[Tuple[str, str]] = []
    pos = 0
    stripped = text.rstrip()
    while pos < len(stripped):
        m = TOKEN_RE.match(stripped, pos)
        if not m or m.end() == pos:
            raise SequenceSpecError(f"unexpected character at {pos} in {text!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    def _peek(self) -> Optional[Tuple[str, str]]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _take(self) -> Tuple[str, str]:
        tok = self._peek()
        if tok is None:
            raise SequenceSpecError(f"unexpected end of expression {self.text!r}")
        self.pos += 1
        return tok

    def _expect(self, value: str):
        kind, got = self._take()
        if got != value:
            raise SequenceSpecError(f"expected {value!r}, got {got!r} in {self.text!r}")

    def parse(self) -> Node:
        if not self.tokens:
            raise SequenceSpecError("empty expression")
        node = self._expr()
        if self._peek() is not None:
            raise SequenceSpecError(
                f"trailing input {self._peek()[1]!r} in {self.text!r}"
            )
        return node

    def _expr(self) -> Node:
        node = self._term()
        while self._peek() and self._peek()[1] in ("+", "-"):
            op = self._take()[1]
            node = BinOp(op, node, self._term())
        return node

    def _term(self) -> Node:
        node = self._unary()
        while self._peek() and self._peek()[1] in ("*", "/"):
            op = self._take()[1]
            node = BinOp(op, node, self._unary())
        return node

    def _unary(self) -> Node:
        tok = self._peek()
        if tok and tok[1] in ("+", "-"):
            self._take()
            operand = self._unary()
            return Neg(operand) if tok[1] == "-" else operand
        return self._power()

    def _power(self) -> Node:
        base = self._atom()
        tok = self._peek()
        if tok and tok[1] in ("^", "**"):
            self._take()
            return BinOp("^", base, self._unary())
        return base

    def _atom(self) -> Node:
        kind, value = self._take()
        if kind == "number":
            return Num(float(value))
        if kind == "name":
            if value == "n":
                return Var()
            if value not in FUNCTIONS:
                raise SequenceSpecError(f"unknown function {value!r} in {self.text!r}")
            self._expect("(")
            arg = self._expr()
            self._expect(")")
            return Call(value, arg)
        if value == "(":
            node = self._expr()
            self._expect(")")
            return node
        raise SequenceSpecError(f"unexpected token {value!r} in {self.text!r}")


# ── Public API ──────────────────────────────────────────────


@dataclass(frozen=True)
class SequenceSpec:
    """A parsed sequence n -> value."""

    text: str
    node: Node
    preset: Optional[str] = None

    @property
    def is_constant(self) -> bool:
        return not _depends_on_n(self.node)

    def evaluate(self, n: int) -> float:
        try:
            value = self.node.evaluate(n)
        except (ValueError, ZeroDivisionError, OverflowError) as e:
            raise SequenceSpecError(f"{self.text!r} cannot be evaluated at n={n}: {e}") from e
        if math.isnan(value):
            raise SequenceSpecError(f"{self.text!r} is NaN at n={n}")
        return value

    def positive(self, n: int) -> float:
        """Evaluate and require a positive real."""
        value = self.evaluate(n)
        if not value > 0:
            raise SequenceSpecError(f"{self.text!r} must be positive, got {value} at n={n}")
        return value

    def __str__(self) -> str:
        return self.text


def parse_sequence(text: str) -> SequenceSpec:
    """Parse an expression (or a preset name) into a SequenceSpec."""
    if not isinstance(text, str):
        text = str(text)
    key = text.strip()
    if key in SEQUENCE_PRESETS:
        expression = SEQUENCE_PRESETS[key]
        return SequenceSpec(text=expression, node=_Parser(expression).parse(), preset=key)
    return SequenceSpec(text=key, node=_Parser(key).parse())
