"""Closed-form scalar expressions of the coordinates.

Grammar (loosest to tightest binding)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" exponent)?
    atom   := NUMBER | NAME | FUNC "(" expr ")" | "(" expr ")"

Exponents must be literal: ``x^2``, ``x^-1``, ``x^0.5`` or ``x^(1/3)``.
A general power ``f^g`` is written ``exp(g*log(f))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import DomainError, ExprSyntaxError, UnknownVariableError

__all__ = [
    "Expr", "Num", "Var", "Const", "Neg", "BinOp", "Pow", "Call",
    "FUNCTIONS", "CONSTANTS", "parse", "validate", "variables",
    "to_text", "evaluate", "substitute", "DENOMINATOR_FLOOR",
]

FUNCTIONS = ("exp", "log", "sin", "cos", "tan", "sinh", "cosh", "tanh", "sqrt")
CONSTANTS = {"pi": math.pi}

# |denominator| below this at a sample point is a domain error
DENOMINATOR_FLOOR = 1e-300


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: Fraction


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Const, Neg, BinOp, Pow, Call]


# --------------------------------------------------------------------------
# Tokenizer
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "name", "op", "end"
    text: str
    offset: int  # byte offset into the UTF-8 source


def _byte_offset(text: str, idx: int) -> int:
    return len(text[:idx].encode("utf-8"))


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        start = i
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            while i < n and text[i].isdigit():
                i += 1
            if i < n and text[i] == ".":
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
            if i < n and text[i] in "eE":
                j = i + 1
                if j < n and text[j] in "+-":
                    j += 1
                if j < n and text[j].isdigit():
                    i = j
                    while i < n and text[i].isdigit():
                        i += 1
            tokens.append(_Token("num", text[start:i], _byte_offset(text, start)))
            continue
        if c.isascii() and (c.isalpha() or c == "_"):
            while i < n and text[i].isascii() and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(_Token("name", text[start:i], _byte_offset(text, start)))
            continue
        if c in "+-*/^()":
            tokens.append(_Token("op", c, _byte_offset(text, start)))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {c!r}", _byte_offset(text, i), text)
    tokens.append(_Token("end", "", _byte_offset(text, n)))
    return tokens


# --------------------------------------------------------------------------
# Recursive-descent parser
# --------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ExprSyntaxError(message, tok.offset, self.text)

    def expect(self, text):
        tok = self.peek()
        if tok.kind != "op" or tok.text != text:
            if text == ")":
                raise self.error("unbalanced parentheses: expected ')'")
            raise self.error(f"expected {text!r}")
        return self.advance()

    def parse(self) -> Expr:
        if self.peek().kind == "end":
            raise self.error("empty input")
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            if tok.text == ")":
                raise self.error("unbalanced parentheses: unexpected ')'")
            if tok.text == "^":
                raise self.error("non-literal exponent (chained '^')")
            raise self.error(f"unexpected token {tok.text!r}")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            base = Pow(base, self.exponent())
            if self.peek().kind == "op" and self.peek().text == "^":
                raise self.error("non-literal exponent (chained '^')")
        return base

    def _signed_number(self) -> Fraction:
        sign = 1
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            sign = -1
        tok = self.peek()
        if tok.kind != "num":
            raise self.error("non-literal exponent", tok)
        self.advance()
        return sign * Fraction(tok.text)

    def exponent(self) -> Fraction:
        start = self.peek()
        if start.kind == "op" and start.text == "(":
            self.advance()
            try:
                value = self._signed_number()
                if self.peek().kind == "op" and self.peek().text == "/":
                    self.advance()
                    den = self._signed_number()
                    if den == 0:
                        raise self.error("zero denominator in exponent")
                    value = value / den
                if self.peek().kind != "op" or self.peek().text != ")":
                    raise self.error("non-literal exponent", start)
            except ExprSyntaxError as exc:
                if "exponent" in str(exc):
                    raise ExprSyntaxError("non-literal exponent", start.offset, self.text) from None
                raise
            self.advance()
            return value
        return self._signed_number()

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.advance()
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "(":
                if tok.text not in FUNCTIONS:
                    raise self.error(f"unknown function {tok.text!r}", tok)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text in CONSTANTS:
                return Const(tok.text)
            return Var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected token {tok.text!r}")


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises :class:`ExprSyntaxError` carrying the byte offset of the problem.
    """
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# Tree utilities
# --------------------------------------------------------------------------

def variables(expr: Expr) -> set[str]:
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, (Num, Const)):
        return set()
    if isinstance(expr, Neg):
        return variables(expr.operand)
    if isinstance(expr, BinOp):
        return variables(expr.left) | variables(expr.right)
    if isinstance(expr, Pow):
        return variables(expr.base)
    if isinstance(expr, Call):
        return variables(expr.arg)
    raise TypeError(f"not an expression node: {expr!r}")


def validate(expr: Expr, coords: Iterable[str]) -> None:
    """Raise :class:`UnknownVariableError` for the first variable not in ``coords``."""
    allowed = set(coords)
    for name in sorted(variables(expr)):
        if name not in allowed:
            raise UnknownVariableError(name)


def substitute(expr: Expr, mapping: Mapping[str, "Expr | float"]) -> Expr:
    """Replace variables by expressions (or numbers)."""
    if isinstance(expr, Var):
        if expr.name in mapping:
            rep = mapping[expr.name]
            return Num(float(rep)) if isinstance(rep, (int, float)) else rep
        return expr
    if isinstance(expr, (Num, Const)):
        return expr
    if isinstance(expr, Neg):
        return Neg(substitute(expr.operand, mapping))
    if isinstance(expr, BinOp):
        return BinOp(expr.op, substitute(expr.left, mapping), substitute(expr.right, mapping))
    if isinstance(expr, Pow):
        return Pow(substitute(expr.base, mapping), expr.exponent)
    if isinstance(expr, Call):
        return Call(expr.func, substitute(expr.arg, mapping))
    raise TypeError(f"not an expression node: {expr!r}")


_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(expr: Expr) -> int:
    if isinstance(expr, BinOp):
        return _PREC_ADD if expr.op in "+-" else _PREC_MUL
    if isinstance(expr, Neg):
        return _PREC_NEG
    if isinstance(expr, Pow):
        return _PREC_POW
    return _PREC_ATOM


def _format_exponent(p: Fraction) -> str:
    if p.denominator == 1:
        return str(p.numerator) if p >= 0 else f"({p.numerator})"
    return f"({p.numerator}/{p.denominator})"


def to_text(expr: Expr) -> str:
    """Pretty-print with the minimal parentheses that reparse to the same tree."""

    def wrap(child, min_prec):
        s = to_text(child)
        return f"({s})" if _prec(child) < min_prec else s

    if isinstance(expr, Num):
        return repr(float(expr.value))
    if isinstance(expr, (Var, Const)):
        return expr.name
    if isinstance(expr, Call):
        return f"{expr.func}({to_text(expr.arg)})"
    if isinstance(expr, Neg):
        return "-" + wrap(expr.operand, _PREC_NEG)
    if isinstance(expr, Pow):
        return f"{wrap(expr.base, _PREC_ATOM)}^{_format_exponent(expr.exponent)}"
    if isinstance(expr, BinOp):
        p = _prec(expr)
        # left-associative: the right operand of the same level needs parens
        return f"{wrap(expr.left, p)} {expr.op} {wrap(expr.right, p + 1)}"
    raise TypeError(f"not an expression node: {expr!r}")


# --------------------------------------------------------------------------
# Direct (order-0) evaluation
# --------------------------------------------------------------------------

def _real_power(x: float, p: Fraction, node, point) -> float:
    if p.denominator == 1:
        if p < 0 and abs(x) < DENOMINATOR_FLOOR:
            raise DomainError("negative power of zero", to_text(node), point)
        return x ** int(p)
    if x < 0 or (x == 0 and p < 0):
        raise DomainError("fractional power of non-positive base", to_text(node), point)
    return x ** float(p)


def evaluate(expr: Expr, env: Mapping[str, float], point=None) -> float:
    """Evaluate ``expr`` with plain floats; ``env`` maps variable names to values."""
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        try:
            return float(env[expr.name])
        except KeyError:
            raise UnknownVariableError(expr.name) from None
    if isinstance(expr, Const):
        return CONSTANTS[expr.name]
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, env, point)
    if isinstance(expr, BinOp):
        a = evaluate(expr.left, env, point)
        b = evaluate(expr.right, env, point)
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        if abs(b) < DENOMINATOR_FLOOR:
            raise DomainError("division by (near) zero", to_text(expr), point)
        return a / b
    if isinstance(expr, Pow):
        return _real_power(evaluate(expr.base, env, point), expr.exponent, expr, point)
    if isinstance(expr, Call):
        x = evaluate(expr.arg, env, point)
        f = expr.func
        if f == "log":
            if x <= 0:
                raise DomainError("log of non-positive value", to_text(expr), point)
            return math.log(x)
        if f == "sqrt":
            if x < 0:
                raise DomainError("sqrt of negative value", to_text(expr), point)
            return math.sqrt(x)
        if f == "tan" and abs(math.cos(x)) < DENOMINATOR_FLOOR:
            raise DomainError("tan at a pole", to_text(expr), point)
        return getattr(math, f)(x)
    raise TypeError(f"not an expression node: {expr!r}")
