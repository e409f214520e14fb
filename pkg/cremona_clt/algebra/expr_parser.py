"""Recursive-descent parser for polynomial and rational-function expressions.

Grammar (``^`` and ``**`` both mean power, juxtaposition means product)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/')? unary)*
    unary  := ('+' | '-') unary | power
    power  := atom (('^' | '**') INT)?
    atom   := NUMBER | NAME | '(' expr ')'

Expressions evaluate to a numerator/denominator pair of ``SparsePoly``; the
helpers below check that the result has the shape the caller needs.
"""

import re
from fractions import Fraction

from ..errors import ParseError
from .exactpoly import SparsePoly, VARIABLES

AFFINE_NAMES = ("x", "y")

_TOKEN = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*/^()]))"
)


def tokenize(text):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text, names):
        self.text = text
        self.names = names
        self.nvars = len(names)
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def error(self, message):
        raise ParseError(message, self.text, self.peek()[2])

    def parse(self):
        if not self.tokens:
            raise ParseError("empty expression", self.text, 0)
        value = self.expr()
        if self.i != len(self.tokens):
            self.error(f"unexpected token {self.peek()[1]!r}")
        return value

    def expr(self):
        num, den = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            n2, d2 = self.term()
            if op == "-":
                n2 = -n2
            if d2 == den:
                num = num + n2
            else:
                num, den = num * d2 + n2 * den, den * d2
        return num, den

    def term(self):
        num, den = self.unary()
        while True:
            kind, value, _ = self.peek()
            if value in ("*", "/"):
                self.take()
                n2, d2 = self.unary()
                if value == "*":
                    num, den = num * n2, den * d2
                else:
                    if n2.is_zero():
                        self.error("division by zero")
                    num, den = num * d2, den * n2
            elif kind in ("number", "name") or value == "(":
                n2, d2 = self.unary()
                num, den = num * n2, den * d2
            else:
                return num, den

    def unary(self):
        value = self.peek()[1]
        if value in ("+", "-"):
            self.take()
            num, den = self.unary()
            return (-num if value == "-" else num), den
        return self.power()

    def power(self):
        num, den = self.atom()
        if self.peek()[1] in ("^", "**"):
            self.take()
            kind, value, _ = self.peek()
            if kind != "number" or "." in value:
                self.error("exponent must be a nonnegative integer")
            self.take()
            n = int(value)
            return num**n, den**n
        return num, den

    def atom(self):
        kind, value, pos = self.take()
        one = SparsePoly.constant(1, self.nvars)
        if kind == "number":
            return SparsePoly.constant(Fraction(value), self.nvars), one
        if kind == "name":
            if value not in self.names:
                raise ParseError(
                    f"unknown variable {value!r}; expected one of {', '.join(self.names)}",
                    self.text,
                    pos,
                )
            return SparsePoly.variable(self.names.index(value), self.nvars), one
        if value == "(":
            inner = self.expr()
            if self.peek()[1] != ")":
                self.error("missing ')'")
            self.take()
            return inner
        if value is None:
            raise ParseError("unexpected end of expression", self.text, pos)
        raise ParseError(f"unexpected token {value!r}", self.text, pos)


def parse_rational(text, names=AFFINE_NAMES):
    """Parse ``text`` into ``(numerator, denominator)`` SparsePolys."""
    num, den = _Parser(text, names).parse()
    if den.is_constant():
        c = den.constant_value()
        return num.scale(1 / c), SparsePoly.constant(1, len(names))
    return num, den


def parse_polynomial(text, names=AFFINE_NAMES):
    num, den = parse_rational(text, names)
    if not den.is_constant():
        raise ParseError(f"expected a polynomial, got a rational function: {text!r}", text)
    return num


def parse_hompoly(text):
    """Parse a homogeneous polynomial in X, Y, Z; rational coefficients are cleared."""
    poly = parse_polynomial(text, VARIABLES)
    if not poly.is_homogeneous():
        raise ParseError(f"polynomial is not homogeneous: {text!r}", text)
    return poly.to_hompoly()


def split_map_text(text):
    """Split ``[P0 : P1 : P2]`` (brackets optional, ``;`` also accepted) into three strings."""
    body = text.strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1]
    separator = ";" if ";" in body else ":"
    parts = [p.strip() for p in body.split(separator)]
    if len(parts) != 3 or not all(parts):
        raise ParseError(f"a map needs three ':'-separated components: {text!r}", text)
    return parts
