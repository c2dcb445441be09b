"""Parenthesized expression language for VSA computations over named symbols.

Grammar (whitespace-insensitive, left-associative at every level):

    expr    :=  term ('+' term)*                 bundling
    term    :=  factor (('*' | '/') factor)*     binding / unbinding
    factor  :=  atom ('^' number)*               fractional power
    atom    :=  IDENT
             |  'rho' '(' expr ',' integer ')'   circular shift
             |  'cleanup' '(' expr ')'           clean-up memory
             |  '(' expr ')'

Powers bind tighter than '*'/'/' which bind tighter than '+'.  Numbers may
carry a leading sign (X ^ -0.65).  `rho` and `cleanup` are reserved words.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (at position {position})")


# ---- AST ------------------------------------------------------------------


@dataclass(frozen=True)
class Symbol:
    name: str


@dataclass(frozen=True)
class Bind:
    left: object
    right: object


@dataclass(frozen=True)
class Unbind:
    left: object
    right: object


@dataclass(frozen=True)
class Bundle:
    left: object
    right: object


@dataclass(frozen=True)
class Permute:
    child: object
    shift: int


@dataclass(frozen=True)
class Power:
    child: object
    alpha: float


@dataclass(frozen=True)
class Cleanup:
    child: object


RESERVED = {"rho", "cleanup"}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[*/+^(),-]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(text) - len(stripped)
            raise ParseError(f"unexpected character {text[bad_at]!r}", bad_at)
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("ident") is not None:
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.peek()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}, found {val or 'end of input'!r}", pos)
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[:2] == ("op", "+"):
            self.advance()
            node = Bundle(node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op = self.advance()[1]
            rhs = self.factor()
            node = Bind(node, rhs) if op == "*" else Unbind(node, rhs)
        return node

    def factor(self):
        node = self.atom()
        while self.peek()[:2] == ("op", "^"):
            self.advance()
            node = Power(node, self.signed_number())
        return node

    def signed_number(self) -> float:
        sign = 1.0
        kind, val, pos = self.peek()
        if kind == "op" and val in ("-", "+"):
            self.advance()
            sign = -1.0 if val == "-" else 1.0
            kind, val, pos = self.peek()
        if kind != "num":
            raise ParseError(f"expected a number, found {val or 'end of input'!r}", pos)
        self.advance()
        return sign * float(val)

    def signed_int(self) -> int:
        kind, val, pos = self.peek()
        value = self.signed_number()
        if value != int(value):
            raise ParseError("shift must be an integer", pos)
        return int(value)

    def atom(self):
        kind, val, pos = self.advance()
        if kind == "ident":
            if val == "rho":
                self.expect_op("(")
                child = self.expr()
                self.expect_op(",")
                shift = self.signed_int()
                self.expect_op(")")
                return Permute(child, shift)
            if val == "cleanup":
                self.expect_op("(")
                child = self.expr()
                self.expect_op(")")
                return Cleanup(child)
            return Symbol(val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(f"expected a symbol or '(', found {val or 'end of input'!r}", pos)


def parse_expression(text: str):
    """Parse the expression text into an AST; raises ParseError with position."""
    if not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text).parse()


def expression_symbols(node) -> list[str]:
    """Symbol names referenced by the expression, in first-use order."""
    out: list[str] = []

    def walk(n):
        if isinstance(n, Symbol):
            if n.name not in out:
                out.append(n.name)
        elif isinstance(n, (Bind, Unbind, Bundle)):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, (Permute, Power, Cleanup)):
            walk(n.child)

    walk(node)
    return out
