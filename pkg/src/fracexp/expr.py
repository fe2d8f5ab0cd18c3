"""Small arithmetic expression language for CLI inputs.

Grammar (``^`` binds tightest and is right associative)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom (('^' | '**') unary)?
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Names are the allowed variables (``t``, and ``x`` where permitted) and the
constants ``pi`` and ``e``. Functions are ``exp`` and ``gamma``; ``gamma``
only accepts constant arguments. Errors report the character offset.
The parse tree is built as a sympy expression, which supplies exact
derivatives of every order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

from .errors import InputFormatError

__all__ = ["Expression", "parse"]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*/^()]))"
)
_CONSTANTS = {"pi": sp.pi, "e": sp.E}
_FUNCTIONS = {"exp", "gamma"}


class _Parser:
    def __init__(self, text: str, variables: tuple[str, ...]):
        self.text = text
        self.symbols = {v: sp.Symbol(v, real=True) for v in variables}
        self.tokens = self._lex(text)
        self.i = 0

    @staticmethod
    def _lex(text):
        out, pos = [], 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                start = pos + len(text[pos:]) - len(text[pos:].lstrip())
                raise InputFormatError(f"unexpected character {text[start]!r} at position {start}", start)
            kind = m.lastgroup
            out.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        out.append(("end", "", len(text)))
        return out

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        where = "end of input" if tok[0] == "end" else repr(tok[1])
        raise InputFormatError(f"{msg} at position {tok[2]} (found {where})", tok[2])

    def expect(self, op):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != op:
            self.fail(f"expected {op!r}")
        return self.take()

    def parse(self):
        if self.peek()[0] == "end":
            self.fail("empty expression")
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail("unexpected token")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            if op[1] == "/":
                if rhs.is_zero:
                    self.fail("division by zero", op)
                node = node / rhs
            else:
                node = node * rhs
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            inner = self.unary()
            return -inner if tok[1] == "-" else inner
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("^", "**"):
            self.take()
            return base ** self.unary()
        return base

    def atom(self):
        tok = self.take()
        kind, val, pos = tok
        if kind == "num":
            return sp.Rational(val) if re.fullmatch(r"\d+", val) else sp.Float(val, 17)
        if kind == "name":
            if val in _FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                if val == "exp":
                    return sp.exp(arg)
                if arg.free_symbols:
                    raise InputFormatError(f"gamma at position {pos} only accepts a constant argument", pos)
                if arg.is_integer and arg <= 0:
                    raise InputFormatError(f"gamma at position {pos} evaluated at a pole", pos)
                return sp.gamma(arg)
            if val in self.symbols:
                return self.symbols[val]
            if val in _CONSTANTS:
                return _CONSTANTS[val]
            raise InputFormatError(f"unknown name {val!r} at position {pos}", pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        self.fail("expected a number, name or '('", tok)


@dataclass(frozen=True)
class Expression:
    """Parsed expression; callable on floats or numpy arrays."""

    text: str
    tree: sp.Expr
    variables: tuple[str, ...]

    def __call__(self, *args):
        return _compile(self.tree, self.variables)(*args)

    def derivative(self, k: int, var: str = "t") -> Expression:
        return Expression(f"d^{k}/d{var}^{k}({self.text})", sp.diff(self.tree, sp.Symbol(var, real=True), k), self.variables)

    @property
    def free(self) -> set[str]:
        return {s.name for s in self.tree.free_symbols}


@lru_cache(maxsize=512)
def _compile(tree, variables):
    syms = [sp.Symbol(v, real=True) for v in variables]
    fn = sp.lambdify(syms, tree, modules="numpy")

    def call(*args):
        args = [np.asarray(a, dtype=float) for a in args]
        out = fn(*args)
        shape = np.broadcast(*args).shape if args else ()
        out = np.broadcast_to(np.asarray(out, dtype=float), shape)
        return float(out) if out.ndim == 0 else out.copy()

    return call


def parse(text: str, variables: tuple[str, ...] = ("t",)) -> Expression:
    """Parse ``text`` allowing the given variable names."""
    if not isinstance(text, str):
        raise InputFormatError("expression must be a string")
    return Expression(text, _Parser(text, tuple(variables)).parse(), tuple(variables))
