"""Series expressions: rational functions of ``t`` evaluated as truncated series.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/' | <juxtaposition>) unary)*
    unary  := '-' unary | power
    power  := atom ('^' INT)?
    atom   := INT | 't' | '(' expr ')' | '[' coeff (',' coeff)* ']'
            | '@' NAME | NAME '(' arg (',' arg)* ')'

``[c0, c1, ...]`` lists coefficients from degree 0, ``@name`` refers to a
series supplied by the caller, and ``NAME(...)`` calls a builtin.  Builtins
receive their raw argument strings, so they may take integers, group labels
or nested expressions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Optional

from .series import (
    DEFAULT_TRUNCATION,
    GroupDescriptor,
    SeriesError,
    TruncatedSeries,
    classifying_series,
    finite_geometric,
    invariant_torus_series,
    projective_series,
)


class ExprError(ValueError):
    """Malformed expression; ``column`` is 1-based within the expression text."""

    def __init__(self, message: str, column: int):
        super().__init__(f"column {column}: {message}")
        self.message = message
        self.column = column


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<ref>@[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()\[\],:]))"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    column: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprError(f"unexpected character {text[col - 1]!r}", col)
        kind = m.lastgroup
        start = m.start(kind)
        out.append(Token(kind, m.group(kind), start + 1))
        pos = m.end()
    out.append(Token("end", "", len(text) + 1))
    return out


Builtin = Callable[[list[str], "Evaluator"], TruncatedSeries]


class Evaluator:
    """Recursive-descent evaluator at a fixed truncation order."""

    def __init__(
        self,
        truncation: int = DEFAULT_TRUNCATION,
        refs: Optional[Mapping[str, TruncatedSeries]] = None,
        builtins: Optional[Mapping[str, Builtin]] = None,
    ):
        self.truncation = truncation
        self.refs = dict(refs or {})
        self.builtins = dict(BUILTINS)
        if builtins:
            self.builtins.update(builtins)

    def evaluate(self, text: str) -> TruncatedSeries:
        self._text = text
        self._toks = tokenize(text)
        self._i = 0
        if self._peek().kind == "end":
            raise ExprError("empty expression", 1)
        value = self._expr()
        tok = self._peek()
        if tok.kind != "end":
            raise ExprError(f"unexpected {tok.text!r}", tok.column)
        return value

    # -- token helpers ------------------------------------------------

    def _peek(self) -> Token:
        return self._toks[self._i]

    def _next(self) -> Token:
        tok = self._toks[self._i]
        self._i += 1
        return tok

    def _expect(self, text: str) -> Token:
        tok = self._next()
        if tok.text != text:
            raise ExprError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.column)
        return tok

    def _const(self, c) -> TruncatedSeries:
        return TruncatedSeries.monomial(0, c, self.truncation)

    # -- grammar ------------------------------------------------------

    def _expr(self) -> TruncatedSeries:
        value = self._term()
        while self._peek().text in ("+", "-"):
            op = self._next().text
            rhs = self._term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def _starts_atom(self, tok: Token) -> bool:
        return tok.kind in ("num", "ref", "name") or tok.text in ("(", "[")

    def _term(self) -> TruncatedSeries:
        value = self._unary()
        while True:
            tok = self._peek()
            if tok.text == "*":
                self._next()
                value = value * self._unary()
            elif tok.text == "/":
                self._next()
                rhs = self._unary()
                if rhs[0] == 0:
                    raise ExprError("division by a series with zero constant term", tok.column)
                value = value / rhs
            elif self._starts_atom(tok):
                value = value * self._unary()
            else:
                return value

    def _unary(self) -> TruncatedSeries:
        if self._peek().text == "-":
            self._next()
            return -self._unary()
        return self._power()

    def _power(self) -> TruncatedSeries:
        tok = self._peek()
        if tok.text == "t":
            self._next()
            k = 1
            if self._peek().text == "^":
                self._next()
                k = self._int()
            return TruncatedSeries.monomial(k, 1, self.truncation) if k <= self.truncation else TruncatedSeries.zero(self.truncation)
        base = self._atom()
        if self._peek().text == "^":
            self._next()
            base = base ** self._int()
        return base

    def _int(self) -> int:
        tok = self._next()
        if tok.kind != "num" or "/" in tok.text:
            raise ExprError("expected a nonnegative integer exponent", tok.column)
        return int(tok.text)

    def _atom(self) -> TruncatedSeries:
        tok = self._next()
        if tok.kind == "num":
            return self._const(Fraction(tok.text))
        if tok.kind == "ref":
            name = tok.text[1:]
            if name not in self.refs:
                raise ExprError(f"unresolved reference @{name}", tok.column)
            s = self.refs[name]
            if s.truncation < self.truncation:
                raise ExprError(f"@{name} is known only to t^{s.truncation}", tok.column)
            return s.truncate(self.truncation)
        if tok.text == "(":
            value = self._expr()
            self._expect(")")
            return value
        if tok.text == "[":
            coeffs = []
            while True:
                sign = 1
                if self._peek().text == "-":
                    self._next()
                    sign = -1
                c = self._next()
                if c.kind != "num":
                    raise ExprError("expected a coefficient", c.column)
                coeffs.append(sign * Fraction(c.text))
                sep = self._next()
                if sep.text == "]":
                    break
                if sep.text != ",":
                    raise ExprError("expected ',' or ']'", sep.column)
            return TruncatedSeries.from_coeffs(coeffs[: self.truncation + 1], self.truncation)
        if tok.kind == "name":
            return self._call(tok)
        raise ExprError(f"unexpected {tok.text or 'end of input'!r}", tok.column)

    def _call(self, tok: Token) -> TruncatedSeries:
        fn = self.builtins.get(tok.text)
        if fn is None:
            raise ExprError(f"unknown function {tok.text}", tok.column)
        open_tok = self._expect("(")
        # raw argument slices, split at depth-zero commas
        args, depth, start = [], 0, open_tok.column
        while True:
            t = self._next()
            if t.kind == "end":
                raise ExprError("unclosed '('", open_tok.column)
            if t.text in ("(", "["):
                depth += 1
            elif t.text in (")", "]"):
                if depth == 0:
                    args.append(self._text[start : t.column - 1])
                    break
                depth -= 1
            elif t.text == "," and depth == 0:
                args.append(self._text[start : t.column - 1])
                start = t.column
        args = [a.strip() for a in args]
        if args == [""]:
            args = []
        try:
            return fn(args, self)
        except ExprError as e:
            raise ExprError(f"in {tok.text}(...): {e.message}", tok.column) from None
        except (ValueError, SeriesError) as e:
            raise ExprError(f"in {tok.text}(...): {e}", tok.column) from None

    def sub(self, text: str, truncation: Optional[int] = None) -> TruncatedSeries:
        """Evaluate a nested argument expression."""
        inner = Evaluator(self.truncation if truncation is None else truncation, self.refs)
        inner.builtins = self.builtins
        return inner.evaluate(text)


def _ints(args: list[str]) -> list[int]:
    try:
        return [int(a) for a in args]
    except ValueError:
        raise ValueError(f"expected integer arguments, got {args}") from None


_GROUP = re.compile(r"^(T|SL|GL|SO)(\d+)$")


def parse_group(args: list[str]) -> GroupDescriptor:
    """``T5``, ``SL3``, ``GL2``, ``SO2``, ``SO3`` factors; empty means the trivial group."""
    g = GroupDescriptor()
    for a in args:
        m = _GROUP.match(a.replace(" ", ""))
        if not m:
            raise ValueError(f"unknown group factor {a!r}")
        kind, k = m.group(1), int(m.group(2))
        if kind == "T":
            g = g * GroupDescriptor(torus_rank=k)
        elif kind == "SL":
            g = g * GroupDescriptor(sl_blocks=(k,))
        elif kind == "GL":
            g = g * GroupDescriptor(gl_blocks=(k,))
        elif k == 2:
            g = g * GroupDescriptor(so2_factors=1)
        elif k == 3:
            g = g * GroupDescriptor(so3_factors=1)
        else:
            raise ValueError(f"only SO2 and SO3 are supported, got {a!r}")
    return g


def _bg(args, ev):
    return classifying_series(parse_group(args), ev.truncation)


def _proj(args, ev):
    (n,) = _ints(args)
    return projective_series(n, ev.truncation)


def _wproj(args, ev):
    return projective_series(_ints(args), ev.truncation)


def _invt(args, ev):
    (k,) = _ints(args)
    return invariant_torus_series(k, ev.truncation)


def _fingeom(args, ev):
    lo, hi = _ints(args)
    return finite_geometric(lo, hi, ev.truncation)


BUILTINS: dict[str, Builtin] = {
    "BG": _bg,
    "Proj": _proj,
    "WProj": _wproj,
    "InvT": _invt,
    "FinGeom": _fingeom,
}


def evaluate(
    text: str,
    truncation: int = DEFAULT_TRUNCATION,
    refs: Optional[Mapping[str, TruncatedSeries]] = None,
    builtins: Optional[Mapping[str, Builtin]] = None,
) -> TruncatedSeries:
    return Evaluator(truncation, refs, builtins).evaluate(text)


def references(text: str) -> list[tuple[str, int]]:
    """``@name`` references with their columns, in order of appearance."""
    return [(t.text[1:], t.column) for t in tokenize(text) if t.kind == "ref"]


def check_syntax(text: str, known: Optional[set] = None, builtins: Optional[Mapping[str, Builtin]] = None) -> None:
    """Parse without evaluating builtins; raise :class:`ExprError` on bad syntax or names."""
    names = set(BUILTINS) | set(builtins or {})
    toks = tokenize(text)
    for t in toks:
        if t.kind == "name" and t.text != "t":
            nxt = toks[toks.index(t) + 1]
            if nxt.text == "(" and t.text not in names:
                raise ExprError(f"unknown function {t.text}", t.column)
    if known is not None:
        for name, col in references(text):
            if name not in known:
                raise ExprError(f"unresolved reference @{name}", col)
    # structural check at a tiny order with stand-ins for references and builtins
    stub = {n: (lambda a, e: TruncatedSeries.one(e.truncation)) for n in names}
    refs = {name: TruncatedSeries.one(2) for name, _ in references(text)}
    Evaluator(2, refs, stub).evaluate(text)
