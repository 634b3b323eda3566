"""Truncated power series in ``t`` over the rationals.

Every Poincare series handled by the package lives here: a ``TruncatedSeries``
stores the coefficients of ``t^0 .. t^N`` as exact ``Fraction`` values and
arithmetic never looks past degree ``N``.  The module also carries the small
catalogue of standard series (classifying spaces, projective spaces, finite
geometric sums) that the cohomological formulas are assembled from.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

DEFAULT_TRUNCATION = 20

Coeff = Union[int, Fraction]


class SeriesError(ValueError):
    """Raised for malformed series input or incompatible operands."""


class DualityError(SeriesError):
    """A coefficient above the middle degree contradicts its mirror image."""

    def __init__(self, degree: int, given: Fraction, mirrored: Fraction):
        self.degree = degree
        self.given = given
        self.mirrored = mirrored
        super().__init__(
            f"overlap inconsistency at t^{degree}: series has {given}, "
            f"mirror image requires {mirrored}"
        )


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise SeriesError(f"not an exact rational: {x!r}")


@dataclass(frozen=True)
class TruncatedSeries:
    """Power series ``sum c_k t^k`` known modulo ``t^(N+1)``."""

    coeffs: tuple[Fraction, ...]
    truncation: int

    def __post_init__(self):
        if self.truncation < 0:
            raise SeriesError("truncation order must be nonnegative")
        if len(self.coeffs) != self.truncation + 1:
            raise SeriesError(
                f"expected {self.truncation + 1} coefficients, got {len(self.coeffs)}"
            )

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[Coeff], truncation: int) -> "TruncatedSeries":
        """Build from a coefficient list; missing degrees are zero, extra ones dropped."""
        cs = [_frac(c) for c in coeffs][: truncation + 1]
        cs += [Fraction(0)] * (truncation + 1 - len(cs))
        return cls(tuple(cs), truncation)

    @classmethod
    def from_terms(cls, terms: Mapping[int, Coeff], truncation: int) -> "TruncatedSeries":
        cs = [Fraction(0)] * (truncation + 1)
        for deg, c in terms.items():
            if deg < 0:
                raise SeriesError(f"negative degree {deg}")
            if deg <= truncation:
                cs[deg] += _frac(c)
        return cls(tuple(cs), truncation)

    @classmethod
    def zero(cls, truncation: int = DEFAULT_TRUNCATION) -> "TruncatedSeries":
        return cls((Fraction(0),) * (truncation + 1), truncation)

    @classmethod
    def one(cls, truncation: int = DEFAULT_TRUNCATION) -> "TruncatedSeries":
        return cls.monomial(0, 1, truncation)

    @classmethod
    def monomial(cls, degree: int, coeff: Coeff = 1, truncation: int = DEFAULT_TRUNCATION):
        return cls.from_terms({degree: coeff}, truncation)

    # -- accessors --------------------------------------------------------

    @property
    def N(self) -> int:
        return self.truncation

    def __getitem__(self, degree: int) -> Fraction:
        if degree < 0 or degree > self.truncation:
            raise IndexError(f"degree {degree} outside 0..{self.truncation}")
        return self.coeffs[degree]

    def __iter__(self):
        return iter(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def int_coeffs(self) -> list[int]:
        if not self.is_integral():
            raise SeriesError("series has non-integer coefficients")
        return [c.numerator for c in self.coeffs]

    def even_coeffs(self) -> list[int]:
        """Integer coefficients of ``t^0, t^2, ...``; odd degrees must vanish."""
        cs = self.int_coeffs()
        if any(cs[1::2]):
            raise SeriesError("series has odd-degree terms")
        return cs[::2]

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "TruncatedSeries") -> None:
        if not isinstance(other, TruncatedSeries):
            raise TypeError(f"cannot combine TruncatedSeries with {type(other).__name__}")
        if other.truncation != self.truncation:
            raise SeriesError(
                f"mismatched truncation orders {self.truncation} and {other.truncation}"
            )

    def _lift(self, other) -> "TruncatedSeries":
        if isinstance(other, (int, Fraction)):
            return TruncatedSeries.monomial(0, other, self.truncation)
        self._check(other)
        return other

    def __add__(self, other):
        other = self._lift(other)
        return TruncatedSeries(
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.truncation
        )

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(tuple(-a for a in self.coeffs), self.truncation)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            return TruncatedSeries(tuple(a * c for a in self.coeffs), self.truncation)
        self._check(other)
        n = self.truncation
        out = [Fraction(0)] * (n + 1)
        b = other.coeffs
        for i, a in enumerate(self.coeffs):
            if a:
                for j in range(n + 1 - i):
                    if b[j]:
                        out[i + j] += a * b[j]
        return TruncatedSeries(tuple(out), n)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise SeriesError("negative powers are not supported; use expand_rational")
        out = TruncatedSeries.one(self.truncation)
        for _ in range(k):
            out = out * self
        return out

    def inverse(self) -> "TruncatedSeries":
        """Multiplicative inverse; needs a nonzero constant term."""
        a = self.coeffs
        if a[0] == 0:
            raise SeriesError("series with zero constant term is not invertible")
        n = self.truncation
        out = [Fraction(0)] * (n + 1)
        out[0] = 1 / a[0]
        for k in range(1, n + 1):
            acc = sum((a[i] * out[k - i] for i in range(1, k + 1) if a[i]), Fraction(0))
            out[k] = -acc / a[0]
        return TruncatedSeries(tuple(out), n)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise SeriesError("division by zero")
            return self * (1 / Fraction(other))
        self._check(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._lift(other) * self.inverse()

    def shift(self, k: int) -> "TruncatedSeries":
        """Multiply by ``t^k`` (``k >= 0``), dropping what falls past the truncation."""
        if k < 0:
            raise SeriesError("shift must be nonnegative")
        n = self.truncation
        cs = (Fraction(0),) * min(k, n + 1) + self.coeffs[: max(0, n + 1 - k)]
        return TruncatedSeries(cs, n)

    def truncate(self, n: int) -> "TruncatedSeries":
        """Re-truncate at order ``n``; raising the order is only allowed for polynomials."""
        if n <= self.truncation:
            return TruncatedSeries(self.coeffs[: n + 1], n)
        # padding with zeros would silently invent coefficients
        raise SeriesError(f"cannot extend a series known to order {self.truncation} to {n}")

    def pad(self, n: int) -> "TruncatedSeries":
        """Treat the series as a polynomial and raise its order to ``n``."""
        if n < self.truncation:
            return self.truncate(n)
        return TruncatedSeries.from_coeffs(self.coeffs, n)

    # -- formatting -------------------------------------------------------

    def to_json(self) -> dict:
        return {"truncation": self.truncation, "coeffs": [str(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj: Union[str, dict]) -> "TruncatedSeries":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls.from_coeffs([Fraction(c) for c in obj["coeffs"]], int(obj["truncation"]))

    def __str__(self) -> str:
        return format_polynomial(self.coeffs)

    def __repr__(self) -> str:
        return f"TruncatedSeries({self}, N={self.truncation})"


# -- polynomial strings -------------------------------------------------------

def format_polynomial(coeffs: Sequence[Fraction]) -> str:
    parts = []
    for deg, c in enumerate(coeffs):
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if deg == 0:
            body = str(mag)
        else:
            mono = "t" if deg == 1 else f"t^{deg}"
            if mag == 1:
                body = mono
            elif mag.denominator == 1:
                body = f"{mag}{mono}"
            else:
                body = f"({mag}){mono}"
        parts.append((sign, body))
    if not parts:
        return "0"
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:\((?P<pq>-?\d+/\d+)\)|(?P<num>\d+(?:/\d+)?))?\s*\*?\s*
        (?P<t>t(?:\s*\^\s*(?P<exp>\d+))?)?\s*""",
    re.VERBOSE,
)


def parse_polynomial(text: str) -> dict[int, Fraction]:
    """Parse ``"1 + 9t^2 - (1/2)t^3"`` into ``{degree: coefficient}``."""
    s = text.strip()
    if not s:
        raise SeriesError("empty polynomial")
    terms: dict[int, Fraction] = {}
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise SeriesError(f"cannot parse polynomial at column {pos + 1}: {s!r}")
        if not first and m.group("sign") is None:
            raise SeriesError(f"missing '+' or '-' at column {pos + 1}: {s!r}")
        if m.group("pq") is None and m.group("num") is None and m.group("t") is None:
            raise SeriesError(f"dangling sign at column {pos + 1}: {s!r}")
        c = Fraction(m.group("pq") or m.group("num") or 1)
        if m.group("sign") == "-":
            c = -c
        deg = 0
        if m.group("t"):
            deg = int(m.group("exp")) if m.group("exp") else 1
        terms[deg] = terms.get(deg, Fraction(0)) + c
        pos = m.end()
        first = False
    return terms


def parse_series(text: str, truncation: int = DEFAULT_TRUNCATION) -> TruncatedSeries:
    return TruncatedSeries.from_terms(parse_polynomial(text), truncation)


# -- catalogue ----------------------------------------------------------------

def ring_ops(a: TruncatedSeries, b: TruncatedSeries, op: str) -> TruncatedSeries:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise SeriesError(f"unknown ring operation {op!r}")


def expand_rational(
    numerator: Union[Mapping[int, Coeff], Sequence[Coeff]],
    denominator_factors: Iterable[tuple[int, int]],
    truncation: int = DEFAULT_TRUNCATION,
) -> TruncatedSeries:
    """Expand ``P(t) / prod (1 - t^a)^e`` modulo ``t^(N+1)``.

    ``numerator`` is either a coefficient list or a ``{degree: coeff}`` map.
    """
    if isinstance(numerator, Mapping):
        s = TruncatedSeries.from_terms(numerator, truncation)
    else:
        s = TruncatedSeries.from_coeffs(numerator, truncation)
    cs = list(s.coeffs)
    for a, e in denominator_factors:
        if a <= 0:
            raise SeriesError(f"denominator factor (1 - t^{a}) is not invertible")
        if e < 0:
            raise SeriesError("denominator exponent must be nonnegative")
        for _ in range(e):
            # multiply by 1/(1 - t^a): c_k += c_{k-a}
            for k in range(a, truncation + 1):
                cs[k] += cs[k - a]
    return TruncatedSeries(tuple(cs), truncation)


def finite_geometric(lo: int, hi: int, truncation: int = DEFAULT_TRUNCATION) -> TruncatedSeries:
    """``t^lo + t^(lo+2) + ... + t^hi``."""
    if lo > hi:
        raise SeriesError(f"empty range t^{lo}..t^{hi}")
    if lo < 0 or lo % 2 or hi % 2:
        raise SeriesError("finite_geometric expects even nonnegative bounds")
    return TruncatedSeries.from_terms({k: 1 for k in range(lo, hi + 1, 2)}, truncation)


@dataclass(frozen=True)
class GroupDescriptor:
    """A connected reductive group up to isogeny, as far as ``H*(BG; Q)`` cares.

    Product of a torus, ``SL`` and ``GL`` blocks and ``SO(2)``/``SO(3)`` factors.
    """

    torus_rank: int = 0
    sl_blocks: tuple[int, ...] = ()
    gl_blocks: tuple[int, ...] = ()
    so2_factors: int = 0
    so3_factors: int = 0

    def __post_init__(self):
        if self.torus_rank < 0 or self.so2_factors < 0 or self.so3_factors < 0:
            raise SeriesError("factor counts must be nonnegative")
        if any(n < 2 for n in self.sl_blocks):
            raise SeriesError("SL blocks need size >= 2")
        if any(n < 1 for n in self.gl_blocks):
            raise SeriesError("GL blocks need size >= 1")
        object.__setattr__(self, "sl_blocks", tuple(sorted(self.sl_blocks)))
        object.__setattr__(self, "gl_blocks", tuple(sorted(self.gl_blocks)))

    def __mul__(self, other: "GroupDescriptor") -> "GroupDescriptor":
        return GroupDescriptor(
            self.torus_rank + other.torus_rank,
            self.sl_blocks + other.sl_blocks,
            self.gl_blocks + other.gl_blocks,
            self.so2_factors + other.so2_factors,
            self.so3_factors + other.so3_factors,
        )

    def is_trivial(self) -> bool:
        return self == GroupDescriptor()

    def rank(self) -> int:
        return (
            self.torus_rank
            + sum(n - 1 for n in self.sl_blocks)
            + sum(self.gl_blocks)
            + self.so2_factors
            + self.so3_factors
        )

    def denominator_factors(self) -> list[tuple[int, int]]:
        factors: dict[int, int] = {}

        def add(a, e=1):
            factors[a] = factors.get(a, 0) + e

        if self.torus_rank:
            add(2, self.torus_rank)
        for n in self.sl_blocks:
            for i in range(2, n + 1):
                add(2 * i)
        for n in self.gl_blocks:
            for i in range(1, n + 1):
                add(2 * i)
        if self.so2_factors:
            add(2, self.so2_factors)
        if self.so3_factors:
            add(4, self.so3_factors)
        return sorted(factors.items())

    def __str__(self) -> str:
        parts = []
        if self.torus_rank:
            parts.append(f"T^{self.torus_rank}")
        parts += [f"SL({n})" for n in self.sl_blocks]
        parts += [f"GL({n})" for n in self.gl_blocks]
        parts += ["SO(2)"] * self.so2_factors + ["SO(3)"] * self.so3_factors
        return " x ".join(parts) if parts else "1"


def classifying_series(g: GroupDescriptor, truncation: int = DEFAULT_TRUNCATION) -> TruncatedSeries:
    return expand_rational([1], g.denominator_factors(), truncation)


def projective_series(dims: Union[int, Sequence[int]], truncation: int = DEFAULT_TRUNCATION) -> TruncatedSeries:
    """Poincare series of ``P^n``, or of a weighted projective space given its weights.

    Rationally ``P(w_0, ..., w_k)`` has the Betti numbers of ``P^k``.
    """
    if isinstance(dims, int):
        n = dims
    else:
        weights = list(dims)
        if not weights or any(w <= 0 for w in weights):
            raise SeriesError("weighted projective space needs positive weights")
        n = len(weights) - 1
    if n < 0:
        raise SeriesError("projective dimension must be nonnegative")
    return TruncatedSeries.from_terms({2 * i: 1 for i in range(n + 1)}, truncation)


def invariant_torus_series(k: int, truncation: int = DEFAULT_TRUNCATION) -> TruncatedSeries:
    """``H*(BT^k)^{S_k}``: ``1 / prod_{i=1..k} (1 - t^{2i})``."""
    if k < 1:
        raise SeriesError("torus rank must be positive")
    return expand_rational([1], [(2 * i, 1) for i in range(1, k + 1)], truncation)


def duality_complete(s: TruncatedSeries, complex_dim: int) -> TruncatedSeries:
    """Extend the low half of a Poincare polynomial by Poincare duality.

    The result has degree ``2 * complex_dim`` with ``c(2d - i) = c(i)``;
    coefficients of ``s`` above ``complex_dim`` must agree with their mirror.
    """
    d = complex_dim
    if d < 0:
        raise SeriesError("complex dimension must be nonnegative")
    if s.truncation < d:
        raise SeriesError(f"series known to t^{s.truncation} cannot determine degrees up to t^{d}")
    top = 2 * d
    out = [Fraction(0)] * (top + 1)
    for i in range(d + 1):
        out[i] = s[i]
        out[top - i] = s[i]
    for i in range(d + 1, min(s.truncation, top) + 1):
        if s[i] != out[i]:
            raise DualityError(i, s[i], out[i])
    for i in range(top + 1, s.truncation + 1):
        if s[i] != 0:
            raise DualityError(i, s[i], Fraction(0))
    return TruncatedSeries(tuple(out), top)
