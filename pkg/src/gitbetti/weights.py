"""Torus weights of degree-d forms under SL(n+1), and type A chamber combinatorics.

Weights are exact: a monomial ``x^I`` of degree ``d`` in ``m`` variables has
weight ``I - (d/m)(1, ..., 1)``, the orthogonal projection of its exponent
vector onto the traceless hyperplane.  The pairing on weights is the standard
Euclidean one, which is invariant under the Weyl group ``S_m``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

Weight = tuple[Fraction, ...]
Exponent = tuple[int, ...]


def exponent_vectors(n_vars: int, d: int) -> list[Exponent]:
    """All exponent vectors of degree ``d``, lexicographically decreasing (x0^d first)."""
    if n_vars < 1 or d < 0:
        raise ValueError("need n_vars >= 1 and d >= 0")
    if n_vars == 1:
        return [(d,)]
    out = []
    for first in range(d, -1, -1):
        for rest in exponent_vectors(n_vars - 1, d - first):
            out.append((first,) + rest)
    return out


def weight_of(exponent: Sequence[int]) -> Weight:
    m = len(exponent)
    shift = Fraction(sum(exponent), m)
    return tuple(Fraction(i) - shift for i in exponent)


@dataclass(frozen=True)
class WeightTable:
    """Monomials of ``C[x_0..x_{n_vars-1}]_degree`` with their torus weights."""

    n_vars: int
    degree: int
    exponents: tuple[Exponent, ...]
    weights: tuple[Weight, ...]

    def __len__(self):
        return len(self.exponents)

    @property
    def dim_group(self) -> int:
        return self.n_vars**2 - 1

    @property
    def dim_space(self) -> int:
        return len(self.exponents) - 1

    def index(self, exponent: Sequence[int]) -> int:
        return self.exponents.index(tuple(exponent))

    def monomial(self, i: int) -> str:
        return monomial_str(self.exponents[i])

    def to_json(self) -> str:
        return json.dumps([list(e) for e in self.exponents])


def enumerate_monomials(n_vars: int, d: int) -> WeightTable:
    if n_vars < 1 or d < 1:
        raise ValueError("need n_vars >= 1 and d >= 1")
    exps = exponent_vectors(n_vars, d)
    assert len(exps) == comb(n_vars - 1 + d, d)
    return WeightTable(n_vars, d, tuple(exps), tuple(weight_of(e) for e in exps))


def monomial_str(exponent: Sequence[int]) -> str:
    """``(0, 1, 0, 2)`` -> ``"x1*x3^2"``."""
    parts = []
    for i, e in enumerate(exponent):
        if e == 1:
            parts.append(f"x{i}")
        elif e > 1:
            parts.append(f"x{i}^{e}")
    return "*".join(parts) if parts else "1"


def parse_monomial(text: str, n_vars: int) -> Exponent:
    exps = [0] * n_vars
    for factor in text.replace(" ", "").split("*"):
        if factor == "1":
            continue
        var, _, power = factor.partition("^")
        if not var.startswith("x"):
            raise ValueError(f"bad monomial factor {factor!r}")
        i = int(var[1:])
        if i >= n_vars:
            raise ValueError(f"variable x{i} out of range for {n_vars} variables")
        exps[i] += int(power) if power else 1
    return tuple(exps)


def inner(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return sum((Fraction(a) * b for a, b in zip(u, v)), Fraction(0))


def norm_sq(v: Sequence[Fraction]) -> Fraction:
    return inner(v, v)


def chamber_sort(v: Sequence[Fraction]) -> tuple[Weight, tuple[int, ...]]:
    """Dominant (weakly decreasing) representative of the ``S_m`` orbit of ``v``.

    Returns ``(w, perm)`` with ``w[k] = v[perm[k]]``; ties keep their original order.
    """
    perm = tuple(sorted(range(len(v)), key=lambda i: -Fraction(v[i])))
    return tuple(Fraction(v[i]) for i in perm), perm


def is_dominant(v: Sequence[Fraction]) -> bool:
    return all(v[i] >= v[i + 1] for i in range(len(v) - 1))


def parabolic_dim(beta: Sequence[Fraction]) -> int:
    """Dimension of the parabolic ``P_beta`` in ``SL(m)``: rank plus roots pairing >= 0."""
    if all(b == 0 for b in beta):
        raise ValueError("parabolic_dim needs a nonzero beta")
    m = len(beta)
    roots = sum(1 for i in range(m) for j in range(m) if i != j and beta[i] - beta[j] >= 0)
    return (m - 1) + roots


def pairing_supports(table: WeightTable, beta: Sequence[Fraction]):
    """Split the monomials by their pairing with ``beta`` against ``|beta|^2``.

    Returns ``(z_support, y_support, n_beta)``: indices with pairing equal to
    ``|beta|^2``, indices with pairing at least ``|beta|^2``, and the number
    of monomials pairing strictly below.
    """
    b2 = norm_sq(beta)
    if b2 == 0:
        raise ValueError("pairing_supports needs a nonzero beta")
    z, y = [], []
    below = 0
    for i, w in enumerate(table.weights):
        p = inner(w, beta)
        if p == b2:
            z.append(i)
            y.append(i)
        elif p > b2:
            y.append(i)
        else:
            below += 1
    return tuple(z), tuple(y), below


def level_sets(beta: Sequence[Fraction]) -> list[tuple[int, ...]]:
    """Coordinate indices grouped by equal value, largest value first."""
    values = sorted(set(beta), reverse=True)
    return [tuple(i for i, b in enumerate(beta) if b == v) for v in values]


def permute_exponent(exponent: Sequence[int], perm: Sequence[int]) -> Exponent:
    """Relabel variables so that new variable ``k`` is old variable ``perm[k]``."""
    return tuple(exponent[p] for p in perm)
