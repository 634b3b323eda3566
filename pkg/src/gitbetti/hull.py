"""Exact nearest point to the origin on the convex hull of finitely many rational points.

Wolfe's algorithm run in ``Fraction`` arithmetic.  The answer comes with a
barycentric certificate that can be re-checked without trusting the solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .weights import Weight, inner, norm_sq


class SingularSystem(ValueError):
    pass


def solve_exact(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gauss-Jordan elimination over the rationals; raises on singular input."""
    n = len(matrix)
    a = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise SingularSystem("singular system")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        row = [x / p for x in a[col]]
        a[col] = row
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], row)]
    return [a[i][n] for i in range(n)]


def affine_min_norm(points: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """Affine coefficients of the minimum-norm point of ``aff(points)``.

    Points must be affinely independent.
    """
    k = len(points)
    gram = [[inner(points[i], points[j]) for j in range(k)] for i in range(k)]
    bordered = [gram[i] + [Fraction(1)] for i in range(k)]
    bordered.append([Fraction(1)] * k + [Fraction(0)])
    sol = solve_exact(bordered, [Fraction(0)] * k + [Fraction(1)])
    return sol[:k]


def combine(points: Sequence[Sequence[Fraction]], coeffs: Sequence[Fraction]) -> Weight:
    dim = len(points[0])
    return tuple(
        sum((c * p[k] for c, p in zip(coeffs, points)), Fraction(0)) for k in range(dim)
    )


@dataclass(frozen=True)
class HullCertificate:
    """Nearest point ``point`` with ``point = sum barycentric[i] * points[i]``."""

    point: Weight
    barycentric: dict[int, Fraction]

    @property
    def norm_sq(self) -> Fraction:
        return norm_sq(self.point)

    def verify(self, points: Sequence[Sequence[Fraction]]) -> bool:
        lam = self.barycentric
        if any(c < 0 for c in lam.values()) or sum(lam.values()) != 1:
            return False
        if combine([points[i] for i in lam], list(lam.values())) != tuple(self.point):
            return False
        x2 = norm_sq(self.point)
        return all(inner(self.point, p) >= x2 for p in points)


def nearest_point_hull(points: Sequence[Sequence[Fraction]]) -> HullCertificate:
    """Minimum-norm point of ``conv(points)`` (Wolfe, exact arithmetic)."""
    if not points:
        raise ValueError("nearest_point_hull needs at least one point")
    pts = [tuple(Fraction(c) for c in p) for p in points]
    dim = len(pts[0])
    if any(len(p) != dim for p in pts):
        raise ValueError("points must share one dimension")

    start = min(range(len(pts)), key=lambda i: (norm_sq(pts[i]), i))
    active = [start]
    lam = [Fraction(1)]
    x = pts[start]
    while True:
        x2 = norm_sq(x)
        # most violating generator
        j = min(range(len(pts)), key=lambda i: (inner(x, pts[i]), i))
        if inner(x, pts[j]) >= x2 or j in active:
            break
        active.append(j)
        lam.append(Fraction(0))
        while True:
            mu = affine_min_norm([pts[i] for i in active])
            if all(m > 0 for m in mu):
                lam = mu
                x = combine([pts[i] for i in active], lam)
                break
            theta = min(
                lam[k] / (lam[k] - mu[k]) for k in range(len(active)) if mu[k] <= 0
            )
            lam = [theta * m + (1 - theta) * l for m, l in zip(mu, lam)]
            keep = [k for k in range(len(active)) if lam[k] > 0]
            active = [active[k] for k in keep]
            lam = [lam[k] for k in keep]
            x = combine([pts[i] for i in active], lam)
    return HullCertificate(x, dict(zip(active, lam)))


@dataclass(frozen=True)
class SemistabilityResult:
    """Outcome of the zero-in-hull test: a barycentric certificate or a separating direction."""

    nonempty: bool
    barycentric: Optional[dict[int, Fraction]] = None
    separating: Optional[Weight] = None

    def verify(self, points: Sequence[Sequence[Fraction]]) -> bool:
        if self.nonempty:
            lam = self.barycentric or {}
            if any(c < 0 for c in lam.values()) or sum(lam.values()) != 1:
                return False
            return all(c == 0 for c in combine([points[i] for i in lam], list(lam.values())))
        return all(inner(self.separating, p) > 0 for p in points)


def generic_torus_semistable(weight_set: Sequence[Sequence[Fraction]]) -> SemistabilityResult:
    """Is ``0`` in the convex hull of the weights?

    If not, the nearest point ``x`` pairs strictly positively with every
    weight and is returned as the destabilising one-parameter subgroup direction.
    """
    cert = nearest_point_hull(weight_set)
    if all(c == 0 for c in cert.point):
        return SemistabilityResult(True, barycentric=cert.barycentric)
    return SemistabilityResult(False, separating=cert.point)
