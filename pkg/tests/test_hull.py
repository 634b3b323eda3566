import itertools
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from gitbetti.hull import generic_torus_semistable, nearest_point_hull

F = Fraction


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def gauss_solve(rows):
    """Reduced row echelon solve of an augmented square system; None if singular."""
    m = [list(r) for r in rows]
    n = len(m)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return None
        m[c], m[piv] = m[piv], m[c]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c] / m[c][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return [m[i][n] / m[i][i] for i in range(n)]


def face_enumeration(points):
    """Oracle: minimum over affinely independent subsets with positive affine minimizers."""
    best = None
    for k in range(1, len(points) + 1):
        for sub in itertools.combinations(points, k):
            # minimise |sum l_i p_i|^2 subject to sum l_i = 1 via the KKT system
            rows = [[dot(p, q) for q in sub] + [F(1), F(0)] for p in sub]
            rows.append([F(1)] * k + [F(0), F(1)])
            sol = gauss_solve(rows)
            if sol is None:
                continue
            lam = sol[:k]
            if any(l < 0 for l in lam):
                continue
            x = tuple(sum(l * p[i] for l, p in zip(lam, sub)) for i in range(len(points[0])))
            if best is None or dot(x, x) < dot(best, best):
                best = x
    return best


def test_origin_inside():
    cert = nearest_point_hull([(F(1), F(0)), (F(-1), F(1)), (F(0), F(-1))])
    assert all(c == 0 for c in cert.point)


def test_symmetric_pair():
    pts = [(F(1), F(-1)), (F(-1), F(1))]
    cert = nearest_point_hull(pts)
    assert cert.point == (0, 0)
    assert cert.barycentric == {0: F(1, 2), 1: F(1, 2)}


def test_segment_interior():
    cert = nearest_point_hull([(F(2), F(1)), (F(2), F(-1))])
    assert cert.point == (2, 0)
    assert cert.verify([(F(2), F(1)), (F(2), F(-1))])


point_sets = st.integers(1, 3).flatmap(
    lambda dim: st.lists(
        st.tuples(*[st.builds(F, st.integers(-6, 6), st.integers(1, 4)) for _ in range(dim)]),
        min_size=1,
        max_size=7,
    )
)


@settings(max_examples=500, deadline=None)
@given(point_sets)
def test_hull_matches_face_enumeration(points):
    cert = nearest_point_hull(points)
    assert cert.point == face_enumeration(points)
    assert cert.verify(points)
    x = cert.point
    assert all(dot(x, tuple(a - b for a, b in zip(p, x))) >= 0 for p in points)
    assert all(dot(x, x) <= dot(p, p) for p in points)
    assert sum(cert.barycentric.values()) == 1


def test_semistable_symmetric_set():
    pts = [(F(1), F(2)), (F(-1), F(-2)), (F(3), F(0))]
    res = generic_torus_semistable(pts)
    assert res.nonempty and res.verify(pts)


def test_unstable_set_separator():
    pts = [(F(1), F(0), F(-1)), (F(2), F(-1), F(-1)), (F(1), F(1), F(-2))]
    res = generic_torus_semistable(pts)
    assert not res.nonempty
    assert res.verify(pts)
    assert all(dot(res.separating, p) > 0 for p in pts)


@settings(max_examples=200, deadline=None)
@given(point_sets)
def test_semistability_certificate_exclusive(points):
    res = generic_torus_semistable(points)
    assert (res.barycentric is not None) != (res.separating is not None)
    assert res.verify(points)
