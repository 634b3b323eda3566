from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gitbetti.series import (
    DualityError,
    GroupDescriptor,
    SeriesError,
    TruncatedSeries,
    classifying_series,
    duality_complete,
    expand_rational,
    finite_geometric,
    format_polynomial,
    invariant_torus_series,
    parse_polynomial,
    parse_series,
    projective_series,
    ring_ops,
)


def S(coeffs, n=None):
    coeffs = list(coeffs)
    return TruncatedSeries.from_coeffs(coeffs, len(coeffs) - 1 if n is None else n)


def even(s):
    return [int(s[k]) for k in range(0, s.truncation + 1, 2)]


def long_division(num, den, n):
    """Independent oracle: solve den * q = num degree by degree."""
    num = list(num) + [0] * (n + 1)
    den = list(den) + [0] * (n + 1)
    q = []
    for k in range(n + 1):
        acc = Fraction(num[k]) - sum(den[j] * q[k - j] for j in range(1, k + 1))
        q.append(acc / den[0])
    return q


def poly_from_factors(factors):
    p = [1]
    for a, e in factors:
        for _ in range(e):
            nxt = p + [0] * a
            for i, c in enumerate(p):
                nxt[i + a] -= c
            p = nxt
    return p


# -- ring operations -------------------------------------------------------------

def test_binomial_square():
    # [TRIVIAL] binomial square
    a = S([1, 0, 1, 0, 0])
    assert ring_ops(a, a, "mul") == S([1, 0, 2, 0, 1])


def test_multiplicative_identity():
    s = S([3, 1, 4, 1, 5])
    assert s * TruncatedSeries.one(4) == s


def test_geometric_times_denominator():
    # [DERIVED] geometric recurrence expanded then multiplied back
    geo = S(long_division([1], [1, 0, -1], 10))
    assert geo * S([1, 0, -1], 10) == TruncatedSeries.one(10)


def test_mismatched_truncation():
    with pytest.raises(SeriesError):
        ring_ops(S([1, 1]), S([1, 1, 1]), "add")


def test_unknown_op():
    with pytest.raises(SeriesError):
        ring_ops(S([1]), S([1]), "pow")


def test_coefficients_are_reduced_rationals():
    s = S([Fraction(2, 4), Fraction(-3, 6)])
    assert s[0] == Fraction(1, 2) and s[0].denominator == 2
    assert s[1].denominator > 0


def test_degrees_above_truncation_are_unknown():
    with pytest.raises(IndexError):
        S([1, 2, 3])[7]


def test_inverse_roundtrip():
    s = S([2, 1, 0, -3, 5, 1])
    assert s * s.inverse() == TruncatedSeries.one(5)


def test_inverse_needs_unit():
    with pytest.raises(SeriesError):
        S([0, 1]).inverse()


# -- expand_rational ---------------------------------------------------------------

def test_expand_rational_long_division_oracle():
    # [DERIVED] long division oracle; see the ledger for the printed example
    got = expand_rational({0: 1, 2: 1, 10: 1, 12: 1}, [(4, 1), (6, 1)], 12)
    num = [0] * 13
    for k in (0, 2, 10, 12):
        num[k] = 1
    assert list(got.coeffs) == long_division(num, poly_from_factors([(4, 1), (6, 1)]), 12)
    assert even(got) == [1, 1, 1, 2, 2, 3, 4]


def test_expand_geometric():
    assert expand_rational([1], [(2, 1)], 6) == S([1, 0, 1, 0, 1, 0, 1])


def test_expand_recursion_of_second_surface_stratum():
    # [PAPER] the printed difference of rational functions equals 1/(1-t^2)
    a = expand_rational([1, 0, 1, 0, 1, 0, 1], [(2, 1), (4, 1)], 8)
    b = expand_rational({2: 1, 4: 1}, [(2, 2)], 8)
    assert a - b == S([1, 0, 1, 0, 1, 0, 1, 0, 1])


def test_expand_zero_factor_rejected():
    with pytest.raises(SeriesError):
        expand_rational([1], [(0, 1)], 4)


small_poly = st.lists(st.integers(-5, 5), min_size=1, max_size=8)
factors = st.lists(st.tuples(st.sampled_from([2, 4, 6, 8]), st.integers(1, 3)), max_size=3)


@settings(max_examples=200, deadline=None)
@given(small_poly, factors, st.integers(0, 24))
def test_expand_rational_times_denominator(num, fac, n):
    s = expand_rational(num, fac, n)
    den = TruncatedSeries.from_coeffs(poly_from_factors(fac)[: n + 1], n)
    assert s * den == TruncatedSeries.from_coeffs(num[: n + 1], n)


# -- finite_geometric ------------------------------------------------------------------

def test_single_term():
    assert finite_geometric(2, 2, 4) == TruncatedSeries.monomial(2, 1, 4)


def test_truncated_range():
    assert even(finite_geometric(2, 48, 20)) == [0] + [1] * 10


def test_cross_expansion():
    # [DERIVED] (t^2 - t^56)/(1 - t^2)
    assert finite_geometric(2, 54, 55) == expand_rational({2: 1, 56: -1}, [(2, 1)], 55)


def test_empty_range_rejected():
    with pytest.raises(SeriesError):
        finite_geometric(4, 2)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 20), st.integers(0, 19))
def test_finite_geometric_property(a, b):
    lo, hi = 2 * a, 2 * min(a + b, 20)
    assert finite_geometric(lo, hi, 44) == expand_rational({lo: 1, hi + 2: -1}, [(2, 1)], 44)


# -- classifying series ----------------------------------------------------------------

def test_sl3():
    # [PAPER] 1/((1-t^4)(1-t^6))
    s = classifying_series(GroupDescriptor(sl_blocks=(3,)), 10)
    assert s == S([1, 0, 0, 0, 1, 0, 1, 0, 1, 0, 1])


def test_trivial_group():
    assert classifying_series(GroupDescriptor(), 6) == TruncatedSeries.one(6)


def test_rank_five_torus():
    # [DERIVED] coefficients of 1/(1-x)^5 are C(k+4, 4)
    assert classifying_series(GroupDescriptor(torus_rank=5), 4) == S([1, 0, 5, 0, 15])


def test_so_factors():
    g = GroupDescriptor(so2_factors=1, so3_factors=1)
    assert classifying_series(g, 8) == expand_rational([1], [(2, 1), (4, 1)], 8)


groups = st.builds(
    GroupDescriptor,
    torus_rank=st.integers(0, 3),
    sl_blocks=st.lists(st.integers(2, 4), max_size=2).map(tuple),
    gl_blocks=st.lists(st.integers(1, 3), max_size=2).map(tuple),
    so2_factors=st.integers(0, 2),
    so3_factors=st.integers(0, 2),
)


@settings(max_examples=100, deadline=None)
@given(groups, groups)
def test_classifying_product(g, h):
    n = 16
    assert classifying_series(g * h, n) == classifying_series(g, n) * classifying_series(h, n)


# -- projective and invariant series ---------------------------------------------------

def test_projective_line():
    assert projective_series(1, 4) == S([1, 0, 1, 0, 0])


def test_weighted_projective():
    # [PAPER] P(1,3,6,8) and P(1,2,3)
    assert projective_series([1, 3, 6, 8], 8) == S([1, 0, 1, 0, 1, 0, 1, 0, 0])
    assert projective_series([1, 2, 3], 6) == S([1, 0, 1, 0, 1, 0, 0])


def test_invariant_torus_rank_one():
    assert invariant_torus_series(1, 6) == expand_rational([1], [(2, 1)], 6)


def test_invariant_torus_rank_six():
    # [PAPER] 1/prod_{1..6}(1-t^{2i})
    assert invariant_torus_series(6, 18) == expand_rational([1], [(2 * i, 1) for i in range(1, 7)], 18)


def test_invariant_torus_rank_two():
    # [DERIVED] symmetric monomials in two degree-2 generators
    assert even(invariant_torus_series(2, 8)) == [1, 1, 2, 2, 3]


# -- duality ---------------------------------------------------------------------------------

BLOWUP_HALF = [1, 9, 26, 51, 81, 115, 152, 193, 236, 280, 324]


def test_duality_blowup_polynomial():
    # [PAPER] Kirwan blowup polynomial
    half = TruncatedSeries.from_terms({2 * i: c for i, c in enumerate(BLOWUP_HALF)}, 20)
    full = duality_complete(half, 20)
    assert even(full) == BLOWUP_HALF + BLOWUP_HALF[-2::-1]
    assert full.truncation == 40


def test_duality_point():
    assert duality_complete(TruncatedSeries.one(0), 0) == TruncatedSeries.one(0)


def test_duality_overlap_error():
    with pytest.raises(DualityError) as err:
        duality_complete(S([1, 0, 2, 0, 1, 0, 5]), 2)
    assert err.value.degree == 6


def test_duality_needs_low_half():
    with pytest.raises(SeriesError):
        duality_complete(S([1, 0]), 3)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 9), min_size=1, max_size=12))
def test_duality_idempotent_and_palindromic(half):
    d = len(half) - 1
    full = duality_complete(S(half), d)
    assert all(full[i] == full[2 * d - i] for i in range(2 * d + 1))
    assert duality_complete(full, d) == full


# -- ring axioms -----------------------------------------------------------------------------

N_AXIOM = 8
rationals = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 7))
series = st.lists(rationals, min_size=N_AXIOM + 1, max_size=N_AXIOM + 1).map(
    lambda c: TruncatedSeries.from_coeffs(c, N_AXIOM)
)


@settings(max_examples=1000, deadline=None)
@given(series, series, series)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a + b == b + a
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c


# -- serialization --------------------------------------------------------------------------------

def test_json_roundtrip():
    s = S([1, Fraction(-2, 3), 0, 5])
    obj = s.to_json()
    assert obj == {"truncation": 3, "coeffs": ["1", "-2/3", "0", "5"]}
    assert TruncatedSeries.from_json(obj) == s


def test_polynomial_string_roundtrip():
    s = S([1, 0, 9, 0, 26, Fraction(1, 2), -3])
    text = format_polynomial(s.coeffs)
    assert text.startswith("1 + 9t^2 + 26t^4")
    assert parse_series(text, 6) == s
    assert parse_polynomial("1 - t + 3t^4") == {0: 1, 1: -1, 4: 3}


@settings(max_examples=200, deadline=None)
@given(series)
def test_string_and_json_roundtrip_property(s):
    assert parse_series(str(s), s.truncation) == s
    assert TruncatedSeries.from_json(s.to_json()) == s
