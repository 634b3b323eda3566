"""Acceptance criteria; each test prints one PASS/FAIL line and the run ends with a summary table."""

import time

import pytest

import test_hull
import test_series
import test_strata
from gitbetti.expr import evaluate
from gitbetti.hull import generic_torus_semistable
from gitbetti.kirwan import binary_forms_unstable_codims, equivariant_ss_series
from gitbetti.series import TruncatedSeries, duality_complete
from gitbetti.strata import (
    canonical_support,
    index_set_search,
    parse_support,
    shifted_problem,
    stratum_codim,
)
from gitbetti.worksheet import evaluate_worksheet, parse_worksheet, shipped_worksheet


@pytest.fixture(scope="module")
def fourfold_report():
    return evaluate_worksheet(parse_worksheet(shipped_worksheet("cubic4fold.ws")))


def even_series(values, top):
    return TruncatedSeries.from_terms({2 * i: c for i, c in enumerate(values)}, top)


def support_key(report, iv):
    return canonical_support([report.table.exponents[i] for i in iv.z_support])


def differing_degrees(a, b):
    return [k for k in range(min(a.truncation, b.truncation) + 1) if a[k] != b[k]]


def test_criterion_1_plane_cubics(criterion):
    with criterion("1", "plane cubics equivariant series through t^30"):
        t0 = time.perf_counter()
        got = equivariant_ss_series(3, 3, 30)
        elapsed = time.perf_counter() - t0
        # [PAPER] equivariant series of semistable plane cubics
        want = evaluate("(1+t^2+t^10+t^12)/((1-t^4)(1-t^6))", 30)
        diffs = differing_degrees(got, want)
        assert not diffs, f"first difference at t^{diffs[0]}: expected {want[diffs[0]]}, computed {got[diffs[0]]}"
        assert elapsed < 1


def test_criterion_2_cubic_surfaces(criterion):
    with criterion("2", "cubic surfaces: two index vectors, codimensions 4 and 5, second stratum 1/(1-t^2)"):
        t0 = time.perf_counter()
        report = index_set_search(4, 3, codim_mode="paper")
        elapsed = time.perf_counter() - t0
        problems = []
        if len(report.index_vectors) != 2:
            problems.append(f"{len(report.index_vectors)} index vectors, expected 2")
        codims = sorted(iv.codim("paper") for iv in report.index_vectors)
        if codims != [4, 5]:
            problems.append(f"paper-mode codimensions {codims}")
        rootcount = sorted(iv.codim_rootcount for iv in report.index_vectors)
        if rootcount[:2] != [4, 5]:
            problems.append(f"smallest root-counted codimensions {rootcount[:2]}")
        beta2 = canonical_support(parse_support("x1*C[x2,x3]_2, x0*x1^2", 4, 3))
        got = evaluate("StratumSeries(4, 3, x1*C[x2,x3]_2 + x0*x1^2)", 20, builtins=_builtins())
        # [PAPER] second cubic surface stratum
        want = evaluate("1/(1-t^2)", 20)
        if got != want:
            problems.append(f"second stratum recursion first differs at t^{differing_degrees(got, want)[0]}")
        assert any(support_key(report, iv) == beta2 for iv in report.index_vectors)
        assert elapsed < 10
        assert not problems, "; ".join(problems)


def _builtins():
    from gitbetti.worksheet import EXTRA_BUILTINS

    return EXTRA_BUILTINS


# [PAPER] unstable index vectors of cubic threefolds, rows 1 to 8
TABLE_ONE = {
    1: "C[x1,x2,x3,x4]_3",
    2: "x1*x2^2, x1*x3^2, x1*x2*x4",
    3: "x1*C[x2,x3,x4]_2, x0*x1^2",
    4: "x1^2*x3, x1^2*x4, x2^2*x3, x2^2*x4, x1*x2*x3, x1*x2*x4",
    5: "x2^3, x1*x3^2, x1^2*x4",
    6: "C[x1,x2,x3]_3",
    7: "x2^3, x1*x2*x3, x1^2*x4",
    8: "x1^2*x4, x1*x2*x3, x1*x2^2, x1*x3^2",
}
NONEMPTY_ROWS = {1, 6}


def test_criterion_3_table_one(criterion):
    with criterion("3", "cubic threefolds: eight index vectors matching the published table, rows 1 and 6 nonempty"):
        t0 = time.perf_counter()
        report = index_set_search(5, 3)
        elapsed = time.perf_counter() - t0
        found = {support_key(report, iv): iv for iv in report.index_vectors}
        problems = []
        if len(report.index_vectors) != 8:
            problems.append(f"{len(report.index_vectors)} index vectors, expected 8")
        for row, text in TABLE_ONE.items():
            iv = found.get(canonical_support(parse_support(text, 5, 3)))
            if iv is None:
                problems.append(f"row {row} is not an index vector")
                continue
            sub, _ = shifted_problem(report.table.weights, iv, (tuple(range(5)),))
            torus = generic_torus_semistable(sub)
            want_nonempty = row in NONEMPTY_ROWS
            if torus.nonempty != want_nonempty:
                problems.append(f"row {row}: torus test nonempty={torus.nonempty}")
            if not torus.nonempty and not torus.verify(sub):
                problems.append(f"row {row}: separating direction fails to verify")
            if iv.nonempty_ss != want_nonempty:
                problems.append(f"row {row}: stabilizer test nonempty={iv.nonempty_ss}")
        assert elapsed < 300
        assert not problems, "; ".join(problems)


def test_criterion_4_fourfold_search(criterion):
    with criterion("4", "cubic fourfolds: x0-free index vector with both codimension conventions"):
        t0 = time.perf_counter()
        report = index_set_search(6, 3, codim_cutoff=10, codim_mode="paper")
        elapsed = time.perf_counter() - t0
        x0_free = canonical_support(parse_support("C[x1,x2,x3,x4,x5]_3", 6, 3))
        hits = [iv for iv in report.index_vectors if support_key(report, iv) == x0_free]
        assert len(hits) == 1
        iv = hits[0]
        assert len(iv.z_support) == 35
        # [PAPER] published codimension of the x0-free stratum
        assert iv.codim("paper") == 6
        # [DERIVED] root count of the parabolic
        assert iv.codim_rootcount == stratum_codim(iv, 6, 3) == 16
        assert elapsed < 1800


def test_criterion_5_kirwan_blowup(criterion, fourfold_report):
    with criterion("5", "Kirwan blowup Poincare polynomial, mod t^20 and full palindrome"):
        # [PAPER] Poincare polynomial of the Kirwan blowup
        half = [1, 9, 26, 51, 81, 115, 152, 193, 236, 280, 324]
        mtilde = fourfold_report["Mtilde"].series
        full = fourfold_report["Mtilde_full"].series
        assert full.truncation == 40
        assert all(full[k] == full[40 - k] for k in range(41))
        assert mtilde.even_coeffs() == half
        assert full == duality_complete(even_series(half, 20), 20)


BLOWDOWNS = ["mu", "gamma", "alpha", "delta", "tau", "xi"]


def test_criterion_6_blowdowns(criterion, fourfold_report):
    with criterion("6", "blow-down terms: stored goldens exact, recomputation differs only at the B_mu t^22 typo"):
        problems = []
        for name in BLOWDOWNS:
            printed = fourfold_report[f"B_{name}_printed"]
            if printed.status != "match":
                problems.append(f"B_{name} golden does not reproduce")
            mech = fourfold_report[f"B_{name}"].series
            if name == "mu":
                # the omitted t^22 of the second factor, restored from its partner t^12
                mech = mech - evaluate("3t^22 (1+3t^2+3t^4+t^6)", 40)
            diffs = differing_degrees(mech, printed.series)
            if diffs:
                problems.append(f"B_{name} recomputation differs at degrees {diffs}")
        if fourfold_report["B_mu"].status != "known":
            problems.append("the B_mu typo is not flagged")
        assert not problems, "; ".join(problems)


def test_criterion_7a_mhat(criterion, fourfold_report):
    with criterion("7a", "intersection Poincare polynomial of the two-step blowup"):
        # [PAPER] even coefficients through t^20
        want = [1, 3, 8, 17, 29, 44, 61, 78, 99, 121, 151]
        got = fourfold_report["Mhat"].series.truncate(20).even_coeffs()
        assert got == want


def test_criterion_7b_baily_borel(criterion, fourfold_report):
    with criterion("7b", "Baily-Borel intersection Poincare polynomial through t^20"):
        # [PAPER] even coefficients through t^20
        want = [1, 2, 5, 13, 24, 38, 54, 70, 88, 107, 137]
        assert fourfold_report["epsilon_inf"].series.truncate(20).even_coeffs() == want
        assert fourfold_report["epsilon_inf"].status == "match"
        assert fourfold_report["BB_full"].series.truncate(20).even_coeffs() == want


def test_criterion_7c_exceptional_intersection(criterion, fourfold_report):
    with criterion("7c", "SL(2) quotient series of the exceptional intersection"):
        t0 = time.perf_counter()
        degrees = [8, 12]
        weights = [2 * i - d for d in degrees for i in range(d + 1)]
        assert sum(1 for w in weights if w < 0) == 10
        assert min(binary_forms_unstable_codims(degrees).values()) >= 10
        got = evaluate("Dual(18, BinaryForms(8, 12))", 36, builtins=_builtins())
        # [PAPER] leading coefficients 1, 1, 2, 2, 3
        assert got.even_coeffs()[:5] == [1, 1, 2, 2, 3]
        assert fourfold_report["E_chi_omega"].status == "match"
        assert got == fourfold_report["E_chi_omega"].series.truncate(36)
        assert time.perf_counter() - t0 < 1


def test_criterion_8_properties(criterion):
    with criterion("8", "property suites: hull oracle, ring axioms, duality, codimension agreement, determinism"):
        t0 = time.perf_counter()
        test_hull.test_hull_matches_face_enumeration()
        test_series.test_ring_axioms()
        test_series.test_duality_idempotent_and_palindromic()
        for problem in [(3, 3), (4, 3), (5, 3)]:
            report = index_set_search(*problem)
            for iv in report.index_vectors:
                assert stratum_codim(iv, *problem) == iv.codim_rootcount
        test_strata.test_parallel_identical()
        assert time.perf_counter() - t0 < 60
