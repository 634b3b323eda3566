"""Kirwan's formula, blowup corrections and the intersection-cohomology ledger.

Equivariant series are computed by the recursion

    P^L(P(V)^ss) = P(P(V)) P(BL) - sum_{beta != 0} t^(2 codim S_beta) P^{Stab beta}(Z_beta^ss)

over Levi subgroups ``L`` of ``SL(m)``.  When ``Z_beta`` is a full space of
forms in one level set of ``beta`` the stabiliser splits as a central torus
times ``SL`` blocks and the recursion re-enters a smaller hypersurface problem,
which is where codimension overrides apply.  Any other stabiliser is handled by
the same recursion on its own Levi, with root-counted codimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from .series import (
    DEFAULT_TRUNCATION,
    GroupDescriptor,
    SeriesError,
    TruncatedSeries,
    classifying_series,
    duality_complete,
    finite_geometric,
    projective_series,
)
from .hull import nearest_point_hull
from .strata import (
    Blocks,
    canonical_support,
    default_overrides,
    paper_strata,
    OverrideTable,
    Stratum,
    index_vectors,
    lookup_override,
    shifted_problem,
)
from .weights import Weight, enumerate_monomials, level_sets, monomial_str, weight_of


class LedgerError(ValueError):
    """A ledger step produced an impossible value (e.g. a negative Betti number)."""


class UnresolvedStabilizer(ValueError):
    """The stabiliser of an index vector is not a torus times SL on a sub-form space."""


# -- stabiliser splitting ------------------------------------------------------------

@dataclass(frozen=True)
class StabilizerSplit:
    """``Stab(beta)`` acting on ``Z_beta`` as (central torus) x (SL blocks) x (residual).

    The residual is ``SL(n_vars)`` on degree-``degree`` forms, or ``None`` when
    ``Z_beta`` is a single point.  ``idle`` lists SL blocks acting trivially.
    """

    central_torus_rank: int
    idle: GroupDescriptor
    residual: Optional[tuple[int, int]]
    active_level: tuple[int, ...] = ()

    @property
    def group(self) -> GroupDescriptor:
        return GroupDescriptor(torus_rank=self.central_torus_rank) * self.idle

    def classifying(self, truncation: int = DEFAULT_TRUNCATION) -> TruncatedSeries:
        return classifying_series(self.group, truncation)


def stabilizer_split(beta: Sequence[Fraction], exponents: Sequence[Sequence[int]]) -> StabilizerSplit:
    """Recognise ``Z_beta = x^J * C[level]_k`` for one level set of ``beta``.

    ``exponents`` are the monomials of ``Z_beta``.
    """
    levels = level_sets(beta)
    rank = len(levels) - 1
    exps = [tuple(e) for e in exponents]
    if len(exps) == 1:
        idle = GroupDescriptor(sl_blocks=tuple(len(l) for l in levels if len(l) > 1))
        return StabilizerSplit(rank, idle, None)
    for level in levels:
        outside = [i for i in range(len(beta)) if i not in level]
        fixed = {tuple(e[i] for i in outside) for e in exps}
        if len(fixed) != 1:
            continue
        k = sum(exps[0][i] for i in level)
        inside = {tuple(e[i] for i in level) for e in exps}
        if len(level) < 2 or len(inside) != _count_forms(len(level), k):
            continue
        idle = GroupDescriptor(
            sl_blocks=tuple(len(l) for l in levels if len(l) > 1 and l != level)
        )
        return StabilizerSplit(rank, idle, (len(level), k), tuple(level))
    raise UnresolvedStabilizer(
        "Z_beta is not a full space of forms in one level set of beta"
    )


def _count_forms(n: int, k: int) -> int:
    from math import comb

    return comb(n - 1 + k, k)


# -- the recursion ----------------------------------------------------------------

def levi_group(blocks: Blocks) -> GroupDescriptor:
    return GroupDescriptor(
        torus_rank=len(blocks) - 1, sl_blocks=tuple(len(b) for b in blocks if len(b) > 1)
    )


@lru_cache(maxsize=None)
def _levi_index(weights: tuple[Weight, ...], blocks: Blocks) -> tuple[Stratum, ...]:
    return tuple(index_vectors(list(weights), blocks))


@lru_cache(maxsize=None)
def _hypersurface_index(n_vars: int, d: int) -> tuple[Stratum, ...]:
    table = enumerate_monomials(n_vars, d)
    return tuple(index_vectors(table.weights, (tuple(range(n_vars)),)))


def levi_ss_series(weights: Sequence[Weight], blocks: Blocks, truncation: int) -> TruncatedSeries:
    """``P^L(P(V)^ss)`` for the Levi ``L`` of ``blocks`` acting on the span of ``weights``."""
    return _levi_ss(tuple(sorted(weights)), tuple(blocks), truncation)


@lru_cache(maxsize=None)
def _levi_ss(weights: tuple[Weight, ...], blocks: Blocks, n: int) -> TruncatedSeries:
    total = projective_series(len(weights) - 1, n) * classifying_series(levi_group(blocks), n)
    for s in _levi_index(weights, blocks):
        # negative expected codimension forces Z_beta^ss to be empty
        if s.codim < 0 or 2 * s.codim > n:
            continue
        sub, sub_blocks = shifted_problem(weights, s, blocks)
        total = total - _levi_ss(tuple(sorted(sub)), sub_blocks, n - 2 * s.codim).pad(n).shift(2 * s.codim)
    return total


@dataclass
class RecursionTrace:
    """One removal term of a hypersurface problem, for reporting."""

    n_vars: int
    degree: int
    beta: Weight
    support: list[str]
    codim_rootcount: Optional[int]
    codim_used: int
    split: Optional[StabilizerSplit]
    contribution: TruncatedSeries


def equivariant_ss_series(
    n_vars: int,
    d: int,
    truncation: int = DEFAULT_TRUNCATION,
    codim_mode: str = "rootcount",
    overrides: Optional[OverrideTable] = None,
    trace: Optional[list] = None,
) -> TruncatedSeries:
    """``P^{SL(n_vars)}(P(C[x]_d)^ss)`` modulo ``t^(N+1)`` by Kirwan's recursion.

    ``rootcount`` uses the computed index set with root-counted codimensions.
    ``paper`` replaces the index set of every problem listed in the shipped
    published-strata table by its rows, codimensions and stabiliser series.
    ``paper_override_table`` keeps the computed index set and only pins the
    codimensions found in ``overrides`` (default: the shipped table).
    """
    if n_vars < 2:
        raise ValueError("equivariant_ss_series needs n_vars >= 2")
    if codim_mode not in ("rootcount", "paper", "paper_override_table"):
        raise ValueError(f"unknown codim mode {codim_mode!r}")
    if codim_mode == "rootcount":
        overrides = None
    elif overrides is None:
        overrides = default_overrides()
    return _hypersurface(n_vars, d, truncation, _freeze(overrides), codim_mode == "paper", trace)


def _freeze(overrides: Optional[OverrideTable]):
    if not overrides:
        return None
    return tuple(sorted((k, tuple(v)) for k, v in overrides.items()))


def _hypersurface(n_vars, d, n, frozen, paper=False, trace=None) -> TruncatedSeries:
    if trace is None:
        return _hypersurface_cached(n_vars, d, n, frozen, paper)
    return _hypersurface_impl(n_vars, d, n, frozen, paper, trace)


@lru_cache(maxsize=None)
def _hypersurface_cached(n_vars, d, n, frozen, paper) -> TruncatedSeries:
    return _hypersurface_impl(n_vars, d, n, frozen, paper, None)


def _removal(n_vars, d, n, codim, beta, exps, frozen, paper, inner_expr=None, fallback=None):
    """``(inner series at order n - 2 codim, split)`` for one stratum."""
    sub_n = n - 2 * codim
    if inner_expr is not None and inner_expr != "auto":
        from .expr import evaluate

        return evaluate(inner_expr, sub_n), None
    try:
        split = stabilizer_split(beta, exps)
    except UnresolvedStabilizer:
        if fallback is None:
            raise
        return fallback(sub_n), None
    if split.residual is None:
        return split.classifying(sub_n), split
    return split.classifying(sub_n) * _hypersurface(*split.residual, sub_n, frozen, paper), split


def _hypersurface_impl(n_vars, d, n, frozen, paper, trace) -> TruncatedSeries:
    overrides = dict(frozen) if frozen else None
    table = enumerate_monomials(n_vars, d)
    blocks: Blocks = (tuple(range(n_vars)),)
    total = projective_series(len(table) - 1, n) * classifying_series(levi_group(blocks), n)
    published = paper_strata().for_problem(n_vars, d) if paper else None
    if published is not None:
        for row in published:
            weights = [weight_of(e) for e in row.exponents]
            beta = nearest_point_hull(weights).point
            if 2 * row.codim > n:
                continue
            inner_series, split = _removal(
                n_vars, d, n, row.codim, beta, row.exponents, frozen, paper, row.inner
            )
            term = inner_series.pad(n).shift(2 * row.codim)
            total = total - term
            if trace is not None:
                trace.append(
                    RecursionTrace(n_vars, d, beta, [monomial_str(e) for e in row.exponents], None, row.codim, split, term)
                )
        return total
    for s in _hypersurface_index(n_vars, d):
        exps = [table.exponents[i] for i in s.z_support]
        ov = lookup_override(overrides, n_vars, d, exps)
        codim = ov[0] if ov else s.codim
        # negative expected codimension forces Z_beta^ss to be empty
        if s.codim < 0 or 2 * codim > n:
            continue

        def fallback(sub_n, s=s):
            sub, sub_blocks = shifted_problem(table.weights, s, blocks)
            return _levi_ss(tuple(sorted(sub)), sub_blocks, sub_n)

        inner_series, split = _removal(n_vars, d, n, codim, s.beta, exps, frozen, paper, None, fallback)
        term = inner_series.pad(n).shift(2 * codim)
        total = total - term
        if trace is not None:
            trace.append(
                RecursionTrace(n_vars, d, s.beta, [table.monomial(i) for i in s.z_support], s.codim, codim, split, term)
            )
    return total


def stratum_ss_series(
    n_vars: int, d: int, stratum: Stratum, truncation: int = DEFAULT_TRUNCATION,
    codim_mode: str = "rootcount", overrides: Optional[OverrideTable] = None,
) -> TruncatedSeries:
    """``P^{Stab beta}(Z_beta^ss)`` for one index vector of a hypersurface problem."""
    table = enumerate_monomials(n_vars, d)
    exps = [table.exponents[i] for i in stratum.z_support]
    if codim_mode == "rootcount":
        overrides = None
    elif overrides is None:
        overrides = default_overrides()

    def fallback(sub_n):
        sub, sub_blocks = shifted_problem(table.weights, stratum, (tuple(range(n_vars)),))
        return levi_ss_series(sub, sub_blocks, sub_n)

    inner_expr = None
    if codim_mode == "paper":
        for row in paper_strata().for_problem(n_vars, d) or []:
            if canonical_support(row.exponents) == canonical_support(exps):
                inner_expr = row.inner
    series, _ = _removal(
        n_vars, d, truncation, 0, stratum.beta, exps, _freeze(overrides), codim_mode == "paper", inner_expr, fallback
    )
    return series


# -- blowup corrections -----------------------------------------------------------

@dataclass(frozen=True)
class BlowupStep:
    """One Kirwan blowup: ``A = (t^2 + ... + t^(2 d_R)) * center - sum t^(2c) * series``.

    ``shifted_removals`` are removal series already carrying their ``t^(2c)`` factors.
    """

    name: str
    d_r: int
    center_series: TruncatedSeries
    removal_terms: tuple[tuple[int, TruncatedSeries], ...] = ()
    shifted_removals: tuple[TruncatedSeries, ...] = ()
    provenance: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.d_r < 1:
            raise ValueError(f"step {self.name}: d_R must be at least 1")
        if any(c < 1 for c, _ in self.removal_terms):
            raise ValueError(f"step {self.name}: removal codimensions must be at least 1")


def blowup_correction(step: BlowupStep, truncation: int = DEFAULT_TRUNCATION) -> TruncatedSeries:
    n = truncation
    center = _at(step.center_series, n)
    out = finite_geometric(2, 2 * step.d_r, n) * center
    for codim, series in step.removal_terms:
        out = out - _at(series, n).shift(2 * codim)
    for series in step.shifted_removals:
        out = out - _at(series, n)
    return out


def _at(s: TruncatedSeries, n: int) -> TruncatedSeries:
    if s.truncation >= n:
        return s.truncate(n)
    raise SeriesError(f"series known to t^{s.truncation} is needed to t^{n}")


def rank1_normal_removal(
    weights: Sequence[tuple[int, int]],
    base_factor: TruncatedSeries,
    truncation: int = DEFAULT_TRUNCATION,
    sides: str = "positive",
    convention: str = "below",
) -> TruncatedSeries:
    """Unstable-stratum removal for a rank-one torus acting on a normal space.

    ``weights`` lists ``(weight, multiplicity)``.  Each distinct nonzero weight
    ``w`` taken on an allowed side (``positive`` or ``both``) gives the term
    ``t^(2 codim) P(P^(mult-1)) / (1 - t^2)``, with ``codim`` the multiplicity
    of weights strictly on the far side of ``w`` from the origin: below ``w``
    for ``w > 0``, above ``w`` for ``w < 0``.  The ``minus_one`` convention
    subtracts one from that count (the weight line itself is not counted as
    normal).  The sum is multiplied by ``base_factor``.
    """
    if sides not in ("positive", "both"):
        raise ValueError(f"unknown sides option {sides!r}")
    if convention not in ("below", "minus_one"):
        raise ValueError(f"unknown codimension convention {convention!r}")
    mult: dict[int, int] = {}
    for w, m in weights:
        if m < 0:
            raise ValueError("multiplicities must be nonnegative")
        mult[w] = mult.get(w, 0) + m
    positives = [w for w, m in mult.items() if w > 0 and m > 0]
    if not positives:
        raise ValueError("no positive weights: nothing unstable to remove")
    chosen = [w for w, m in mult.items() if m > 0 and (w > 0 or (sides == "both" and w < 0))]
    n = truncation
    torus = classifying_series(GroupDescriptor(torus_rank=1), n)
    total = TruncatedSeries.zero(n)
    for w in sorted(chosen, reverse=True):
        if w > 0:
            codim = sum(m for v, m in mult.items() if v < w)
        else:
            codim = sum(m for v, m in mult.items() if v > w)
        if convention == "minus_one":
            codim -= 1
        if 2 * codim > n:
            continue
        total = total + (projective_series(mult[w] - 1, n) * torus).shift(2 * codim)
    return _at(base_factor, n) * total


def rank1_codims(weights: Sequence[tuple[int, int]], sides: str = "positive", convention: str = "below") -> dict[int, int]:
    """The codimension assigned to each removable weight by :func:`rank1_normal_removal`."""
    mult: dict[int, int] = {}
    for w, m in weights:
        mult[w] = mult.get(w, 0) + m
    out = {}
    for w, m in mult.items():
        if m == 0 or w == 0 or (w < 0 and sides == "positive"):
            continue
        c = sum(k for v, k in mult.items() if (v < w if w > 0 else v > w))
        out[w] = c - 1 if convention == "minus_one" else c
    return out


# -- intersection cohomology blow-down ------------------------------------------------

@dataclass(frozen=True)
class BlowdownStep:
    """Data of one blow-down in the IH ledger.

    ``fiber_series`` is the Poincare series of the fiber quotient ``P(N)/R``;
    ``lambda_bound`` is the last degree shifted by two (``lambda(q) = q - 2``
    for ``q <= lambda_bound``); it defaults to ``fiber_quotient_complex_dim``.
    """

    name: str
    base_series: TruncatedSeries
    fiber_series: TruncatedSeries
    fiber_quotient_complex_dim: int
    lambda_bound: Optional[int] = None
    provenance: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def bound(self) -> int:
        return self.fiber_quotient_complex_dim if self.lambda_bound is None else self.lambda_bound


def lambda_shift(q: int, bound: int) -> int:
    """``lambda(q) = q - 2`` up to ``bound`` and ``q`` above it."""
    return q - 2 if q <= bound else q


def shifted_fiber(fiber: TruncatedSeries, bound: int, truncation: int) -> TruncatedSeries:
    """``F(t) = sum_q f_{lambda(q)} t^q``, with ``f`` the fiber coefficients."""
    terms = {}
    for q in range(truncation + 1):
        src = lambda_shift(q, bound)
        if 0 <= src <= fiber.truncation:
            terms[q] = fiber[src]
    return TruncatedSeries.from_terms(terms, truncation)


def ic_blowdown(step: BlowdownStep, truncation: int = DEFAULT_TRUNCATION) -> TruncatedSeries:
    """``B(t) = base(t) * F(t)``; subtracting ``B`` from IH of the blowup gives IH downstairs.

    The fiber series must be known to ``max(truncation, bound) `` or be a polynomial.
    """
    n = truncation
    need = min(n, step.bound + 2) if step.bound < n else n
    if step.fiber_series.truncation < need and step.fiber_series.truncation < n:
        raise SeriesError(f"step {step.name}: fiber series known only to t^{step.fiber_series.truncation}")
    base = step.base_series.pad(n) if step.base_series.truncation < n else step.base_series.truncate(n)
    return base * shifted_fiber(step.fiber_series, step.bound, n)


def fiber_from_half(half: TruncatedSeries, complex_dim: int) -> TruncatedSeries:
    """Complete a fiber-quotient series known up to its middle degree by Poincare duality."""
    return duality_complete(half, complex_dim)


# -- decomposition-theorem bookkeeping ---------------------------------------------------

@dataclass(frozen=True)
class DecompStep:
    """A contraction ``X -> Y`` collapsing a family of projective spaces over ``Z``.

    ``codim_c`` is the real codimension ``c`` of ``Z``.
    ``pbundle``: ``IH^k(X) = IH^k(Y) + sum_{j even, 2..2m} H^(k - c + j)(Z)``.
    ``semismall``: ``IH^k(X) = IH^k(Y) + sum_{j=0..m} H^(k - n + 2j)(Z)`` with
    ``n`` the ambient real degree of the top summand; ``m = 0`` is a no-op.
    """

    kind: str
    z_series: TruncatedSeries
    codim_c: int
    fiber_dim_m: int
    ambient_dim_n: int = 0

    def __post_init__(self):
        if self.kind not in ("pbundle", "semismall"):
            raise ValueError(f"unknown decomposition kind {self.kind!r}")
        if self.codim_c < 1:
            raise ValueError("codimension c must be at least 1")
        if self.fiber_dim_m < 0 or (self.kind == "pbundle" and self.fiber_dim_m < 1):
            raise ValueError("fiber dimension must be at least 1")


def _nonneg(s: TruncatedSeries, what: str) -> TruncatedSeries:
    for k, c in enumerate(s.coeffs):
        if c < 0:
            raise LedgerError(f"{what}: negative coefficient {c} at t^{k}")
    return s


def _shifted_sum(z: TruncatedSeries, offsets: Sequence[int], truncation: int) -> TruncatedSeries:
    """Coefficient ``k`` is ``sum_o z[k - o]`` over indices ``z`` knows."""
    terms: dict[int, Fraction] = {}
    for k in range(truncation + 1):
        c = Fraction(0)
        for o in offsets:
            src = k - o
            if 0 <= src <= z.truncation:
                c += z[src]
        if c:
            terms[k] = c
    return TruncatedSeries.from_terms(terms, truncation)


def pbundle_correction(step: DecompStep, truncation: int = DEFAULT_TRUNCATION) -> TruncatedSeries:
    """``sum_{j even, 2..2m} H^(k - c + j)(Z)`` in degree ``k``."""
    offsets = [step.codim_c - j for j in range(2, 2 * step.fiber_dim_m + 1, 2)]
    return _shifted_sum(step.z_series, offsets, truncation)


def decomp_pbundle(direction: str, known: TruncatedSeries, step: DecompStep, truncation: Optional[int] = None) -> TruncatedSeries:
    """Move IH Betti data across a projective-bundle contraction.

    ``inverse`` recovers ``IH(Y)`` from ``IH(X)``; ``forward`` goes back.
    """
    if step.kind != "pbundle":
        raise ValueError("decomp_pbundle needs a pbundle step")
    n = known.truncation if truncation is None else truncation
    corr = pbundle_correction(step, n)
    k = known.truncate(n) if known.truncation > n else known.pad(n)
    if direction == "inverse":
        return _nonneg(k - corr, "decomp_pbundle")
    if direction == "forward":
        return k + corr
    raise ValueError(f"unknown direction {direction!r}")


def semismall_correction(step: DecompStep, truncation: int = DEFAULT_TRUNCATION) -> TruncatedSeries:
    """``sum_{j=0..m} H^(k - n + 2j)(Z)`` in degree ``k``; empty for ``m = 0``."""
    if step.fiber_dim_m == 0:
        return TruncatedSeries.zero(truncation)
    offsets = [step.ambient_dim_n - 2 * j for j in range(step.fiber_dim_m + 1)]
    return _shifted_sum(step.z_series, offsets, truncation)


def decomp_semismall(known: TruncatedSeries, step: DecompStep, truncation: Optional[int] = None) -> TruncatedSeries:
    if step.kind != "semismall":
        raise ValueError("decomp_semismall needs a semismall step")
    n = known.truncation if truncation is None else truncation
    k = known.truncate(n) if known.truncation > n else known.pad(n)
    return _nonneg(k - semismall_correction(step, n), "decomp_semismall")


# -- SL(2) on binary forms -----------------------------------------------------------

def binary_forms_ss_series(degrees: Sequence[int], truncation: int = DEFAULT_TRUNCATION) -> TruncatedSeries:
    """``P^{SL(2)}(P(V)^ss)`` for ``V`` a sum of binary-form spaces ``H^0(O(k))``.

    The maximal torus weights of ``H^0(O(k))`` are ``k, k-2, ..., -k``.  Each
    negative weight ``-w`` (taken dominant as ``w``) is an index vector whose
    stratum has codimension ``#{weights < w}`` minus one root, and whose
    critical set is the weight-``w`` space acted on by the torus.
    """
    weights = []
    for k in degrees:
        if k < 0:
            raise ValueError("binary form degree must be nonnegative")
        weights += list(range(-k, k + 1, 2))
    n = truncation
    total = projective_series(len(weights) - 1, n) * classifying_series(GroupDescriptor(sl_blocks=(2,)), n)
    torus = classifying_series(GroupDescriptor(torus_rank=1), n)
    for w in sorted({w for w in weights if w > 0}):
        mult = weights.count(w)
        codim = sum(1 for v in weights if v < w) - 1
        if 2 * codim > n:
            continue
        total = total - (projective_series(mult - 1, n) * torus).shift(2 * codim)
    return total


def binary_forms_unstable_codims(degrees: Sequence[int]) -> dict[int, int]:
    weights = []
    for k in degrees:
        weights += list(range(-k, k + 1, 2))
    return {w: sum(1 for v in weights if v < w) - 1 for w in sorted({w for w in weights if w > 0})}
