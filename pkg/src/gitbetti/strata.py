"""Kirwan index vectors for Levi subgroups of SL(m) acting on monomial spaces.

A *problem* is a set of torus weights ``W`` (exact vectors in ``Q^m``) spanning
a projective space ``P(V)``, acted on by the Levi subgroup
``L = S(prod GL(b))`` of ``SL(m)`` cut out by a partition of the coordinates
into blocks.  The top-level case (one block, all monomials of degree ``d``) is
``SL(m)`` on degree-``d`` hypersurfaces; the recursion in :mod:`gitbetti.kirwan`
produces the Levi cases.

The index set is found by enumerating affinely independent subsets of ``W``
(at most ``m`` points), taking the minimum-norm point of their affine hull and
keeping it when it lies strictly inside the simplex.  Every such point is an
index vector, and every index vector arises this way.  Subsets are enumerated
up to the Weyl group of ``L``, which leaves ``W`` invariant.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .hull import SingularSystem, affine_min_norm, combine, generic_torus_semistable, nearest_point_hull
from .weights import (
    Weight,
    WeightTable,
    enumerate_monomials,
    inner,
    level_sets,
    monomial_str,
    norm_sq,
    parabolic_dim,
    pairing_supports,
    parse_monomial,
)

Blocks = tuple[tuple[int, ...], ...]


# -- Weyl group of a Levi ------------------------------------------------------

def block_permutations(blocks: Blocks) -> list[tuple[int, ...]]:
    """All coordinate permutations preserving each block (the Weyl group of the Levi)."""
    m = sum(len(b) for b in blocks)
    per_block = [list(itertools.permutations(b)) for b in blocks]
    out = []
    for choice in itertools.product(*per_block):
        perm = list(range(m))
        for b, img in zip(blocks, choice):
            for src, dst in zip(b, img):
                perm[src] = dst
        out.append(tuple(perm))
    return out


def act(perm: Sequence[int], v: Sequence) -> tuple:
    """Permute coordinates: coordinate ``i`` moves to position ``perm[i]``."""
    out = [None] * len(v)
    for i, x in enumerate(v):
        out[perm[i]] = x
    return tuple(out)


def dominate(v: Sequence[Fraction], blocks: Blocks) -> tuple[Weight, tuple[int, ...]]:
    """Sort ``v`` decreasingly inside each block; return the result and the permutation used."""
    perm = list(range(len(v)))
    for b in blocks:
        order = sorted(b, key=lambda i: (-v[i], i))
        for dst, src in zip(b, order):
            perm[src] = dst
    perm = tuple(perm)
    return act(perm, v), perm


def is_block_dominant(v: Sequence[Fraction], blocks: Blocks) -> bool:
    return all(v[b[k]] >= v[b[k + 1]] for b in blocks for k in range(len(b) - 1))


def refine_blocks(blocks: Blocks, beta: Sequence[Fraction]) -> Blocks:
    """Blocks of the centraliser of ``beta`` inside the Levi."""
    out = []
    for b in blocks:
        for value in sorted({beta[i] for i in b}, reverse=True):
            out.append(tuple(i for i in b if beta[i] == value))
    return tuple(out)


def negative_root_count(beta: Sequence[Fraction], blocks: Blocks) -> int:
    """``dim L - dim P_beta``: roots of the Levi pairing negatively with ``beta``."""
    return sum(1 for b in blocks for i in b for j in b if beta[i] < beta[j])


# -- index vectors ----------------------------------------------------------------

@dataclass(frozen=True)
class Stratum:
    """One nonzero index vector of a problem, with its supports and codimension."""

    beta: Weight
    z_support: tuple[int, ...]
    y_support: tuple[int, ...]
    n_beta: int
    codim: int

    @property
    def norm_sq(self) -> Fraction:
        return norm_sq(self.beta)


def _rank(vectors: list[tuple[Fraction, ...]]) -> int:
    rows = [list(v) for v in vectors]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank][col]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / p
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def affinely_independent(points: Sequence[Sequence[Fraction]]) -> bool:
    if len(points) <= 1:
        return True
    p0 = points[0]
    diffs = [tuple(a - b for a, b in zip(p, p0)) for p in points[1:]]
    return _rank(diffs) == len(diffs)


def _candidate(weights: Sequence[Weight], subset: Sequence[int]) -> Optional[Weight]:
    """Minimum-norm point of ``aff(subset)`` if it is nonzero and strictly inside the simplex."""
    pts = [weights[i] for i in subset]
    try:
        mu = affine_min_norm(pts)
    except SingularSystem:
        return None
    if any(c <= 0 for c in mu):
        return None
    beta = combine(pts, mu)
    if all(c == 0 for c in beta):
        return None
    return beta


def _evaluate_batch(args) -> list[Weight]:
    weights, subsets = args
    out = []
    for s in subsets:
        b = _candidate(weights, s)
        if b is not None:
            out.append(b)
    return out


class _OrbitCanon:
    """Canonical representatives of index subsets under a permutation group."""

    def __init__(self, index_perms: list[tuple[int, ...]]):
        self.table = np.array(index_perms, dtype=np.int64)

    def canon(self, subset: Sequence[int]) -> tuple[int, ...]:
        images = np.sort(self.table[:, list(subset)], axis=1)
        keys = [images[:, k] for k in range(images.shape[1] - 1, -1, -1)]
        best = np.lexsort(keys)[0]
        return tuple(int(x) for x in images[best])


def _index_permutations(weights: Sequence[Weight], blocks: Blocks) -> list[tuple[int, ...]]:
    lookup = {w: i for i, w in enumerate(weights)}
    out = []
    for perm in block_permutations(blocks):
        try:
            out.append(tuple(lookup[act(perm, w)] for w in weights))
        except KeyError:
            raise ValueError("weight set is not invariant under the Weyl group of the Levi")
    return out


def enumerate_subsets(
    weights: Sequence[Weight], blocks: Blocks, symmetry: bool = True
) -> list[tuple[int, ...]]:
    """Affinely independent subsets of size 1..m, optionally one per Weyl orbit."""
    m = len(weights[0])
    n = len(weights)
    if symmetry:
        canon = _OrbitCanon(_index_permutations(weights, blocks))
        level = sorted({canon.canon((i,)) for i in range(n)})
        out = list(level)
        for _ in range(2, m + 1):
            seen = set()
            nxt = []
            for s in level:
                for e in range(n):
                    if e in s:
                        continue
                    c = canon.canon(s + (e,))
                    if c in seen:
                        continue
                    seen.add(c)
                    if affinely_independent([weights[i] for i in c]):
                        nxt.append(c)
            level = sorted(nxt)
            out.extend(level)
            if not level:
                break
        return out

    out = []

    def extend(prefix: tuple[int, ...], start: int):
        out.append(prefix)
        if len(prefix) == m:
            return
        for e in range(start, n):
            cand = prefix + (e,)
            if affinely_independent([weights[i] for i in cand]):
                extend(cand, e + 1)

    for i in range(n):
        extend((i,), i + 1)
    return out


def index_vectors(
    weights: Sequence[Weight],
    blocks: Blocks,
    symmetry: bool = True,
    jobs: int = 1,
) -> list[Stratum]:
    """All nonzero index vectors of ``L = S(prod GL(b))`` acting on ``P(span W)``.

    Each is returned in its block-dominant form with root-count codimension.
    The list is sorted by ``(|beta|^2, z_support)``.
    """
    weights = [tuple(Fraction(c) for c in w) for w in weights]
    subsets = enumerate_subsets(weights, blocks, symmetry)
    if jobs > 1 and len(subsets) > 1000:
        size = -(-len(subsets) // (4 * jobs))
        batches = [(weights, subsets[i : i + size]) for i in range(0, len(subsets), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            found = [b for chunk in pool.map(_evaluate_batch, batches) for b in chunk]
    else:
        found = _evaluate_batch((weights, subsets))

    betas = {dominate(b, blocks)[0] for b in found}
    out = []
    for beta in betas:
        b2 = norm_sq(beta)
        z, y, below = [], [], 0
        for i, w in enumerate(weights):
            p = inner(w, beta)
            if p == b2:
                z.append(i)
                y.append(i)
            elif p > b2:
                y.append(i)
            else:
                below += 1
        codim = below - negative_root_count(beta, blocks)
        out.append(Stratum(beta, tuple(z), tuple(y), below, codim))
    out.sort(key=lambda s: (s.norm_sq, s.z_support, s.beta))
    return out


# -- semistability of Z_beta -------------------------------------------------------

def shifted_problem(weights: Sequence[Weight], stratum: Stratum, blocks: Blocks):
    """Weights of ``Z_beta`` shifted by ``-beta`` and the blocks of ``Stab(beta)``."""
    sub = [tuple(a - b for a, b in zip(weights[i], stratum.beta)) for i in stratum.z_support]
    return sub, refine_blocks(blocks, stratum.beta)


@dataclass(frozen=True)
class EmptinessCertificate:
    """Why ``Z_beta^ss`` is empty or not.

    ``destabilizer`` is an index vector of ``Stab(beta)`` on ``Z_beta`` whose
    stratum is open (codimension 0); ``torus_separator`` is a direction pairing
    positively with every weight of ``Z_beta`` shifted by ``-beta`` when one exists.
    """

    nonempty: bool
    destabilizer: Optional[Weight] = None
    destabilizer_support: tuple[int, ...] = ()
    torus_separator: Optional[Weight] = None


def z_semistable(weights: Sequence[Weight], stratum: Stratum, blocks: Blocks, symmetry: bool = True):
    """Is the generic point of ``Z_beta`` semistable for ``Stab(beta)``?

    ``Z_beta^ss`` is empty exactly when some stratum of the ``Stab(beta)``
    action on ``Z_beta`` has codimension zero.
    """
    sub, sub_blocks = shifted_problem(weights, stratum, blocks)
    torus = generic_torus_semistable(sub)
    if not torus.nonempty:
        return EmptinessCertificate(False, torus.separating, tuple(range(len(sub))), torus.separating)
    for s in index_vectors(sub, sub_blocks, symmetry):
        if s.codim == 0:
            return EmptinessCertificate(False, s.beta, tuple(stratum.z_support[i] for i in s.z_support))
    return EmptinessCertificate(True)


# -- hypersurface problems -------------------------------------------------------

@dataclass(frozen=True)
class IndexVector:
    """A nonzero index vector of ``SL(n_vars)`` acting on degree-d forms."""

    beta: Weight
    norm_sq: Fraction
    z_support: tuple[int, ...]
    y_support: tuple[int, ...]
    n_beta: int
    dim_p_beta: int
    codim_rootcount: int
    codim_override: Optional[int] = None
    override_note: str = ""
    nonempty_ss: Optional[bool] = None
    certificate: Optional[EmptinessCertificate] = None

    def codim(self, mode: str = "rootcount") -> int:
        if mode in ("paper", "paper_override_table") and self.codim_override is not None:
            return self.codim_override
        return self.codim_rootcount


@dataclass
class StratificationReport:
    n_vars: int
    degree: int
    codim_cutoff: Optional[int]
    codim_mode: str
    index_vectors: list[IndexVector] = field(default_factory=list)

    @property
    def table(self) -> WeightTable:
        return enumerate_monomials(self.n_vars, self.degree)

    def to_json(self) -> dict:
        table = self.table
        rows = []
        for iv in self.index_vectors:
            cert = iv.certificate
            rows.append(
                {
                    "beta": [str(c) for c in iv.beta],
                    "norm_sq": str(iv.norm_sq),
                    "z_support": [table.monomial(i) for i in iv.z_support],
                    "y_size": len(iv.y_support),
                    "n_beta": iv.n_beta,
                    "dim_p_beta": iv.dim_p_beta,
                    "codim_rootcount": iv.codim_rootcount,
                    "codim_override": iv.codim_override,
                    "override_note": iv.override_note,
                    "nonempty_ss": iv.nonempty_ss,
                    "destabilizer": None
                    if cert is None or cert.destabilizer is None
                    else [str(c) for c in cert.destabilizer],
                }
            )
        return {
            "n_vars": self.n_vars,
            "degree": self.degree,
            "codim_cutoff": self.codim_cutoff,
            "codim_mode": self.codim_mode,
            "index_vectors": rows,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def canonical_support(exponents: Iterable[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Orbit representative of a set of exponent vectors under permuting variables."""
    exps = [tuple(e) for e in exponents]
    m = len(exps[0])
    best = None
    for perm in itertools.permutations(range(m)):
        img = tuple(sorted(tuple(e[p] for p in perm) for e in exps))
        if best is None or img < best:
            best = img
    return best


def parse_support(text: str, n_vars: int, degree: int) -> list[tuple[int, ...]]:
    """Parse a monomial support such as ``"x1*C[x2,x3,x4]_2, x0*x1^2"``.

    ``C[vars]_k`` stands for all degree-``k`` monomials in the listed variables;
    a ``monomial*C[...]`` item multiplies each of them by that monomial.
    """
    out = []
    depth = 0
    items, cur = [], ""
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            items.append(cur)
            cur = ""
        else:
            cur += ch
    items.append(cur)
    for item in (s.strip() for s in items):
        if not item:
            continue
        if "C[" in item:
            prefix, _, rest = item.partition("C[")
            prefix = prefix.rstrip("*").strip()
            names, _, k = rest.partition("]_")
            vars_ = [int(v.strip()[1:]) for v in names.split(",")]
            base = parse_monomial(prefix, n_vars) if prefix else (0,) * n_vars
            for sub in itertools.combinations_with_replacement(vars_, int(k)):
                e = list(base)
                for v in sub:
                    e[v] += 1
                out.append(tuple(e))
        else:
            out.append(parse_monomial(item, n_vars))
    for e in out:
        if sum(e) != degree:
            raise ValueError(f"monomial {monomial_str(e)} does not have degree {degree}")
    return out


OverrideTable = dict[tuple[int, int], list[tuple[tuple, int, str]]]


def load_override_table(entries: Iterable[dict]) -> OverrideTable:
    """Build an override table from records ``{n_vars, degree, support, codim, note}``."""
    table: OverrideTable = {}
    for e in entries:
        n, d = int(e["n_vars"]), int(e["degree"])
        key = canonical_support(parse_support(e["support"], n, d))
        table.setdefault((n, d), []).append((key, int(e["codim"]), e.get("note", "")))
    return table


def lookup_override(table: Optional[OverrideTable], n_vars: int, degree: int, exps) -> Optional[tuple[int, str]]:
    if not table:
        return None
    rows = table.get((n_vars, degree), [])
    if not rows:
        return None
    key = canonical_support(exps)
    for k, codim, note in rows:
        if k == key:
            return codim, note
    return None


@dataclass(frozen=True)
class PaperStratum:
    """A published stratum: support, codimension and ``inner`` (``"auto"`` or a series expression)."""

    n_vars: int
    degree: int
    exponents: tuple[tuple[int, ...], ...]
    codim: int
    inner: str
    note: str


@dataclass(frozen=True)
class PaperStrataTable:
    complete: frozenset
    rows: dict

    def for_problem(self, n_vars: int, degree: int) -> Optional[list[PaperStratum]]:
        """The published rows if this problem is listed as complete, else ``None``."""
        if (n_vars, degree) not in self.complete:
            return None
        return list(self.rows.get((n_vars, degree), []))


def load_paper_strata(obj: dict) -> PaperStrataTable:
    rows: dict = {}
    for e in obj["strata"]:
        n, d = int(e["n_vars"]), int(e["degree"])
        exps = tuple(parse_support(e["support"], n, d))
        rows.setdefault((n, d), []).append(
            PaperStratum(n, d, exps, int(e["codim"]), e.get("inner", "auto"), e.get("note", ""))
        )
    complete = frozenset((int(a), int(b)) for a, b in obj.get("complete", []))
    return PaperStrataTable(complete, rows)


_PAPER_TABLE: Optional[PaperStrataTable] = None


def paper_strata() -> PaperStrataTable:
    """The shipped table of published strata (package data ``paper_strata.json``)."""
    global _PAPER_TABLE
    if _PAPER_TABLE is None:
        from importlib.resources import files

        text = files("gitbetti").joinpath("data/paper_strata.json").read_text(encoding="utf-8")
        _PAPER_TABLE = load_paper_strata(json.loads(text))
    return _PAPER_TABLE


def default_overrides() -> OverrideTable:
    """Codimension overrides drawn from the shipped published-strata table."""
    table: OverrideTable = {}
    for key, rows in paper_strata().rows.items():
        for r in rows:
            table.setdefault(key, []).append((canonical_support(r.exponents), r.codim, r.note))
    return table


def index_set_search(
    n_vars: int,
    d: int,
    codim_cutoff: Optional[int] = None,
    codim_mode: str = "rootcount",
    overrides: Optional[OverrideTable] = None,
    symmetry: bool = True,
    jobs: int = 1,
    check_emptiness: bool = True,
) -> StratificationReport:
    """Nonzero index vectors of ``SL(n_vars)`` on ``P(C[x_0..]_d)`` up to the cutoff."""
    if n_vars < 2 or d < 1:
        raise ValueError("need n_vars >= 2 and d >= 1")
    if codim_cutoff is not None and codim_cutoff < 0:
        raise ValueError("codimension cutoff must be nonnegative")
    if codim_mode not in ("rootcount", "paper", "paper_override_table"):
        raise ValueError(f"unknown codim mode {codim_mode!r}")
    if codim_mode != "rootcount" and overrides is None:
        overrides = default_overrides()

    table = enumerate_monomials(n_vars, d)
    blocks: Blocks = (tuple(range(n_vars)),)
    report = StratificationReport(n_vars, d, codim_cutoff, codim_mode)
    for s in index_vectors(table.weights, blocks, symmetry, jobs):
        ov = lookup_override(overrides, n_vars, d, [table.exponents[i] for i in s.z_support])
        iv = IndexVector(
            beta=s.beta,
            norm_sq=s.norm_sq,
            z_support=s.z_support,
            y_support=s.y_support,
            n_beta=s.n_beta,
            dim_p_beta=parabolic_dim(s.beta),
            codim_rootcount=s.codim,
            codim_override=ov[0] if ov else None,
            override_note=ov[1] if ov else "",
        )
        if codim_cutoff is not None and iv.codim(codim_mode) > codim_cutoff:
            continue
        if check_emptiness:
            cert = z_semistable(table.weights, s, blocks, symmetry)
            iv = _replace(iv, nonempty_ss=cert.nonempty, certificate=cert)
        report.index_vectors.append(iv)
    return report


def _replace(iv: IndexVector, **kw) -> IndexVector:
    from dataclasses import replace

    return replace(iv, **kw)


def stratum_codim(iv: IndexVector, n_vars: int, d: int) -> int:
    """Codimension of ``S_beta`` from ``dim S = dim G + dim Y - dim P``, cross-checked."""
    table_size = len(enumerate_monomials(n_vars, d))
    if len(iv.y_support) + iv.n_beta != table_size or not set(iv.z_support) <= set(iv.y_support):
        raise ValueError("inconsistent supports")
    dim_g = n_vars**2 - 1
    dim_x = table_size - 1
    dim_y = len(iv.y_support) - 1
    codim = dim_x - (dim_g + dim_y - iv.dim_p_beta)
    other = iv.n_beta - (dim_g - iv.dim_p_beta)
    if codim != other:
        raise AssertionError(f"codimension formulas disagree: {codim} vs {other}")
    return codim


def verify_index_vector(table: WeightTable, iv: IndexVector) -> bool:
    """Re-derive ``beta`` as the nearest point of its own ``Z`` weights."""
    cert = nearest_point_hull([table.weights[i] for i in iv.z_support])
    z, y, n_beta = pairing_supports(table, iv.beta)
    return (
        cert.point == tuple(iv.beta)
        and z == tuple(iv.z_support)
        and y == tuple(iv.y_support)
        and n_beta == iv.n_beta
    )


def stabilizer_levels(beta: Sequence[Fraction]) -> list[tuple[int, ...]]:
    return level_sets(beta)
