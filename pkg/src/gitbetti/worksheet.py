"""Declarative ledgers of series computations, their evaluation and golden checks.

A worksheet is a small INI-like text file::

    [worksheet]
    title = Plane cubics
    truncation = 30

    [step P]
    kind = equivariant_ss
    provenance = [PAPER] Kirwan formula for plane cubics
    n_vars = 3
    degree = 3
    expect = (1+t^2+t^10+t^12)/((1-t^4)(1-t^6))

Steps run in order; expressions may refer to earlier steps as ``@name``.
``expect`` (a series expression) or ``expect_even`` (even-degree coefficient
list) are golden values; ``known_discrepancy`` marks a golden that is known
not to match, so the mismatch is reported as KNOWN instead of failing.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .expr import Evaluator, ExprError, check_syntax, references
from .kirwan import (
    BlowdownStep,
    BlowupStep,
    DecompStep,
    binary_forms_ss_series,
    blowup_correction,
    decomp_pbundle,
    decomp_semismall,
    equivariant_ss_series,
    ic_blowdown,
    rank1_normal_removal,
    stratum_ss_series,
)
from .series import (
    DEFAULT_TRUNCATION,
    SeriesError,
    TruncatedSeries,
    duality_complete,
)

STEP_KINDS = (
    "series_literal",
    "equivariant_ss",
    "blowup_correction",
    "sum",
    "duality_complete",
    "ic_blowdown",
    "decomp_pbundle",
    "decomp_semismall",
)

_COMMON = ("kind", "provenance", "truncation", "expect", "expect_even", "expect_provenance", "known_discrepancy", "note")

# required keys, optional keys, expression-valued keys
_SCHEMA = {
    "series_literal": (("value",), (), ("value",)),
    "equivariant_ss": (("n_vars", "degree"), ("codim_mode",), ()),
    "blowup_correction": (("d_r", "center"), ("removal", "removal_series"), ("center", "removal_series")),
    "sum": (("of",), (), ()),
    "duality_complete": (("source", "complex_dim"), (), ()),
    "ic_blowdown": (("base", "fiber", "fiber_dim"), ("lambda_bound",), ("base", "fiber")),
    "decomp_pbundle": (("source", "direction", "z", "c", "m"), (), ("z",)),
    "decomp_semismall": (("source", "z", "c", "m", "n"), (), ("z",)),
}

_REPEATABLE = {"removal", "removal_series"}
_META_KEYS = ("title", "truncation", "codim_mode", "description")
_PROVENANCE = re.compile(r"^\[(PAPER|DERIVED|TRIVIAL)\]")


class WorksheetError(ValueError):
    """Parse or validation error located at ``line`` and ``column`` (1-based)."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)
        self.message = message
        self.line = line
        self.column = column


class EvaluationError(RuntimeError):
    def __init__(self, step: str, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


@dataclass(frozen=True)
class Step:
    name: str
    params: tuple[tuple[str, str], ...]
    line: int = field(default=0, compare=False)
    key_lines: tuple = field(default=(), compare=False)

    def get(self, key: str, default: Optional[str] = None) -> Optional[str]:
        for k, v in self.params:
            if k == key:
                return v
        return default

    def get_all(self, key: str) -> list[str]:
        return [v for k, v in self.params if k == key]

    @property
    def kind(self) -> str:
        return self.get("kind")

    def locate(self, key: str) -> tuple[int, int]:
        """``(line, column of the value)`` of the first occurrence of ``key``."""
        for k, ln, col in self.key_lines:
            if k == key:
                return ln, col
        return self.line, 1


@dataclass(frozen=True)
class Worksheet:
    metadata: tuple[tuple[str, str], ...]
    steps: tuple[Step, ...]

    def meta(self, key: str, default: Optional[str] = None) -> Optional[str]:
        for k, v in self.metadata:
            if k == key:
                return v
        return default

    @property
    def title(self) -> str:
        return self.meta("title", "")

    @property
    def truncation(self) -> int:
        return int(self.meta("truncation", str(DEFAULT_TRUNCATION)))

    @property
    def codim_mode(self) -> str:
        return self.meta("codim_mode", "rootcount")

    def step(self, name: str) -> Step:
        for s in self.steps:
            if s.name == name:
                return s
        raise KeyError(name)

    def kinds(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for s in self.steps:
            out[s.kind] = out.get(s.kind, 0) + 1
        return out

    def has_goldens(self) -> bool:
        return any(s.get("expect") is not None or s.get("expect_even") is not None for s in self.steps)


# -- parsing -----------------------------------------------------------------------

_SECTION = re.compile(r"^\[(worksheet|step\s+([A-Za-z_][A-Za-z0-9_]*))\]\s*$")
_KEYVAL = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$")


def parse_worksheet(text: str) -> Worksheet:
    metadata: list[tuple[str, str]] = []
    steps: list[Step] = []
    section = None
    cur_name, cur_params, cur_lines, cur_line = None, [], [], 0

    def flush():
        if cur_name is not None:
            steps.append(Step(cur_name, tuple(cur_params), cur_line, tuple(cur_lines)))

    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("["):
            m = _SECTION.match(stripped)
            if not m:
                raise WorksheetError(f"malformed section header {stripped!r}", ln, 1)
            flush()
            if m.group(2):
                if section is None:
                    raise WorksheetError("missing [worksheet] section before the first step", ln, 1)
                name = m.group(2)
                if any(s.name == name for s in steps):
                    raise WorksheetError(f"duplicate step name {name!r}", ln, 1)
                section = "step"
                cur_name, cur_params, cur_lines, cur_line = name, [], [], ln
            else:
                if section is not None:
                    raise WorksheetError("[worksheet] must be the first section", ln, 1)
                section = "worksheet"
                cur_name = None
            continue
        m = _KEYVAL.match(stripped)
        if not m:
            raise WorksheetError(f"expected 'key = value', found {stripped!r}", ln, 1)
        key, value = m.group(1), m.group(2)
        col = line.index("=") + 2 + (len(line[line.index("=") + 1 :]) - len(line[line.index("=") + 1 :].lstrip()))
        if section is None:
            raise WorksheetError("key outside any section", ln, 1)
        if section == "worksheet":
            if key not in _META_KEYS:
                raise WorksheetError(f"unknown worksheet key {key!r}", ln, 1)
            metadata.append((key, value))
        else:
            if key in (k for k, _ in cur_params) and key not in _REPEATABLE:
                raise WorksheetError(f"duplicate key {key!r} in step {cur_name}", ln, 1)
            cur_params.append((key, value))
            cur_lines.append((key, ln, col))
    flush()
    if section is None:
        raise WorksheetError("empty worksheet: missing [worksheet] section", 1, 1)
    w = Worksheet(tuple(metadata), tuple(steps))
    _validate(w)
    return w


def _int_param(step: Step, key: str, minimum: Optional[int] = None) -> int:
    value = step.get(key)
    ln, col = step.locate(key)
    try:
        k = int(value)
    except (TypeError, ValueError):
        raise WorksheetError(f"step {step.name}: {key} must be an integer, got {value!r}", ln, col) from None
    if minimum is not None and k < minimum:
        raise WorksheetError(f"step {step.name}: {key} must be at least {minimum}", ln, col)
    return k


def _validate(w: Worksheet) -> None:
    try:
        if w.truncation < 0:
            raise ValueError
    except ValueError:
        raise WorksheetError(f"truncation must be a nonnegative integer, got {w.meta('truncation')!r}") from None
    if w.codim_mode not in ("rootcount", "paper", "paper_override_table"):
        raise WorksheetError(f"unknown codim_mode {w.codim_mode!r}")
    known: set[str] = set()
    for s in w.steps:
        kind = s.kind
        if kind is None:
            raise WorksheetError(f"step {s.name}: missing kind", s.line, 1)
        if kind not in STEP_KINDS:
            ln, col = s.locate("kind")
            raise WorksheetError(f"step {s.name}: unknown step kind {kind!r}", ln, col)
        prov = s.get("provenance")
        if not prov:
            raise WorksheetError(f"step {s.name}: missing provenance", s.line, 1)
        if not _PROVENANCE.match(prov):
            ln, col = s.locate("provenance")
            raise WorksheetError(
                f"step {s.name}: provenance must start with [PAPER], [DERIVED] or [TRIVIAL]", ln, col
            )
        if prov.startswith("[PAPER]") and len(prov[len("[PAPER]") :].strip()) == 0:
            ln, col = s.locate("provenance")
            raise WorksheetError(f"step {s.name}: [PAPER] provenance needs a citation", ln, col)
        required, optional, exprs = _SCHEMA[kind]
        allowed = set(required) | set(optional) | set(_COMMON)
        for k, _ in s.params:
            if k not in allowed:
                ln, col = s.locate(k)
                raise WorksheetError(f"step {s.name}: unknown key {k!r} for kind {kind}", ln, col)
        for k in required:
            if s.get(k) is None:
                raise WorksheetError(f"step {s.name}: missing required key {k!r}", s.line, 1)
        if s.get("truncation") is not None:
            _int_param(s, "truncation", 0)
        for key, ln, col in s.key_lines:
            value = s.get_all(key)
            if key in exprs or key in ("expect", "removal"):
                for v in (value if key in _REPEATABLE else [s.get(key)]):
                    text = v
                    offset = 0
                    if key == "removal":
                        c, sep, text = v.partition(":")
                        if not sep:
                            raise WorksheetError(f"step {s.name}: removal must read 'codim : expression'", ln, col)
                        try:
                            if int(c) < 1:
                                raise ValueError
                        except ValueError:
                            raise WorksheetError(f"step {s.name}: removal codimension must be a positive integer", ln, col) from None
                        offset = len(c) + 1
                    try:
                        check_syntax(text, known, EXTRA_BUILTINS)
                    except ExprError as e:
                        raise WorksheetError(f"step {s.name}: {key}: {e.message}", ln, col + offset + e.column - 1) from None
        if s.get("expect_even") is not None:
            try:
                [Fraction(x) for x in _split_list(s.get("expect_even"))]
            except ValueError:
                ln, col = s.locate("expect_even")
                raise WorksheetError(f"step {s.name}: expect_even must be a comma-separated number list", ln, col) from None
        for key in ("source",):
            if s.get(key) is not None and s.get(key) not in known:
                ln, col = s.locate(key)
                raise WorksheetError(f"step {s.name}: unresolved reference {s.get(key)!r}", ln, col)
        if kind == "sum":
            for item in _split_list(s.get("of")):
                name = item.lstrip("-").strip()
                if name not in known:
                    ln, col = s.locate("of")
                    raise WorksheetError(f"step {s.name}: unresolved reference {name!r}", ln, col)
        if kind == "equivariant_ss":
            _int_param(s, "n_vars", 2)
            _int_param(s, "degree", 1)
        if kind == "blowup_correction":
            _int_param(s, "d_r", 1)
        if kind == "duality_complete":
            _int_param(s, "complex_dim", 0)
        if kind == "ic_blowdown":
            _int_param(s, "fiber_dim", 0)
            if s.get("lambda_bound") is not None:
                _int_param(s, "lambda_bound")
        if kind in ("decomp_pbundle", "decomp_semismall"):
            _int_param(s, "c", 1)
            _int_param(s, "m", 0)
            if kind == "decomp_semismall":
                _int_param(s, "n", 0)
            elif s.get("direction") not in ("forward", "inverse"):
                ln, col = s.locate("direction")
                raise WorksheetError(f"step {s.name}: direction must be forward or inverse", ln, col)
        known.add(s.name)


def _split_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def serialize(w: Worksheet) -> str:
    """Canonical text form; ``parse_worksheet(serialize(w)) == w``."""
    lines = ["[worksheet]"]
    for k, v in w.metadata:
        lines.append(f"{k} = {v}")
    for s in w.steps:
        lines.append("")
        lines.append(f"[step {s.name}]")
        for k, v in s.params:
            lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"


def load_worksheet(path: str) -> Worksheet:
    with open(path, encoding="utf-8") as fh:
        return parse_worksheet(fh.read())


def shipped_worksheet(name: str) -> str:
    """Text of a worksheet shipped as package data, e.g. ``"cubic4fold.ws"``."""
    from importlib.resources import files

    return files("gitbetti").joinpath("data", name).read_text(encoding="utf-8")


# -- extra builtins ------------------------------------------------------------------

def _b_dual(args, ev):
    if len(args) != 2:
        raise ValueError("Dual(complex_dim, expression)")
    d = int(args[0])
    half = ev.sub(args[1], d)
    full = duality_complete(half, d)
    return full.pad(ev.truncation) if full.truncation < ev.truncation else full.truncate(ev.truncation)


def _b_binary(args, ev):
    return binary_forms_ss_series([int(a) for a in args], ev.truncation)


def _parse_weight_list(text: str) -> list[tuple[int, int]]:
    out = []
    for item in text.split():
        w, sep, m = item.partition(":")
        if not sep:
            raise ValueError(f"weight entries read 'weight:multiplicity', got {item!r}")
        out.append((int(w), int(m)))
    return out


def _b_rank1(args, ev):
    if not 2 <= len(args) <= 4:
        raise ValueError("Rank1(weights, base, [sides], [convention])")
    weights = _parse_weight_list(args[0])
    base = ev.sub(args[1])
    sides = args[2] if len(args) > 2 else "positive"
    convention = args[3] if len(args) > 3 else "below"
    return rank1_normal_removal(weights, base, ev.truncation, sides, convention)


def _b_hypersurface(args, ev):
    if len(args) not in (2, 3):
        raise ValueError("Hypersurface(n_vars, degree, [codim_mode])")
    mode = args[2] if len(args) == 3 else "rootcount"
    return equivariant_ss_series(int(args[0]), int(args[1]), ev.truncation, mode)


def _b_stratum(args, ev):
    if len(args) not in (3, 4):
        raise ValueError("StratumSeries(n_vars, degree, support, [codim_mode])")
    from .strata import Stratum, canonical_support, parse_support
    from .kirwan import _hypersurface_index
    from .weights import enumerate_monomials

    n, d = int(args[0]), int(args[1])
    mode = args[3] if len(args) == 4 else "rootcount"
    exps = parse_support(args[2].replace("+", ","), n, d)
    key = canonical_support(exps)
    table = enumerate_monomials(n, d)
    for s in _hypersurface_index(n, d):
        if canonical_support([table.exponents[i] for i in s.z_support]) == key:
            return stratum_ss_series(n, d, s, ev.truncation, mode)
    raise ValueError(f"no index vector of SL({n}) on degree-{d} forms has support {args[2]!r}")


EXTRA_BUILTINS = {
    "Dual": _b_dual,
    "BinaryForms": _b_binary,
    "Rank1": _b_rank1,
    "Hypersurface": _b_hypersurface,
    "StratumSeries": _b_stratum,
}


# -- evaluation --------------------------------------------------------------------

@dataclass
class StepResult:
    name: str
    kind: str
    series: TruncatedSeries
    status: str  # "match", "mismatch", "known", "none"
    first_diff: Optional[int] = None
    expected_value: Optional[Fraction] = None
    got_value: Optional[Fraction] = None
    expected: Optional[TruncatedSeries] = None
    note: str = ""
    provenance: str = ""
    seconds: float = 0.0

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "kind": self.kind,
            "provenance": self.provenance,
            "series": self.series.to_json(),
            "text": str(self.series),
            "status": self.status,
        }
        if self.first_diff is not None:
            out["first_diff"] = {
                "degree": self.first_diff,
                "expected": str(self.expected_value),
                "computed": str(self.got_value),
            }
        if self.note:
            out["known_discrepancy"] = self.note
        return out


@dataclass
class Report:
    title: str
    results: list[StepResult]
    seconds: float = 0.0

    def __getitem__(self, name: str) -> StepResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def ok(self) -> bool:
        return all(r.status != "mismatch" for r in self.results)

    def to_json(self, timing: bool = False) -> dict:
        out = {"title": self.title, "steps": [r.to_json() for r in self.results]}
        if timing:
            out["seconds"] = round(self.seconds, 3)
        return out

    def text(self, timing: bool = False) -> str:
        lines = [f"worksheet: {self.title}"]
        for r in self.results:
            tag = {"match": "PASS", "mismatch": "FAIL", "known": "KNOWN", "none": "----"}[r.status]
            lines.append(f"[{tag}] {r.name} ({r.kind}): {r.series}")
            if r.first_diff is not None:
                lines.append(
                    f"       first difference at t^{r.first_diff}: expected {r.expected_value}, computed {r.got_value}"
                )
            if r.status == "known":
                lines.append(f"       known discrepancy: {r.note}")
        if timing:
            lines.append(f"elapsed: {self.seconds:.3f} s")
        return "\n".join(lines)


def first_difference(a: TruncatedSeries, b: TruncatedSeries) -> Optional[int]:
    n = min(a.truncation, b.truncation)
    for k in range(n + 1):
        if a[k] != b[k]:
            return k
    return None


def _fit(s: TruncatedSeries, n: int) -> TruncatedSeries:
    return s.truncate(n) if s.truncation >= n else s.pad(n)


def _evaluator(n: int, registry: dict) -> Evaluator:
    return Evaluator(n, registry, EXTRA_BUILTINS)


def _eval_step(w: Worksheet, s: Step, registry: dict[str, TruncatedSeries]) -> TruncatedSeries:
    n = int(s.get("truncation", str(w.truncation)))
    ev = _evaluator(n, registry)
    kind = s.kind
    if kind == "series_literal":
        return ev.evaluate(s.get("value"))
    if kind == "equivariant_ss":
        mode = s.get("codim_mode", w.codim_mode)
        return equivariant_ss_series(int(s.get("n_vars")), int(s.get("degree")), n, mode)
    if kind == "blowup_correction":
        removals = []
        for item in s.get_all("removal"):
            c, _, text = item.partition(":")
            codim = int(c)
            removals.append((codim, _evaluator(max(n - 2 * codim, 0), registry).evaluate(text).pad(n)))
        step = BlowupStep(
            s.name,
            int(s.get("d_r")),
            ev.evaluate(s.get("center")),
            tuple(removals),
            tuple(ev.evaluate(x) for x in s.get_all("removal_series")),
            provenance={"step": s.get("provenance")},
        )
        return blowup_correction(step, n)
    if kind == "sum":
        total = TruncatedSeries.zero(n)
        for item in _split_list(s.get("of")):
            neg = item.startswith("-")
            name = item.lstrip("-").strip()
            term = registry[name]
            if term.truncation < n:
                raise SeriesError(f"@{name} is known only to t^{term.truncation}")
            term = term.truncate(n)
            total = total - term if neg else total + term
        return total
    if kind == "duality_complete":
        src = registry[s.get("source")]
        return duality_complete(src, int(s.get("complex_dim")))
    if kind == "ic_blowdown":
        fiber_dim = int(s.get("fiber_dim"))
        bound = s.get("lambda_bound")
        step = BlowdownStep(
            s.name,
            ev.evaluate(s.get("base")),
            ev.evaluate(s.get("fiber")),
            fiber_dim,
            int(bound) if bound is not None else None,
        )
        return ic_blowdown(step, n)
    if kind in ("decomp_pbundle", "decomp_semismall"):
        src = registry[s.get("source")]
        if src.truncation < n:
            raise SeriesError(f"@{s.get('source')} is known only to t^{src.truncation}")
        step = DecompStep(
            "pbundle" if kind == "decomp_pbundle" else "semismall",
            ev.evaluate(s.get("z")),
            int(s.get("c")),
            int(s.get("m")),
            int(s.get("n", "0")),
        )
        if kind == "decomp_pbundle":
            return decomp_pbundle(s.get("direction"), src.truncate(n), step, n)
        return decomp_semismall(src.truncate(n), step, n)
    raise EvaluationError(s.name, f"unknown step kind {kind!r}")


def _expected(s: Step, series: TruncatedSeries, registry) -> Optional[TruncatedSeries]:
    n = series.truncation
    if s.get("expect") is not None:
        return _evaluator(n, registry).evaluate(s.get("expect"))
    if s.get("expect_even") is not None:
        values = [Fraction(x) for x in _split_list(s.get("expect_even"))]
        top = min(n, 2 * (len(values) - 1))
        return TruncatedSeries.from_terms({2 * i: c for i, c in enumerate(values) if 2 * i <= top}, top)
    return None


def evaluate_worksheet(w: Worksheet, only: Optional[str] = None) -> Report:
    """Evaluate every step in order (or up to and including ``only``)."""
    registry: dict[str, TruncatedSeries] = {}
    results = []
    t_start = time.perf_counter()
    for s in w.steps:
        t0 = time.perf_counter()
        try:
            series = _eval_step(w, s, registry)
            expected = _expected(s, series, registry)
        except (SeriesError, ExprError, ValueError, KeyError) as e:
            raise EvaluationError(s.name, str(e)) from e
        registry[s.name] = series
        status, diff, ev_, gv = "none", None, None, None
        if expected is not None:
            k = first_difference(series, expected)
            if k is None:
                status = "match"
            else:
                diff, ev_, gv = k, expected[k], series[k]
                status = "known" if s.get("known_discrepancy") else "mismatch"
        results.append(
            StepResult(
                s.name, s.kind, series, status, diff, ev_, gv, expected,
                s.get("known_discrepancy", "") if status == "known" else "",
                s.get("provenance", ""), time.perf_counter() - t0,
            )
        )
        if only is not None and s.name == only:
            break
    if only is not None and only not in registry:
        raise KeyError(f"no step named {only!r}")
    return Report(w.title, results, time.perf_counter() - t_start)


def verify_golden(w: Worksheet) -> tuple[int, str]:
    """``(0, report)`` if every golden matches or is a known discrepancy, ``1`` on a mismatch, ``2`` on error."""
    if not w.has_goldens():
        return 2, "error: worksheet has no golden expectations"
    try:
        report = evaluate_worksheet(w)
    except EvaluationError as e:
        return 2, f"error: {e}"
    lines = []
    for r in report.results:
        if r.status == "mismatch":
            lines.append(
                f"MISMATCH {r.name}: first difference at t^{r.first_diff}: expected {r.expected_value}, computed {r.got_value}"
            )
        elif r.status == "known":
            lines.append(
                f"KNOWN    {r.name}: first difference at t^{r.first_diff}: expected {r.expected_value}, computed {r.got_value} ({r.note})"
            )
        elif r.status == "match":
            lines.append(f"PASS     {r.name}")
    status = 0 if report.ok else 1
    lines.append("verify: " + ("pass" if status == 0 else "FAIL"))
    return status, "\n".join(lines)


def report_json(report: Report) -> str:
    return json.dumps(report.to_json(), indent=2)
