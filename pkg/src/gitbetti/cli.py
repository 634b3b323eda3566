"""Command-line interface: ``search``, ``series``, ``evaluate`` and ``verify``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from .expr import ExprError, evaluate
from .series import DEFAULT_TRUNCATION
from .strata import index_set_search
from .worksheet import (
    EXTRA_BUILTINS,
    EvaluationError,
    Worksheet,
    WorksheetError,
    evaluate_worksheet,
    parse_worksheet,
    shipped_worksheet,
    verify_golden,
)


def _read_worksheet(path: str) -> Worksheet:
    """A file path, or the name of a shipped worksheet such as ``cubic4fold.ws``."""
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    else:
        try:
            text = shipped_worksheet(path)
        except (FileNotFoundError, OSError):
            raise WorksheetError(f"no such worksheet: {path}", 0, 0) from None
    return parse_worksheet(text)


def _cmd_search(args) -> int:
    report = index_set_search(
        args.vars, args.degree, args.cutoff, args.codim_mode, symmetry=not args.no_symmetry, jobs=args.jobs
    )
    print(report.dumps())
    return 0


def _cmd_series(args) -> int:
    s = evaluate(args.expr, args.truncation, builtins=EXTRA_BUILTINS)
    if args.format == "json":
        print(json.dumps(s.to_json()))
    else:
        print(s)
    return 0


def _cmd_evaluate(args) -> int:
    w = _read_worksheet(args.worksheet)
    report = evaluate_worksheet(w, only=args.step)
    if args.format == "json":
        print(json.dumps(report.to_json(timing=args.timing), indent=2))
        return 0
    print(report.text(timing=args.timing))
    return 0


def _cmd_verify(args) -> int:
    w = _read_worksheet(args.worksheet)
    status, text = verify_golden(w)
    print(text)
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gitbetti", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("search", help="index-vector search for SL(n) on degree-d forms")
    s.add_argument("--vars", type=int, required=True)
    s.add_argument("--degree", type=int, required=True)
    s.add_argument("--cutoff", type=int, default=None)
    s.add_argument("--codim-mode", choices=("rootcount", "paper"), default="rootcount")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--no-symmetry", action="store_true", help="disable Weyl-symmetry reduction")
    s.set_defaults(func=_cmd_search)

    s = sub.add_parser("series", help="expand a series expression")
    s.add_argument("expr")
    s.add_argument("--truncation", type=int, default=DEFAULT_TRUNCATION)
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.set_defaults(func=_cmd_series)

    s = sub.add_parser("evaluate", help="evaluate a worksheet")
    s.add_argument("--worksheet", required=True)
    s.add_argument("--step", default=None)
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.add_argument("--timing", action="store_true", help="report elapsed time")
    s.set_defaults(func=_cmd_evaluate)

    s = sub.add_parser("verify", help="check worksheet goldens; exit 0 pass, 1 mismatch, 2 error")
    s.add_argument("--worksheet", required=True)
    s.set_defaults(func=_cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (WorksheetError, EvaluationError, ExprError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
