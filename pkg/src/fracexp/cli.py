"""Command-line interface.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure. Errors
are reported as one JSON object on standard error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path

import numpy as np
import sympy as sp

from . import expansions, fode, oracles, specfun, tabular, varsolve
from .errors import (
    AccuracyError,
    DomainError,
    FracError,
    IllPosedError,
    InputFormatError,
    IntegrationError,
    NonConvergenceError,
    UnsupportedProblemError,
)
from .expr import parse

TABLE1_ALPHAS = (0.1, 0.3, 0.5, 0.7, 0.9, 0.99)
TABLE1_NS = (4, 7, 15, 30, 70, 120, 170)
TABLE2_IS = (1, 2, 3, 4)
TABLE2_GAPS = (0, 5, 10, 15, 20)


class UsageError(FracError, ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --------------------------------------------------------------------------
# Output helpers
# --------------------------------------------------------------------------


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


class Output:
    """Collects a table and an optional summary, then writes CSV or JSON."""

    def __init__(self, args):
        self.out = args.out
        self.as_json = args.json
        self.summary_path = getattr(args, "summary", None)

    def emit(self, columns, rows, summary=None):
        if self.as_json:
            doc = {"columns": columns, "rows": [[_jsonable(v) for v in r] for r in rows]}
            if summary is not None:
                doc["summary"] = {k: _jsonable(v) for k, v in summary.items()}
            self._write(json.dumps(doc, indent=2, sort_keys=False) + "\n")
            return
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
        self._write(buf.getvalue())
        if summary is not None:
            text = json.dumps({k: _jsonable(v) for k, v in summary.items()}, sort_keys=True) + "\n"
            target = self.summary_path or (Path(self.out).with_suffix(".json") if self.out else None)
            if target is None:
                sys.stderr.write(text)
            else:
                Path(target).write_text(text, encoding="utf-8", newline="\n")

    def _write(self, text):
        if self.out:
            Path(self.out).write_text(text, encoding="utf-8", newline="\n")
        else:
            sys.stdout.write(text)


def round_sig(x: float, digits: int) -> str:
    """Round half-even to ``digits`` significant figures, as fixed-point text."""
    d = Decimal(repr(float(x)))
    if d == 0:
        return "0"
    exp = d.adjusted() - digits + 1
    return format(d.quantize(Decimal(1).scaleb(exp), rounding=ROUND_HALF_EVEN), "f")


def round_dec(x: float, places: int) -> str:
    """Round half-even to ``places`` decimals, as fixed-point text."""
    return format(Decimal(repr(float(x))).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN), "f")


def _grid(spec: str) -> np.ndarray:
    try:
        start, stop, count = spec.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise UsageError(f"grid must be START:STOP:COUNT, got {spec!r}") from None
    if count < 1 or (count > 1 and not stop > start):
        raise UsageError("grid needs COUNT >= 1 and STOP > START")
    return np.linspace(start, stop, count)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def table1_rows():
    rows = []
    for al in TABLE1_ALPHAS:
        for N in TABLE1_NS:
            b = specfun.coeff_b(al, N)
            rows.append([al, N, b, round_dec(b, 4)])
    return rows


def table2_rows():
    rows = []
    for i in TABLE2_IS:
        n = i + 1
        for gap in TABLE2_GAPS:
            v = specfun.coeff_a_gen_tail(0.5, i, n, n + gap)
            rows.append([i, gap, v, round_sig(v, 4)])
    return rows


def cmd_tables(args, out: Output):
    if args.which == "table1":
        out.emit(["alpha", "N", "B", "B_rounded"], table1_rows())
    else:
        out.emit(["i", "N_minus_n", "tail", "tail_rounded"], table2_rows())


def cmd_coeffs(args, out: Output):
    al = specfun.as_alpha(args.alpha)
    rows = []
    if args.n is None:
        tab = specfun.coeff_table(al, args.N)
        rows.append(["A", None, tab.a_coeff])
        rows.append(["B", None, tab.b_coeff])
        rows.extend(["C", p, tab.c(p)] for p in range(2, args.N + 1))
    else:
        rows.extend(["A", i, specfun.coeff_a_gen(al, i, args.n, args.N)] for i in range(args.n))
        rows.extend(["B", p, specfun.coeff_b_gen(al, p, args.n)] for p in range(args.n, args.N + 1))
    out.emit(["name", "index", "value"], rows)


def smooth_from_expression(e) -> expansions.SmoothInput:
    return expansions.SmoothInput(lambda t: e(t), lambda t, k: e.derivative(k)(t))


def exact_derivative(e, alpha: float, side: expansions.Side, base: float):
    """Closed-form derivative of a polynomial (any base) or of exponentials (left side, base 0).

    Returns ``None`` when neither form applies.
    """
    t = sp.Symbol("t", real=True)
    u = sp.Symbol("u", positive=True)
    sub = base + u if side is expansions.Side.LEFT else base - u
    shifted = sp.expand(e.tree.subs(t, sub))
    try:
        poly = sp.Poly(shifted, u)
        coeffs = [(int(m[0]), float(c)) for m, c in zip(poly.monoms(), poly.coeffs())]

        def f(tt):
            d = tt - base if side is expansions.Side.LEFT else base - tt
            return math.fsum(c * oracles.exact_power(k, alpha, 0.0, d) for k, c in coeffs)

        return f
    except (sp.PolynomialError, sp.GeneratorsNeeded, TypeError, ValueError):
        pass
    if side is not expansions.Side.LEFT or base != 0.0:
        return None
    parts = []
    for term in sp.Add.make_args(sp.expand(e.tree)):
        coeff, rest = term.as_independent(t, as_Add=False)
        if rest == 1:
            parts.append(("power", 0, float(coeff)))
        elif rest.is_Pow and rest.base == t and rest.exp.is_integer and rest.exp >= 0:
            parts.append(("power", int(rest.exp), float(coeff)))
        elif rest == t:
            parts.append(("power", 1, float(coeff)))
        elif isinstance(rest, sp.exp):
            arg = sp.Poly(rest.args[0], t) if rest.args[0].is_polynomial(t) else None
            if arg is None or arg.degree() != 1:
                return None
            lam, c0 = (float(v) for v in arg.all_coeffs())
            parts.append(("exp", lam, float(coeff) * math.exp(c0)))
        else:
            return None

    def g(tt):
        vals = [c * (oracles.exact_power(k, alpha, 0.0, tt) if kind == "power" else oracles.exact_exp(k, alpha, tt))
                for kind, k, c in parts]
        return math.fsum(vals)

    return g


def _bound(e, spec: expansions.ExpansionSpec, t: float):
    """Truncation bound at ``t`` with the derivative maximum taken from 1025 samples."""
    side = spec.side
    lo, hi = (spec.base, t) if side is expansions.Side.LEFT else (t, spec.base)
    dt = hi - lo
    samples = np.linspace(lo, hi, 1025)
    if spec.method is expansions.Method.INTEGER:
        M = float(np.max(np.abs(e.derivative(spec.N + 1)(samples))))
        return expansions.bound_int(spec.alpha, spec.N, M, dt)
    if spec.method is expansions.Method.MOMENT:
        L = float(np.max(np.abs(e.derivative(2)(samples))))
        return expansions.bound_mom(spec.alpha, spec.N, L, dt)
    if spec.method is expansions.Method.GENERAL and spec.n >= 2:
        L = float(np.max(np.abs(e.derivative(spec.n)(samples))))
        return expansions.bound_mom_general(spec.alpha, spec.n, spec.N, L, dt)
    return None


def cmd_eval(args, out: Output):
    e = parse(args.function)
    side = expansions.Side(args.side)
    base = args.a if side is expansions.Side.LEFT else args.b
    if base is None:
        raise UsageError("right-sided evaluation needs --b")
    spec = expansions.ExpansionSpec(args.method, args.alpha, args.N, args.n, side, base)
    ts = _grid(args.grid)
    x = smooth_from_expression(e)
    tol = args.tol if args.tol is not None else 1e-12
    approx = expansions.evaluate_grid(x, spec, ts, moments=args.moments, tol=tol).values
    exact = exact_derivative(e, spec.alpha, side, base)
    columns = ["t", "approx"]
    cols = [ts, approx]
    if exact is not None:
        columns.append("exact")
        cols.append([exact(t) for t in ts])
    if args.bound:
        columns.append("bound")
        cols.append([_bound(e, spec, t) for t in ts])
    rows = [list(r) for r in zip(*cols)]
    summary = None
    if exact is not None:
        summary = {"max_abs_error": float(np.max(np.abs(np.asarray(cols[2]) - approx)))}
    out.emit(columns, rows, summary if args.json else None)


def cmd_tabular(args, out: Output):
    data = tabular.read_csv(args.input)
    if args.adaptive is not None:
        res = tabular.adaptive_order(data, args.alpha, args.adaptive, args.N0, args.Nmax)
        summary = {"order_used": res.order_used, "iterations": res.iterations, "last_norm": res.last_norm}
    else:
        res = tabular.tabular_frac_derivative(data, args.alpha, args.N)
        summary = None
    out.emit(["t", "dalpha_x"], [[t, v] for t, v in zip(res.t, res.values)], summary)


_FODE_KEYS = {"alpha", "a", "b", "x0", "f", "g", "method", "N", "tol", "reference", "points", "start"}


def load_fode_problem(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"problem file is not valid JSON: {exc.msg} (line {exc.lineno})", exc.lineno) from None
    if not isinstance(doc, dict):
        raise InputFormatError("problem file must hold a JSON object")
    unknown = set(doc) - _FODE_KEYS
    if unknown:
        raise InputFormatError(f"unknown keys in problem file: {sorted(unknown)}")
    for key in ("alpha", "f", "g"):
        if key not in doc:
            raise InputFormatError(f"problem file lacks {key!r}")
    return doc


def cmd_fode(args, out: Output):
    doc = load_fode_problem(args.problem)
    f = parse(str(doc["f"]), ("t", "x"))
    g = parse(str(doc["g"]), ("t",))
    problem = fode.FodeProblem(
        doc["alpha"], float(doc.get("a", 0.0)), float(doc.get("b", 1.0)),
        lambda t, x: f(t, x), lambda t: g(t), float(doc.get("x0", 0.0)), doc.get("start"),
    )
    method = args.method or doc.get("method", "moment")
    N = args.N if args.N is not None else doc.get("N")
    rel = args.tol if args.tol is not None else float(doc.get("tol", 1e-6))
    sol = fode.solve_fode(problem, method, N, rel_tol=rel, abs_tol=min(1e-9, rel * 1e-3))
    points = int(doc.get("points", args.points))
    ts = np.linspace(problem.a, problem.b, points)
    xs = np.atleast_1d(sol(ts))
    summary = {"method": sol.method.value, "N": sol.N, "t_start": sol.t_start, "E": None}
    if doc.get("reference") is not None:
        ref = parse(str(doc["reference"]), ("t",))
        summary["E"] = sol.error_vs(lambda t: ref(t))
    out.emit(["t", "x"], [[t, x] for t, x in zip(ts, xs)], summary)


def cmd_variational(args, out: Output):
    al = specfun.as_alpha(args.alpha)
    N = args.order
    if args.example == "51":
        exact = lambda t: oracles.exact_ex51_solution(al, t)  # noqa: E731
        solver = {
            "integer": varsolve.ex51_integer_closed_form,
            "moment": varsolve.ex51_moment_closed_form,
            "moment-tpbvp": varsolve.ex51_moment_tpbvp,
        }[args.method]
        kwargs = {"tol": args.tol} if args.tol is not None and args.method == "moment-tpbvp" else {}
    else:
        exact = lambda t: oracles.exact_ex52_solution(al, t)  # noqa: E731
        if args.method == "integer":
            varsolve.ex52_integer(al, N)
        if args.method != "moment-tpbvp":
            raise UsageError("example 52 has no closed form; use --method moment-tpbvp")
        solver = varsolve.ex52_moment_tpbvp
        kwargs = {"tol": args.tol} if args.tol is not None else {}
    sol = solver(al, N, **kwargs)
    ts = np.linspace(0.0, 1.0, args.points)
    xs = np.atleast_1d(sol(ts))
    rows = [[t, x, exact(t)] for t, x in zip(ts, xs)]
    summary = {"example": args.example, "method": args.method, "alpha": al, "N": N, "E": sol.error_vs_exact}
    out.emit(["t", "x_approx", "x_exact"], rows, summary)


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------


def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--out", metavar="PATH", default=default, help="write output here instead of stdout")
    p.add_argument("--tol", type=float, metavar="REAL", default=default, help="numerical tolerance of the solver in use")
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS if suppress else False,
                   help="emit a JSON document instead of CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracexp", description="Expansion-based approximations of fractional derivatives.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("coeffs", help="expansion coefficients")
    _global_flags(p, True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--n", type=int, help="inner order of the generalized expansion")

    p = sub.add_parser("tables", help="reproduce the coefficient tables")
    _global_flags(p, True)
    p.add_argument("which", choices=["table1", "table2"])

    p = sub.add_parser("eval", help="approximate a derivative on a grid")
    _global_flags(p, True)
    p.add_argument("function", help="expression in t, e.g. 'exp(2*t)'")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--method", choices=[m.value for m in expansions.Method], default="moment")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--side", choices=["left", "right"], default="left")
    p.add_argument("--a", type=float, default=0.0, help="base point of left derivatives")
    p.add_argument("--b", type=float, help="base point of right derivatives")
    p.add_argument("--grid", default="0.1:1:50", help="START:STOP:COUNT")
    p.add_argument("--moments", choices=["ode", "quad"], default="ode")
    p.add_argument("--bound", action="store_true", help="add the truncation bound column")

    p = sub.add_parser("tabular", help="differentiate sampled data from a CSV file")
    _global_flags(p, True)
    p.add_argument("input")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--N", type=int, default=7)
    p.add_argument("--adaptive", type=float, metavar="EPS", help="choose N by the successive-difference rule")
    p.add_argument("--N0", type=int, default=2)
    p.add_argument("--Nmax", type=int, default=200)
    p.add_argument("--summary", metavar="PATH", help="JSON sidecar path (default: OUT with .json suffix)")

    p = sub.add_parser("fode", help="solve a fractional initial value problem")
    _global_flags(p, True)
    p.add_argument("problem", help="JSON problem file")
    p.add_argument("--method", choices=[m.value for m in fode.FodeMethod])
    p.add_argument("--N", type=int)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--summary", metavar="PATH")

    p = sub.add_parser("variational", help="solve one of the two variational examples")
    _global_flags(p, True)
    p.add_argument("--example", choices=["51", "52"], required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--order", type=int, required=True, help="truncation order N")
    p.add_argument("--method", choices=["integer", "moment", "moment-tpbvp"], default="moment")
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--summary", metavar="PATH")
    return parser


COMMANDS = {
    "coeffs": cmd_coeffs,
    "tables": cmd_tables,
    "eval": cmd_eval,
    "tabular": cmd_tabular,
    "fode": cmd_fode,
    "variational": cmd_variational,
}

_USAGE = (UsageError, InputFormatError, DomainError, UnsupportedProblemError, OSError)
_NUMERIC = (AccuracyError, IntegrationError, IllPosedError, NonConvergenceError, ArithmeticError)


def _report(exc: BaseException, code: int) -> int:
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("location", "t_fail", "last_norm"):
        if getattr(exc, attr, None) is not None:
            err[attr] = _jsonable(getattr(exc, attr))
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args, Output(args))
    except _USAGE as exc:
        return _report(exc, 2)
    except _NUMERIC as exc:
        return _report(exc, 3)
    return 0


if __name__ == "__main__":
    sys.exit(main())
