"""Command-line entry point.

Exit codes: 0 when every requested check passes, 1 when a check fails,
2 on parse, I/O or usage errors.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import acceptance
from . import conditions as cond
from .csa_core import StructureTable, builtin, validate
from .formats import FormatError, dump_qspoly, read_algebra, read_conditions, read_qspoly
from .kernels import KERNEL_SIGN, SingularPoint, d_second_of_field, kernel_batch
from .quadrature import BallDomain, PointOutsideDomain, QuadratureSpec, reproduce
from .superfunc import NotQs, Superspace, eval_qs, qs_to_real, real_to_qs, taylor_coefficients

SCHEMA_VERSION = 1
DEFAULT_SEED = 12345


class UsageError(Exception):
    pass


def _emit(payload: dict, output: str | None) -> None:
    text = json.dumps({"schema_version": SCHEMA_VERSION, **payload}, indent=2, sort_keys=True) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _floats(elem) -> list[float]:
    return [float(c) for c in elem.coeffs]


def _load_algebra(args) -> StructureTable:
    exact = getattr(args, "mode", "exact") == "exact"
    if args.builtin and args.algebra:
        raise UsageError("give either --builtin or --algebra, not both")
    if args.builtin:
        try:
            return builtin(args.builtin, exact=exact)
        except (KeyError, ValueError) as exc:
            raise UsageError(str(exc)) from None
    if args.algebra:
        return read_algebra(args.algebra, exact=exact)
    raise UsageError("an algebra is required (--builtin NAME or --algebra FILE)")


def _default_slices(t: StructureTable, name: str | None):
    if t.q == 0:
        return None, None
    base = (name or "").partition(":")[0]
    if base == "complex_grassmann":
        return cond.grassmann_slices(t)
    if base == "example3":
        return cond.example3_slices(t)
    raise UsageError("this algebra has no default slice spec; pass --slices FILE")


def _load_slices(args, t: StructureTable):
    if getattr(args, "slices", None):
        data = read_conditions(args.slices, t)
        if data.slices is None:
            raise UsageError("slice file has no breakpoints")
        return data.eps_basis, data.slices
    return _default_slices(t, args.builtin)


def _point(text: str | None, N: int, what: str) -> tuple | None:
    if text is None:
        return None
    try:
        vals = tuple(Fraction(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise UsageError(f"{what}: expected {N} numbers") from None
    if len(vals) != N:
        raise UsageError(f"{what}: expected {N} numbers, got {len(vals)}")
    return vals


# -- algebra ------------------------------------------------------------------------------

def cmd_algebra(args) -> int:
    t = _load_algebra(args)
    if args.action == "verify":
        report = validate(t)
        payload = {"algebra": t.name, "validation": report.to_dict(), "conditions": []}
        ok = report.passed
        if args.a0 or args.a0_default:
            basis = read_conditions(args.a0, t).a0_basis if args.a0 else None
            res = cond.verify_A0(t, basis)
            payload["conditions"].append(res.to_dict())
            ok &= res.passed
        if args.a1 or args.a1_default:
            if args.a1:
                data = read_conditions(args.a1, t)
                if data.eps_basis is None or data.slices is None:
                    raise UsageError("A1 file needs eps lines, breakpoints and multipliers")
                eps, s = data.eps_basis, data.slices
            else:
                eps, s = _default_slices(t, args.builtin)
                if s is None:
                    raise UsageError("A1 needs an odd part")
            res = cond.verify_A1(t, eps, s)
            payload["conditions"].append(res.to_dict())
            ok &= res.passed
        payload["pass"] = ok
        _emit(payload, args.output)
        return 0 if ok else 1
    if args.action == "find-i":
        try:
            iota = cond.find_sqrt_minus_one(t, starts=args.starts, seed=args.seed)
        except cond.NotFound as exc:
            _emit({"algebra": t.name, "pass": False, "error": "NotFound", "message": str(exc)}, args.output)
            return 1
        residual = (iota * iota + iota.table.one()).norm()
        _emit({"algebra": t.name, "pass": residual < 1e-12, "root": _floats(iota), "residual": residual}, args.output)
        return 0 if residual < 1e-12 else 1
    # complexify
    try:
        if args.iota:
            iota = t.element([Fraction(v) for v in args.iota.replace(",", " ").split()])
        else:
            iota = cond.find_sqrt_minus_one(t, seed=args.seed)
        pairing = cond.complexify(t, iota)
    except (cond.NotFound, cond.NotASquareRoot, cond.NotCentral, cond.OddDimension) as exc:
        _emit({"algebra": t.name, "pass": False, "error": type(exc).__name__, "message": str(exc)}, args.output)
        return 1
    _emit({"algebra": t.name, "pass": True, **pairing.to_dict()}, args.output)
    return 0


# -- kernel ----------------------------------------------------------------------------------

def cmd_kernel(args) -> int:
    t = _load_algebra(args)
    _, s = _load_slices(args, t)
    space = Superspace(t, args.n, args.m, s)
    rng = np.random.default_rng(args.seed)
    fn = lambda X: kernel_batch(space, X)  # noqa: E731
    rows = []
    for _ in range(args.points):
        u = rng.standard_normal(space.N)
        x = u / np.linalg.norm(u) * rng.uniform(args.rmin, args.rmax)
        coeffs = kernel_batch(space, x[None, :])[0]
        res = float(np.max(np.abs(d_second_of_field(space, fn, x, args.h))))
        rows.append({"point": x.tolist(), "coefficients": coeffs.tolist(), "fd_residual": res})
    worst = max((r["fd_residual"] for r in rows), default=0.0)
    ok = worst < args.tol
    _emit({"algebra": t.name, "n": args.n, "m": args.m, "N": space.N, "kernel_sign": KERNEL_SIGN, "h": args.h, "tolerance": args.tol, "max_fd_residual": worst, "pass": ok, "rows": rows}, args.output)
    return 0 if ok else 1


# -- reproduce -------------------------------------------------------------------------------

def cmd_reproduce(args) -> int:
    t = _load_algebra(args)
    _, s = _load_slices(args, t)
    f = read_qspoly(args.f, t, s)
    space = f.space
    if (args.n is not None and args.n != space.n) or (args.m is not None and args.m != space.m):
        raise UsageError("--n/--m disagree with the polynomial file")
    center = _point(args.center, space.N, "--center") or space.zero_point()
    point = _point(args.point, space.N, "--point") or center
    D = BallDomain(tuple(float(v) for v in center), args.radius)
    spec = QuadratureSpec(args.method, args.samples, args.seed, args.workers)
    res = reproduce(f, point, D, spec)
    expected = eval_qs(f, point).to_numpy()
    value = res.value.to_numpy()
    err = float(np.max(np.abs(value - expected)))
    ok = err <= (3 * res.stderr if args.method == "monte_carlo" else args.tol)
    _emit(
        {
            "algebra": t.name,
            "N": space.N,
            "method": args.method,
            "samples": args.samples,
            "seed": args.seed,
            "kernel_sign": KERNEL_SIGN,
            "expected": expected.tolist(),
            "value": value.tolist(),
            "abs_error": err,
            "stderr": res.stderr,
            "pass": ok,
        },
        args.output,
    )
    return 0 if ok else 1


# -- series ---------------------------------------------------------------------------------

def cmd_series(args) -> int:
    t = _load_algebra(args)
    _, s = _load_slices(args, t)
    P = read_qspoly(args.f, t, s)
    space = P.space
    real = qs_to_real(P)
    if args.action == "expand":
        center = _point(args.center, space.N, "--center") or P.center
        T = taylor_coefficients(real, space, center, max(P.degree, 0))
        text = dump_qspoly(T)
        if args.output:
            Path(args.output).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    back = real_to_qs(real, space, P.center)
    ok = back == P if t.exact else back.allclose(P)
    _emit({"algebra": t.name, "terms": len(P.terms), "real_terms": len(real.terms), "degree": P.degree, "pass": ok}, args.output)
    return 0 if ok else 1


# -- suite ---------------------------------------------------------------------------------

def cmd_suite(args) -> int:
    only = [c for part in (args.only or []) for c in part.split(",") if c]
    unknown = [c for c in only if c not in acceptance.CRITERIA]
    if unknown:
        raise UsageError(f"unknown criterion id(s): {', '.join(unknown)}; known: {', '.join(acceptance.ids())}")
    results = acceptance.run(only or None)
    buf = io.StringIO()
    stamp = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    buf.write(f"# generated {stamp} schema_version={SCHEMA_VERSION} kernel_sign={KERNEL_SIGN:+d}\n")
    writer = csv.DictWriter(buf, fieldnames=["id", "expected", "observed", "tolerance", "pass"], lineterminator="\n")
    writer.writeheader()
    for r in results:
        writer.writerow(r.row())
    if args.output:
        Path(args.output).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0 if all(r.passed for r in results) else 1


# -- parser -----------------------------------------------------------------------------------

def _add_algebra_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--builtin", help="complex, hyperbolic, example3 or complex_grassmann:G")
    p.add_argument("--algebra", help="algebra definition file")
    p.add_argument("--mode", choices=["exact", "float"], default="exact", help="numeric backing (default exact)")
    p.add_argument("--output", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="superanalysis", description="Function theory on commutative superalgebras.")
    sub = parser.add_subparsers(dest="command", required=True)

    alg = sub.add_parser("algebra", help="algebra axioms, conditions (A0)/(A1), square roots of -1")
    alg_sub = alg.add_subparsers(dest="action", required=True)
    v = alg_sub.add_parser("verify", help="check the superalgebra axioms and optionally (A0) and (A1)")
    _add_algebra_args(v)
    v.add_argument("--a0", help="condition file with a0 lines (even basis, e0 first)")
    v.add_argument("--a0-default", action="store_true", help="check (A0) on the algebra's own even basis")
    v.add_argument("--a1", help="condition file with eps lines, breakpoints and multipliers")
    v.add_argument("--a1-default", action="store_true", help="check (A1) with the built-in slice data")
    fi = alg_sub.add_parser("find-i", help="Newton search for an even square root of -1")
    _add_algebra_args(fi)
    fi.add_argument("--starts", type=int, default=cond.NEWTON_STARTS)
    fi.add_argument("--seed", type=int, default=cond.NEWTON_SEED)
    cx = alg_sub.add_parser("complexify", help="pair a real basis into a complex one using a central square root of -1")
    _add_algebra_args(cx)
    cx.add_argument("--iota", help="coefficients of the square root; searched for when omitted")
    cx.add_argument("--seed", type=int, default=cond.NEWTON_SEED)

    ker = sub.add_parser("kernel", help="fundamental solution of d''")
    ker_sub = ker.add_subparsers(dest="action", required=True)
    ks = ker_sub.add_parser("sample", help="kernel coefficients and finite-difference d'' residual at random points")
    _add_algebra_args(ks)
    ks.add_argument("--slices", help="condition file with breakpoints and multipliers")
    ks.add_argument("--n", type=int, required=True)
    ks.add_argument("--m", type=int, default=0)
    ks.add_argument("--points", type=int, default=10)
    ks.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ks.add_argument("--h", type=float, default=1e-4)
    ks.add_argument("--tol", type=float, default=1e-6)
    ks.add_argument("--rmin", type=float, default=0.5)
    ks.add_argument("--rmax", type=float, default=2.0)

    rep = sub.add_parser("reproduce", help="integral representation of a qS polynomial on a ball")
    _add_algebra_args(rep)
    rep.add_argument("--slices", help="condition file with breakpoints and multipliers")
    rep.add_argument("--f", required=True, help="polynomial file")
    rep.add_argument("--n", type=int)
    rep.add_argument("--m", type=int)
    rep.add_argument("--center", help="ball center, N numbers (default 0)")
    rep.add_argument("--radius", type=float, default=1.0)
    rep.add_argument("--point", help="evaluation point, N numbers (default: the center)")
    rep.add_argument("--method", choices=["monte_carlo", "circle_trapezoid"], default="monte_carlo")
    rep.add_argument("--samples", type=int, default=100_000)
    rep.add_argument("--seed", type=int, default=DEFAULT_SEED)
    rep.add_argument("--workers", type=int, default=1)
    rep.add_argument("--tol", type=float, default=1e-10, help="abs tolerance for circle_trapezoid")

    ser = sub.add_parser("series", help="hypervariable polynomials and Taylor coefficients")
    ser_sub = ser.add_subparsers(dest="action", required=True)
    se = ser_sub.add_parser("expand", help="re-expand a polynomial about a new center (polynomial file out)")
    _add_algebra_args(se)
    se.add_argument("--slices")
    se.add_argument("--f", required=True)
    se.add_argument("--center", help="new center, N numbers")
    sr = ser_sub.add_parser("roundtrip", help="expand into real coordinates and recover the coefficients")
    _add_algebra_args(sr)
    sr.add_argument("--slices")
    sr.add_argument("--f", required=True)

    su = sub.add_parser("suite", help="run the acceptance battery and write a CSV summary")
    su.add_argument("--only", action="append", help="criterion id (repeatable or comma separated)")
    su.add_argument("--output", help="CSV path (default stdout)")
    su.add_argument("--list", action="store_true", help="print the criterion ids and exit")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        if args.command == "algebra":
            return cmd_algebra(args)
        if args.command == "kernel":
            return cmd_kernel(args)
        if args.command == "reproduce":
            return cmd_reproduce(args)
        if args.command == "series":
            return cmd_series(args)
        if args.list:
            print("\n".join(acceptance.ids()))
            return 0
        return cmd_suite(args)
    except (UsageError, FormatError, OSError, NotQs, PointOutsideDomain, SingularPoint, cond.NotABasis, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
