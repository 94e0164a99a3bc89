"""Plain-text formats for algebras, condition data and polynomials.

All formats are line based; ``#`` starts a comment and blank lines are
ignored.  Numbers may be integers, decimals or ``a/b`` fractions and are
read exactly.

Algebra file::

    p 1
    q 0
    labels 1 i          # optional
    gamma 0 0 0 1       # i j k value, nonzero entries only
    gamma 0 1 1 1
    gamma 1 0 1 1
    gamma 1 1 0 -1

Condition file (coefficient vectors over the full basis)::

    a0 1 0              # one line per even basis element, e_0 first
    a0 0 1
    eps 0 0 1 0         # one line per odd basis element
    breakpoints 1 3     # s_1 .. s_{r+1}
    a 1 0 0 0           # one multiplier per odd index

Polynomial file::

    n 1
    m 1
    center 0 0 0 0      # optional, flat coordinates
    coef (1) (1) [1,0,0,0]
    coef (0) (2) [1,0,0,0]

Each ``coef`` line carries ``I`` then ``J_1 .. J_r`` then the coefficient.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .conditions import SliceSpec
from .csa_core import AlgebraElement, StructureTable
from .superfunc import QsPoly, Superspace

__all__ = [
    "ConditionData",
    "FormatError",
    "dump_algebra",
    "dump_qspoly",
    "parse_algebra",
    "parse_conditions",
    "parse_qspoly",
    "read_algebra",
    "read_conditions",
    "read_qspoly",
]


class FormatError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line.split(None, 1)[0], line


def _num(tok: str, no: int) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"not a number: {tok!r}", no) from None


def _ints(parts, no):
    try:
        return [int(v) for v in parts]
    except ValueError:
        raise FormatError("expected integers", no) from None


def _fmt(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else str(x)


# -- algebra ------------------------------------------------------------------------

def parse_algebra(text: str, exact: bool = True, name: str = "") -> StructureTable:
    p = q = None
    labels = None
    entries = []
    for no, key, line in _lines(text):
        parts = line.split()[1:]
        if key in ("p", "q"):
            if len(parts) != 1:
                raise FormatError(f"{key} takes one integer", no)
            val = _ints(parts, no)[0]
            if val < 0:
                raise FormatError(f"{key} must be non-negative", no)
            if key == "p":
                p = val
            else:
                q = val
        elif key == "labels":
            labels = parts
        elif key == "gamma":
            if len(parts) != 4:
                raise FormatError("gamma takes i j k value", no)
            entries.append((no, *_ints(parts[:3], no), _num(parts[3], no)))
        else:
            raise FormatError(f"unknown key {key!r}", no)
    if p is None or q is None:
        raise FormatError("both p and q are required")
    dim = p + q + 1
    g = np.zeros((dim, dim, dim), dtype=object)
    g[...] = Fraction(0)
    for no, i, j, k, v in entries:
        if not all(0 <= idx < dim for idx in (i, j, k)):
            raise FormatError(f"index out of range 0..{dim - 1}", no)
        g[i, j, k] = v
    if labels is not None and len(labels) != dim:
        raise FormatError(f"labels needs {dim} names")
    return StructureTable(p, q, g, labels=labels, exact=exact, name=name)


def dump_algebra(t: StructureTable) -> str:
    out = [f"p {t.p}", f"q {t.q}", "labels " + " ".join(t.labels)]
    for i, j, k in zip(*np.nonzero(np.array(t.gamma != 0, dtype=bool))):
        out.append(f"gamma {i} {j} {k} {_fmt(t.gamma[i, j, k])}")
    return "\n".join(out) + "\n"


def read_algebra(path: str | Path, exact: bool = True) -> StructureTable:
    return parse_algebra(Path(path).read_text(), exact=exact, name=Path(path).stem)


# -- conditions ---------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionData:
    a0_basis: tuple[AlgebraElement, ...] | None
    eps_basis: tuple[AlgebraElement, ...] | None
    slices: SliceSpec | None


def parse_conditions(text: str, t: StructureTable) -> ConditionData:
    a0, eps, mult = [], [], []
    breaks = None
    for no, key, line in _lines(text):
        parts = line.split()[1:]
        if key in ("a0", "eps", "a"):
            if len(parts) != t.dim:
                raise FormatError(f"{key} needs {t.dim} coefficients", no)
            elem = t.element([_num(v, no) for v in parts])
            {"a0": a0, "eps": eps, "a": mult}[key].append(elem)
        elif key == "breakpoints":
            breaks = _ints(parts, no)
        else:
            raise FormatError(f"unknown key {key!r}", no)
    slices = None
    if breaks is not None or mult:
        if breaks is None:
            raise FormatError("multipliers given without breakpoints")
        try:
            slices = SliceSpec(tuple(breaks), tuple(mult))
        except ValueError as exc:
            raise FormatError(str(exc)) from None
    return ConditionData(tuple(a0) or None, tuple(eps) or None, slices)


def read_conditions(path: str | Path, t: StructureTable) -> ConditionData:
    return parse_conditions(Path(path).read_text(), t)


# -- polynomials -----------------------------------------------------------------------

_TUPLE = re.compile(r"\(([^)]*)\)")
_VECTOR = re.compile(r"\[([^\]]*)\]")


def _tuple_vals(body: str, no: int) -> tuple[int, ...]:
    body = body.strip()
    return tuple(_ints([v for v in body.split(",") if v.strip()], no)) if body else ()


def parse_qspoly(text: str, t: StructureTable, slices: SliceSpec | None = None) -> QsPoly:
    """Read a polynomial; ``slices`` is required when ``m > 0`` and the algebra has an odd part."""
    n = m = None
    center = None
    rows = []
    for no, key, line in _lines(text):
        rest = line[len(key):].strip()
        if key in ("n", "m"):
            val = _ints(rest.split(), no)
            if len(val) != 1 or val[0] < 0:
                raise FormatError(f"{key} takes one non-negative integer", no)
            if key == "n":
                n = val[0]
            else:
                m = val[0]
        elif key == "center":
            center = [_num(v, no) for v in rest.split()]
        elif key == "coef":
            vec = _VECTOR.search(rest)
            if vec is None:
                raise FormatError("coef needs a [c0,...] coefficient vector", no)
            tuples = [_tuple_vals(b, no) for b in _TUPLE.findall(rest[: vec.start()])]
            coeffs = [_num(v.strip(), no) for v in vec.group(1).split(",") if v.strip()]
            rows.append((no, tuples, coeffs))
        else:
            raise FormatError(f"unknown key {key!r}", no)
    if n is None or m is None:
        raise FormatError("both n and m are required")
    space = Superspace(t, n, m, slices)
    if center is not None and len(center) != space.N:
        raise FormatError(f"center needs {space.N} coordinates")
    terms = {}
    for no, tuples, coeffs in rows:
        if len(tuples) != 1 + space.r:
            raise FormatError(f"expected {1 + space.r} index tuples (I, J_1..J_r)", no)
        if len(tuples[0]) != n or any(len(J) != m for J in tuples[1:]):
            raise FormatError(f"I needs {n} entries and each J needs {m}", no)
        if len(coeffs) != t.dim:
            raise FormatError(f"coefficient vector needs {t.dim} entries", no)
        key = tuple(v for part in tuples for v in part)
        elem = t.element(coeffs)
        terms[key] = terms[key] + elem if key in terms else elem
    return QsPoly(space, terms, center)


def dump_qspoly(P: QsPoly) -> str:
    sp = P.space
    out = [f"n {sp.n}", f"m {sp.m}"]
    if any(v != 0 for v in P.center):
        out.append("center " + " ".join(_fmt(v) for v in P.center))
    for key in sorted(P.terms):
        parts = P.split_key(key)
        idx = " ".join("(" + ",".join(str(v) for v in part) + ")" for part in parts)
        vec = "[" + ",".join(_fmt(v) for v in P.terms[key].coeffs) + "]"
        out.append(f"coef {idx} {vec}")
    return "\n".join(out) + "\n"


def read_qspoly(path: str | Path, t: StructureTable, slices: SliceSpec | None = None) -> QsPoly:
    return parse_qspoly(Path(path).read_text(), t, slices)
