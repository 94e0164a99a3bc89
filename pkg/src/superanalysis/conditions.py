"""Conditions (A0) and (A1), square roots of -1 and complex structures."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .csa_core import AlgebraElement, StructureTable, left_mult_matrix, span_rank

__all__ = [
    "A0Result",
    "A1Result",
    "ComplexPairing",
    "NotABasis",
    "NotASquareRoot",
    "NotCentral",
    "NotFound",
    "OddDimension",
    "SliceSpec",
    "complexify",
    "default_a0_basis",
    "example3_slices",
    "grassmann_slices",
    "find_sqrt_minus_one",
    "verify_A0",
    "verify_A1",
]

FLOAT_TOL = 1e-12
NEWTON_STARTS = 64
NEWTON_ITERS = 100
NEWTON_SEED = 20240611


class NotABasis(ValueError):
    pass


class NotFound(LookupError):
    pass


class NotCentral(ValueError):
    pass


class NotASquareRoot(ValueError):
    pass


class OddDimension(RuntimeError):
    pass


@dataclass(frozen=True)
class SliceSpec:
    """Breakpoints ``s_1 = 1 < ... < s_{r+1} = q + 1`` and even multipliers ``a_1..a_q``.

    Breakpoints are 1-based, matching the odd basis labels ``eps_1..eps_q``.
    """

    breakpoints: tuple[int, ...]
    multipliers: tuple[AlgebraElement, ...]

    def __post_init__(self):
        s = tuple(int(v) for v in self.breakpoints)
        object.__setattr__(self, "breakpoints", s)
        object.__setattr__(self, "multipliers", tuple(self.multipliers))
        q = len(self.multipliers)
        if not s or s[0] != 1 or s[-1] != q + 1:
            raise ValueError(f"breakpoints must run from 1 to q+1 = {q + 1}, got {s}")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ValueError(f"breakpoints must be strictly increasing, got {s}")
        for j, a in enumerate(self.multipliers, start=1):
            if not a.is_even():
                raise ValueError(f"multiplier a_{j} is not even")

    @property
    def q(self) -> int:
        return len(self.multipliers)

    @property
    def r(self) -> int:
        return len(self.breakpoints) - 1

    def slice_range(self, k: int) -> range:
        """1-based odd indices of slice ``k`` (0-based slice number)."""
        return range(self.breakpoints[k], self.breakpoints[k + 1])

    def slice_of(self, j: int) -> int:
        for k in range(self.r):
            if j in self.slice_range(k):
                return k
        raise IndexError(f"odd index {j} outside 1..{self.q}")

    def lead(self, k: int) -> int:
        return self.breakpoints[k]

    def a(self, j: int) -> AlgebraElement:
        return self.multipliers[j - 1]

    @classmethod
    def trivial(cls, t: StructureTable) -> "SliceSpec":
        """Single-slice spec for ``q = 0`` algebras."""
        if t.q:
            raise ValueError("trivial slice spec only exists for q = 0")
        return cls((1,), ())


@dataclass(frozen=True)
class A0Result:
    passed: bool
    residual: float
    sum_of_squares: AlgebraElement

    def to_dict(self) -> dict:
        return {
            "condition": "A0",
            "pass": self.passed,
            "residuals": [self.residual],
            "diagnostics": [] if self.passed else [{"check": "sum_of_squares", "residual": self.residual}],
        }


@dataclass(frozen=True)
class A1Result:
    passed: bool
    residuals: tuple[float, ...]
    diagnostics: tuple[dict, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "condition": "A1",
            "pass": self.passed,
            "residuals": list(self.residuals),
            "diagnostics": list(self.diagnostics),
        }


def _is_zero(x: AlgebraElement) -> bool:
    return x.is_zero(0.0 if x.table.exact else FLOAT_TOL)


def _check_independent(elems: Sequence[AlgebraElement], expected: int, what: str):
    if len(elems) != expected:
        raise NotABasis(f"{what}: expected {expected} elements, got {len(elems)}")
    if expected and span_rank(list(elems)) < expected:
        raise NotABasis(f"{what}: elements are linearly dependent")


def default_a0_basis(t: StructureTable) -> list[AlgebraElement]:
    return [t.basis(i) for i in range(t.p + 1)]


def verify_A0(t: StructureTable, basis: Sequence[AlgebraElement] | None = None) -> A0Result:
    """Check ``sum_k b_k^2 = 0`` for an even basis with ``b_0 = e_0``."""
    basis = default_a0_basis(t) if basis is None else list(basis)
    for b in basis:
        if not b.is_even():
            raise NotABasis("A0 basis elements must be even")
    _check_independent(basis, t.p + 1, "A0 basis")
    if basis[0] != t.one():
        raise NotABasis("A0 basis must start with e_0")
    total = t.zero()
    for b in basis:
        total = total + b * b
    return A0Result(_is_zero(total), total.norm(), total)


def verify_A1(t: StructureTable, eps_basis: Sequence[AlgebraElement], s: SliceSpec) -> A1Result:
    """Check the three parts of (A1) and collect every failure."""
    eps_basis = list(eps_basis)
    for e in eps_basis:
        if not e.is_odd():
            raise NotABasis("A1 basis elements must be odd")
    _check_independent(eps_basis, t.q, "A1 basis")
    if s.q != t.q:
        raise ValueError(f"slice spec has q = {s.q}, algebra has q = {t.q}")
    diagnostics = []
    residuals = []
    for k in range(s.r):
        lead = s.lead(k)
        a_lead = s.a(lead)
        if not _is_zero(a_lead - t.one()):
            res = (a_lead - t.one()).norm()
            diagnostics.append({"check": "lead_multiplier", "slice": k + 1, "index": lead, "residual": res})
        for j in s.slice_range(k):
            diff = eps_basis[j - 1] - s.a(j) * eps_basis[lead - 1]
            if not _is_zero(diff):
                diagnostics.append({"check": "eps_relation", "slice": k + 1, "index": j, "lead": lead, "residual": diff.norm()})
        total = t.zero()
        for j in s.slice_range(k):
            total = total + s.a(j) * s.a(j)
        residuals.append(total.norm())
        if not _is_zero(total):
            diagnostics.append({"check": "slice_sum_of_squares", "slice": k + 1, "residual": total.norm()})
    return A1Result(not diagnostics, tuple(residuals), tuple(diagnostics))


def _snap_exact(t: StructureTable, coeffs: np.ndarray) -> AlgebraElement | None:
    """Round a float root to small rationals and keep it if it is exact."""
    cand = t.element([Fraction(float(c)).limit_denominator(64) for c in coeffs] + [0] * t.q)
    if _is_zero(cand * cand + t.one()):
        return cand
    return None


def find_sqrt_minus_one(
    t: StructureTable,
    starts: int = NEWTON_STARTS,
    iterations: int = NEWTON_ITERS,
    seed: int = NEWTON_SEED,
) -> AlgebraElement:
    """Newton search for an even ``iota`` with ``iota^2 = -e_0``.

    Starts are drawn up front from one seeded generator and tried in order,
    so the first success is reproducible.  Exact tables get the root snapped
    to nearby small rationals when that is an exact root.
    """
    ft = t.to_float()
    d = t.p + 1
    rng = np.random.default_rng(seed)
    initial = rng.standard_normal((starts, d))
    target = np.zeros(d)
    target[0] = -1.0

    def residual(v):
        x = AlgebraElement(ft, list(v) + [0.0] * t.q)
        return (x * x).to_numpy()[:d] - target, x

    for start in initial:
        v = start.copy()
        f, x = residual(v)
        err = np.linalg.norm(f)
        for _ in range(iterations):
            if err < FLOAT_TOL:
                break
            jac = 2.0 * left_mult_matrix(x, ft)[:d, :d]
            step = np.linalg.lstsq(jac, -f, rcond=None)[0]
            lam = 1.0
            while True:
                nv = v + lam * step
                nf, nx = residual(nv)
                nerr = np.linalg.norm(nf)
                if nerr <= err or lam < 1e-6:
                    break
                lam *= 0.5
            v, f, x, err = nv, nf, nx, nerr
        if err < FLOAT_TOL:
            if t.exact:
                snapped = _snap_exact(t, v)
                if snapped is not None:
                    return snapped
            return AlgebraElement(ft, list(v) + [0.0] * t.q)
    raise NotFound(
        f"no even square root of -e0 found after {starts} starts: either none exists "
        "(condition (A0) cannot hold for this even part) or the search budget was exhausted"
    )


@dataclass(frozen=True)
class ComplexPairing:
    iota: AlgebraElement
    pairs: tuple[tuple[AlgebraElement, AlgebraElement], ...]

    @property
    def complex_dim(self) -> int:
        return len(self.pairs)

    def to_dict(self) -> dict:
        return {
            "iota": [float(c) for c in self.iota.coeffs],
            "complex_dim": self.complex_dim,
            "pairs": [[[float(c) for c in b.coeffs], [float(c) for c in ib.coeffs]] for b, ib in self.pairs],
        }


def complexify(t: StructureTable, iota: AlgebraElement) -> ComplexPairing:
    """Real basis ``(b_0, iota b_0, b_1, iota b_1, ...)`` of the whole algebra."""
    tol = 0.0 if (t.exact and iota.table.exact) else FLOAT_TOL
    if not (iota * iota + iota.table.one()).is_zero(tol):
        raise NotASquareRoot("iota^2 != -e0")
    for i in range(t.dim):
        b = iota.table.basis(i)
        if not (iota * b - b * iota).is_zero(tol):
            raise NotCentral(f"iota does not commute with basis element {t.labels[i]}")
    pairs = []
    span: list[AlgebraElement] = []
    for i in range(t.dim):
        b = iota.table.basis(i)
        if span and span_rank(span + [b]) == len(span):
            continue
        ib = iota * b
        new_rank = span_rank(span + [b, ib])
        if new_rank != len(span) + 2:
            raise OddDimension(f"adjoining {t.labels[i]} and iota*{t.labels[i]} raised the rank by {new_rank - len(span)}")
        span += [b, ib]
        pairs.append((b, ib))
    if len(span) != t.dim:
        raise OddDimension(f"pairing spans dimension {len(span)} of {t.dim}")
    return ComplexPairing(iota, tuple(pairs))


def grassmann_slices(t: StructureTable) -> tuple[list[AlgebraElement], SliceSpec]:
    """Canonical (A1) data for ``complex_grassmann(g)``: pairs ``(eta_S, i eta_S)``."""
    eps = [t.eps(l) for l in range(1, t.q + 1)]
    i = t.basis(1)
    mult = [t.one() if l % 2 == 1 else i for l in range(1, t.q + 1)]
    return eps, SliceSpec(tuple(range(1, t.q + 2, 2)), tuple(mult))


def example3_slices(t: StructureTable) -> tuple[list[AlgebraElement], SliceSpec]:
    """Default slice data for the 6 + 6 table example.

    Odd basis ``(eps1, eps2, eps3, eps6, eps4, eps5)`` with
    ``a = (e0, e1, e4, e5 | e0, e1)``.
    """
    order = [1, 2, 3, 6, 4, 5]
    eps = [t.eps(l) for l in order]
    e = t.basis
    mult = (e(0), e(1), e(4), e(5), e(0), e(1))
    return eps, SliceSpec((1, 5, 7), mult)
