"""Finite-dimensional real commutative superalgebras (CSAs).

A CSA is stored by its structure constants ``gamma[i, j, k]`` over the basis
``e_0, ..., e_p, eps_1, ..., eps_q`` (``eps_l`` is basis index ``p + l``):

    e_i e_j = sum_k gamma[i, j, k] e_k

Two numeric backings are available.  Exact tables hold ``fractions.Fraction``
entries and every derived quantity stays rational; float tables hold
``float64``.  All built-in tables are integer valued and exact by default.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number, Rational
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
import sympy

__all__ = [
    "AlgebraElement",
    "AxiomCheck",
    "NotInvertible",
    "StructureError",
    "StructureTable",
    "ValidationReport",
    "annihilator_of_odd",
    "complex",
    "complex_grassmann",
    "even_subalgebra",
    "hyperbolic",
    "invert",
    "left_mult_matrix",
    "multiply",
    "example3_table",
    "validate",
]

FLOAT_TOL = 1e-12
SINGULAR_RTOL = 1e-10


class StructureError(ValueError):
    """Inconsistent dimensions between elements and tables."""


class NotInvertible(ArithmeticError):
    """Raised by :func:`invert` for zero divisors and nilpotents."""


def _to_exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    if isinstance(x, np.integer):
        return Fraction(int(x))
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class StructureTable:
    """Structure constants of a CSA with even part of dimension ``p + 1``
    and odd part of dimension ``q``.

    Instances are immutable after construction.
    """

    def __init__(self, p: int, q: int, gamma, labels: Sequence[str] | None = None, exact: bool = True, name: str = ""):
        if p < 0 or q < 0:
            raise StructureError("p and q must be non-negative")
        dim = p + q + 1
        arr = np.asarray(gamma, dtype=object)
        if arr.shape != (dim, dim, dim):
            raise StructureError(f"gamma has shape {arr.shape}, expected {(dim, dim, dim)}")
        self.p = p
        self.q = q
        self.dim = dim
        self.exact = exact
        self.name = name
        if labels is None:
            labels = [f"e{i}" for i in range(p + 1)] + [f"eps{l}" for l in range(1, q + 1)]
        if len(labels) != dim:
            raise StructureError("one label per basis element is required")
        self.labels = tuple(labels)
        if exact:
            g = np.empty((dim, dim, dim), dtype=object)
            for idx in itertools.product(range(dim), repeat=3):
                g[idx] = _to_exact(arr[idx])
            self.gamma = g
        else:
            self.gamma = np.array(arr, dtype=float)
        self.gamma.setflags(write=False)
        self.gamma_float = np.array(self.gamma, dtype=float)
        self.gamma_float.setflags(write=False)
        integral = all(Fraction(x).denominator == 1 for x in self.gamma.flat) if exact else False
        self._integral = integral
        # sparse product plan: for each (i, j) the nonzero (k, value) pairs
        self._plan = [
            [[(k, self.gamma[i, j, k]) for k in range(dim) if self.gamma[i, j, k] != 0] for j in range(dim)]
            for i in range(dim)
        ]

    # -- basis helpers -------------------------------------------------
    def parity(self, index: int) -> int:
        return 0 if index <= self.p else 1

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, [0] * self.dim)

    def one(self) -> "AlgebraElement":
        return self.basis(0)

    def basis(self, index: int) -> "AlgebraElement":
        c = [0] * self.dim
        c[index] = 1
        return AlgebraElement(self, c)

    def eps(self, l: int) -> "AlgebraElement":
        """Odd basis element ``eps_l`` (1-based, as in the usual notation)."""
        if not 1 <= l <= self.q:
            raise IndexError(f"eps_{l} does not exist (q = {self.q})")
        return self.basis(self.p + l)

    def element(self, coeffs: Iterable) -> "AlgebraElement":
        return AlgebraElement(self, list(coeffs))

    def scalar(self, value) -> "AlgebraElement":
        c = [0] * self.dim
        c[0] = value
        return AlgebraElement(self, c)

    def coerce(self, x):
        return _to_exact(x) if self.exact else float(x)

    def to_float(self) -> "StructureTable":
        if not self.exact:
            return self
        return StructureTable(self.p, self.q, self.gamma_float, self.labels, exact=False, name=self.name)

    def __repr__(self) -> str:
        kind = "exact" if self.exact else "float"
        label = f" {self.name!r}" if self.name else ""
        return f"StructureTable{label}(p={self.p}, q={self.q}, {kind})"


class AlgebraElement:
    """An element of a CSA, stored as its coefficient vector.

    Arithmetic operators are defined between elements of the same table and
    with real scalars; ``a * b`` is the algebra product.
    """

    __slots__ = ("table", "coeffs")

    def __init__(self, table: StructureTable, coeffs):
        coeffs = list(coeffs)
        if len(coeffs) != table.dim:
            raise StructureError(f"expected {table.dim} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "coeffs", tuple(table.coerce(c) for c in coeffs))

    def __setattr__(self, key, value):
        raise AttributeError("AlgebraElement is immutable")

    # -- structure -----------------------------------------------------
    @property
    def even_part(self) -> "AlgebraElement":
        p = self.table.p
        return AlgebraElement(self.table, [c if i <= p else 0 for i, c in enumerate(self.coeffs)])

    @property
    def odd_part(self) -> "AlgebraElement":
        p = self.table.p
        return AlgebraElement(self.table, [c if i > p else 0 for i, c in enumerate(self.coeffs)])

    def is_even(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.coeffs[self.table.p + 1:])

    def is_odd(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.coeffs[: self.table.p + 1])

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.coeffs)

    def norm(self) -> float:
        return float(np.sqrt(sum(float(c) ** 2 for c in self.coeffs)))

    def norm_squared(self):
        return sum(c * c for c in self.coeffs)

    def to_numpy(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    # -- arithmetic ----------------------------------------------------
    def _check(self, other: "AlgebraElement"):
        if other.table is not self.table and other.table.dim != self.table.dim:
            raise StructureError("elements belong to algebras of different dimension")

    def __add__(self, other):
        if isinstance(other, AlgebraElement):
            self._check(other)
            return AlgebraElement(self.table, [a + b for a, b in zip(self.coeffs, other.coeffs)])
        if isinstance(other, Number):
            return self + self.table.scalar(other)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement(self.table, [-a for a in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, (AlgebraElement, Number)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return multiply(self, other, self.table)
        if isinstance(other, Number):
            s = self.table.coerce(other)
            return AlgebraElement(self.table, [a * s for a in self.coeffs])
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Number):
            s = self.table.coerce(other)
            return AlgebraElement(self.table, [a / s for a in self.coeffs])
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers need invert()")
        out = self.table.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        terms = []
        for c, lab in zip(self.coeffs, self.table.labels):
            if c != 0:
                terms.append(f"{c}*{lab}")
        return "AlgebraElement(" + (" + ".join(terms) if terms else "0") + ")"


def multiply(a: AlgebraElement, b: AlgebraElement, t: StructureTable) -> AlgebraElement:
    """Bilinear product through the structure constants of ``t``."""
    if len(a.coeffs) != t.dim or len(b.coeffs) != t.dim:
        raise StructureError(f"coefficient vectors do not match table dimension {t.dim}")
    out = [0] * t.dim
    plan = t._plan
    for i, ai in enumerate(a.coeffs):
        if ai == 0:
            continue
        row = plan[i]
        for j, bj in enumerate(b.coeffs):
            if bj == 0:
                continue
            ab = ai * bj
            for k, g in row[j]:
                out[k] += ab * g
    return AlgebraElement(t, out)


# -- validation ---------------------------------------------------------------

@dataclass(frozen=True)
class AxiomCheck:
    axiom: str
    passed: bool
    first_violation: tuple | None = None
    violations: int = 0
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    table: str
    checks: tuple[AxiomCheck, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, axiom: str) -> AxiomCheck:
        for c in self.checks:
            if c.axiom == axiom:
                return c
        raise KeyError(axiom)

    def to_dict(self) -> dict:
        return {
            "table": self.table,
            "pass": self.passed,
            "axioms": [
                {
                    "axiom": c.axiom,
                    "pass": c.passed,
                    "first_violation": list(c.first_violation) if c.first_violation is not None else None,
                    "violations": c.violations,
                    "detail": c.detail,
                }
                for c in self.checks
            ],
        }


def _close(x, y, exact: bool) -> bool:
    return x == y if exact else abs(float(x) - float(y)) <= FLOAT_TOL


def _first_bad(mask: np.ndarray) -> tuple[tuple | None, int]:
    bad = np.argwhere(mask)
    if len(bad) == 0:
        return None, 0
    return tuple(int(v) for v in bad[0]), len(bad)


def validate(t: StructureTable) -> ValidationReport:
    """Check unit, grading, supercommutativity and associativity exhaustively.

    Never raises on a broken table; each failed axiom records its first
    violating index tuple (in lexicographic order) and the violation count.
    """
    d, p = t.dim, t.p
    exact = t.exact
    if exact and t._integral:
        g = np.array(t.gamma, dtype=np.int64)
        zero_test = lambda a: a != 0  # noqa: E731
    elif exact:
        g = t.gamma
        zero_test = lambda a: a != 0  # noqa: E731
    else:
        g = t.gamma_float
        zero_test = lambda a: np.abs(a) > FLOAT_TOL  # noqa: E731

    checks = []

    eye = np.eye(d, dtype=g.dtype if g.dtype != object else object)
    if g.dtype == object:
        eye = np.array([[Fraction(int(i == j)) for j in range(d)] for i in range(d)], dtype=object)
    left = np.array(zero_test(g[0] - eye), dtype=bool)
    right = np.array(zero_test(g[:, 0, :] - eye), dtype=bool)
    first, n_bad = _first_bad(left | right)
    checks.append(AxiomCheck("unit", n_bad == 0, first, n_bad, "gamma[0][j][k] = gamma[j][0][k] = delta_jk"))

    sig = np.array([t.parity(i) for i in range(d)])
    allowed = (sig[:, None, None] + sig[None, :, None]) % 2 == sig[None, None, :]
    grading_bad = np.array(zero_test(g), dtype=bool) & ~allowed
    first, n_bad = _first_bad(grading_bad)
    checks.append(AxiomCheck("grading", n_bad == 0, first, n_bad, "gamma[i][j][k] = 0 unless sigma(i)+sigma(j) = sigma(k)"))

    sign = np.where((sig[:, None] == 1) & (sig[None, :] == 1), -1, 1)
    gt = np.transpose(g, (1, 0, 2))
    if g.dtype == object:
        comm = g - gt * sign[:, :, None].astype(object)
    else:
        comm = g - gt * sign[:, :, None]
    first, n_bad = _first_bad(np.array(zero_test(comm), dtype=bool))
    checks.append(AxiomCheck("supercommutativity", n_bad == 0, first, n_bad, "e_i e_j = (-1)^{sigma(i)sigma(j)} e_j e_i"))

    # (e_i e_j) e_k versus e_i (e_j e_k), coefficient on e_t
    lhs = np.tensordot(g, g, axes=([2], [0]))  # [i, j, k, t] = sum_s g[i,j,s] g[s,k,t]
    rhs = np.tensordot(g, g, axes=([1], [2]))  # [i, t, j, k] = sum_s g[i,s,t] g[j,k,s]
    rhs = np.transpose(rhs, (0, 2, 3, 1))
    first, n_bad = _first_bad(np.array(zero_test(lhs - rhs), dtype=bool))
    detail = "(e_i e_j) e_k = e_i (e_j e_k), index (i, j, k, t)"
    checks.append(AxiomCheck("associativity", n_bad == 0, first, n_bad, detail))
    return ValidationReport(t.name or repr(t), tuple(checks))


# -- linear algebra on elements -------------------------------------------------

def left_mult_matrix(a: AlgebraElement, t: StructureTable) -> np.ndarray:
    """Matrix ``M`` with ``M @ coeffs(x) == coeffs(a * x)``.

    Object dtype (Fractions) for exact tables, float64 otherwise.
    """
    if len(a.coeffs) != t.dim:
        raise StructureError("dimension mismatch")
    d = t.dim
    if t.exact:
        m = np.array([[Fraction(0)] * d for _ in range(d)], dtype=object)
    else:
        m = np.zeros((d, d))
    for i, ai in enumerate(a.coeffs):
        if ai == 0:
            continue
        for j in range(d):
            for k, g in t._plan[i][j]:
                m[k, j] += ai * g
    return m


def right_mult_matrix(a: AlgebraElement, t: StructureTable) -> np.ndarray:
    """Matrix ``M`` with ``M @ coeffs(x) == coeffs(x * a)``."""
    d = t.dim
    if t.exact:
        m = np.array([[Fraction(0)] * d for _ in range(d)], dtype=object)
    else:
        m = np.zeros((d, d))
    for j, aj in enumerate(a.coeffs):
        if aj == 0:
            continue
        for i in range(d):
            for k, g in t._plan[i][j]:
                m[k, i] += aj * g
    return m


def _sympy_matrix(m: np.ndarray) -> sympy.Matrix:
    return sympy.Matrix(m.shape[0], m.shape[1], [sympy.Rational(x.numerator, x.denominator) for x in m.flat])


def _from_sympy(x) -> Fraction:
    x = sympy.Rational(x)
    return Fraction(int(x.p), int(x.q))


def invert(a: AlgebraElement, t: StructureTable) -> AlgebraElement:
    """Two-sided inverse of ``a``.

    Exact tables decide singularity exactly.  Float tables declare ``a``
    singular when its smallest singular value is below 1e-10 times the
    largest.
    """
    m = left_mult_matrix(a, t)
    rhs = [0] * t.dim
    rhs[0] = 1
    if t.exact:
        sm = _sympy_matrix(m)
        if sm.rank() < t.dim:
            raise NotInvertible(f"{a!r} is a zero divisor")
        sol = sm.LUsolve(sympy.Matrix(rhs))
        b = AlgebraElement(t, [_from_sympy(x) for x in sol])
    else:
        s = np.linalg.svd(m, compute_uv=False)
        if s[0] == 0 or s[-1] < SINGULAR_RTOL * s[0]:
            raise NotInvertible(f"{a!r} is numerically singular (cond ~ {s[0] / max(s[-1], 1e-300):.3g})")
        b = AlgebraElement(t, np.linalg.solve(m, np.array(rhs, dtype=float)))
    check = b * a - t.one()
    if not check.is_zero(0.0 if t.exact else 1e-9):
        raise NotInvertible(f"{a!r} has a right inverse but not a left inverse")
    return b


def annihilator_of_odd(t: StructureTable) -> list[AlgebraElement]:
    """Orthonormal basis (float) of ``{lam : lam * eps_l = 0 for all l}``."""
    if t.q == 0:
        return [t.to_float().basis(i) for i in range(t.dim)]
    stacked = np.vstack([np.array(right_mult_matrix(t.eps(l), t), dtype=float) for l in range(1, t.q + 1)])
    ns = scipy.linalg.null_space(stacked)
    ft = t.to_float()
    return [AlgebraElement(ft, ns[:, k]) for k in range(ns.shape[1])]


def span_rank(elements: Sequence[AlgebraElement], exact: bool | None = None) -> int:
    if not elements:
        return 0
    t = elements[0].table
    exact = t.exact if exact is None else exact
    if exact:
        return sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in e.coeffs] for e in elements]).rank()
    return int(np.linalg.matrix_rank(np.array([e.to_numpy() for e in elements]), tol=1e-9))


# -- built-in algebras ----------------------------------------------------------

def _blank(dim: int) -> np.ndarray:
    return np.zeros((dim, dim, dim), dtype=object)


def complex(exact: bool = True) -> StructureTable:  # noqa: A001 - mirrors the algebra's name
    """The complex numbers: ``e_1^2 = -e_0``, no odd part."""
    g = _blank(2)
    g[0, 0, 0] = 1
    g[0, 1, 1] = g[1, 0, 1] = 1
    g[1, 1, 0] = -1
    return StructureTable(1, 0, g, labels=["1", "i"], exact=exact, name="complex")


def hyperbolic(exact: bool = True) -> StructureTable:
    """Split-complex numbers: ``e_1^2 = +e_0``, no odd part."""
    g = _blank(2)
    g[0, 0, 0] = 1
    g[0, 1, 1] = g[1, 0, 1] = 1
    g[1, 1, 0] = 1
    return StructureTable(1, 0, g, labels=["1", "j"], exact=exact, name="hyperbolic")


# Rows of the 12 x 12 multiplication table over (e0..e5, eps1..eps6),
# transcribed entry by entry; (sign, column-of-result) or 0.
_EX3_LABELS = ["e0", "e1", "e2", "e3", "e4", "e5", "eps1", "eps2", "eps3", "eps4", "eps5", "eps6"]
_EX3_ROWS = {
    "e0": ["e0", "e1", "e2", "e3", "e4", "e5", "eps1", "eps2", "eps3", "eps4", "eps5", "eps6"],
    "e1": ["e1", "-e0", "e3", "-e2", "e5", "-e4", "eps2", "-eps1", "eps6", "eps5", "-eps4", "-eps3"],
    "e2": ["e2", "e3", 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    "e3": ["e3", "-e2", 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    "e4": ["e4", "e5", 0, 0, "e2", "e3", "eps3", "eps2", 0, "eps3", "eps6", 0],
    "e5": ["e5", "-e4", 0, 0, "e3", "-e2", "eps2", "-eps3", 0, "eps6", "-eps3", 0],
    "eps1": ["eps1", "eps2", 0, 0, "eps3", "eps2", 0, 0, 0, "e2", "e3", 0],
    "eps2": ["eps2", "-eps1", 0, 0, "eps2", "-eps3", 0, 0, 0, "e3", "-e2", 0],
    "eps3": ["eps3", "eps6", 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    "eps4": ["eps4", "eps5", 0, 0, "eps3", "eps6", "-e2", "-e3", 0, 0, 0, 0],
    "eps5": ["eps5", "-eps4", 0, 0, "eps6", "-eps3", "-e3", "e2", 0, 0, 0, 0],
    "eps6": ["eps6", "-eps3", 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
}


def example3_table(exact: bool = True) -> StructureTable:
    """The 6 + 6 dimensional example algebra given by an explicit table.

    The table is taken entry by entry as given; :func:`validate` reports which
    axioms it satisfies.
    """
    g = _blank(12)
    index = {lab: i for i, lab in enumerate(_EX3_LABELS)}
    for row, entries in _EX3_ROWS.items():
        i = index[row]
        for j, entry in enumerate(entries):
            if entry == 0:
                continue
            sign = -1 if entry.startswith("-") else 1
            g[i, j, index[entry.lstrip("-")]] = sign
    return StructureTable(5, 6, g, labels=_EX3_LABELS, exact=exact, name="example3_table")


def _grassmann_sign(s: tuple[int, ...], u: tuple[int, ...]) -> int:
    """Sign of eta_s eta_u = sign * eta_{s union u} for disjoint sorted s, u."""
    inversions = sum(1 for a in s for b in u if a > b)
    return -1 if inversions % 2 else 1


def complex_grassmann(g: int, exact: bool = True) -> StructureTable:
    """Grassmann algebra on ``g`` odd generators over C, viewed as a real CSA.

    Basis: for every subset S of generators, the pair ``eta_S, i*eta_S``.
    Even subsets come first (starting with ``1, i``), then odd subsets; so
    ``p + 1 = q = 2**g`` for ``g >= 1``.
    """
    if g < 0:
        raise ValueError("g must be non-negative")
    subsets = [s for k in range(g + 1) for s in itertools.combinations(range(1, g + 1), k)]
    even = [s for s in subsets if len(s) % 2 == 0]
    odd = [s for s in subsets if len(s) % 2 == 1]
    basis = []  # (subset, has_i)
    for s in even + odd:
        basis.append((s, False))
        basis.append((s, True))
    index = {b: k for k, b in enumerate(basis)}
    dim = len(basis)
    tab = _blank(dim)
    for (s, si), a in index.items():
        for (u, ui), b in index.items():
            if set(s) & set(u):
                continue
            sign = _grassmann_sign(s, u)
            w = tuple(sorted(s + u))
            if si and ui:
                sign, wi = -sign, False
            else:
                wi = si or ui
            tab[a, b, index[(w, wi)]] = sign

    def label(s, si):
        core = "eta" + "".join(str(v) for v in s) if s else "1"
        if si:
            return "i" if not s else "i*" + core
        return core

    labels = [label(s, si) for s, si in basis]
    p = 2 * len(even) - 1
    q = 2 * len(odd)
    return StructureTable(p, q, tab, labels=labels, exact=exact, name=f"complex_grassmann({g})")


def even_subalgebra(t: StructureTable) -> StructureTable:
    """The even part as a CSA with ``q = 0``."""
    d = t.p + 1
    g = t.gamma[:d, :d, :d]
    return StructureTable(t.p, 0, g, labels=t.labels[:d], exact=t.exact, name=f"{t.name or 'table'}[even]")


BUILTINS = {
    "complex": complex,
    "hyperbolic": hyperbolic,
    "example3": example3_table,
}


def builtin(spec: str, exact: bool = True) -> StructureTable:
    """Look up a built-in by name; ``complex_grassmann:<g>`` takes an argument."""
    name, _, arg = spec.partition(":")
    if name == "complex_grassmann":
        return complex_grassmann(int(arg or 1), exact=exact)
    try:
        return BUILTINS[name](exact=exact)
    except KeyError:
        raise KeyError(f"unknown built-in algebra {spec!r}") from None
