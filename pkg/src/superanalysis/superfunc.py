"""Superspace coordinates, Lambda-valued polynomials and the operators d'', d'.

Real coordinates of a point of ``Lambda_0^n x Lambda_1^m`` are ordered

    y_1^0 .. y_1^p, ..., y_n^0 .. y_n^p, theta_1^1 .. theta_1^q, ..., theta_m^1 .. theta_m^q

and every coordinate belongs to exactly one *group*: the block of an even
hypervariable ``y_i`` (lead ``y_i^0``, multipliers ``e_k``) or one slice of
an odd hypervariable ``theta_j`` (lead ``theta_j^{s_k}``, multipliers
``a_l``).  d'' has one component per non-lead coordinate and d' one per
group.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .conditions import SliceSpec
from .csa_core import AlgebraElement, StructureTable

__all__ = [
    "Group",
    "NotQs",
    "QsPoly",
    "RealPoly",
    "SuperPoint",
    "Superspace",
    "d_prime",
    "d_second",
    "eval_qs",
    "fd_d_second",
    "is_qs_differentiable",
    "laplacian",
    "qs_to_real",
    "real_to_qs",
    "slice_variable",
    "taylor_coefficients",
]


class NotQs(ValueError):
    """The polynomial is not annihilated by d''."""


@dataclass(frozen=True)
class Group:
    lead: int
    members: tuple[int, ...]
    kind: str  # "y" or "theta"
    var: int  # 1-based hypervariable index
    slice: int  # 1-based slice index (0 for even blocks)


class Superspace:
    """The real coordinate system of ``Lambda_0^n x Lambda_1^m`` for one algebra and slice spec."""

    def __init__(self, table: StructureTable, n: int, m: int, slices: SliceSpec | None = None):
        if n < 0 or m < 0:
            raise ValueError("n and m must be non-negative")
        if slices is None:
            if table.q and m:
                raise ValueError("odd variables need a slice spec")
            slices = SliceSpec((1, table.q + 1), tuple(table.one() for _ in range(table.q))) if table.q else SliceSpec.trivial(table)
        if slices.q != table.q:
            raise ValueError("slice spec does not match the algebra's odd dimension")
        self.table = table
        self.n = n
        self.m = m
        self.slices = slices
        p1, q = table.p + 1, table.q
        self.N = n * p1 + m * q
        self.r = slices.r if q else 0

        groups = []
        alpha = [None] * self.N
        lead_of = [0] * self.N
        for i in range(n):
            members = tuple(self.y_index(i + 1, k) for k in range(p1))
            groups.append(Group(members[0], members, "y", i + 1, 0))
            for k, c in enumerate(members):
                alpha[c] = table.basis(k)
        if q:
            for k in range(slices.r):
                for j in range(m):
                    members = tuple(self.theta_index(j + 1, l) for l in slices.slice_range(k))
                    groups.append(Group(members[0], members, "theta", j + 1, k + 1))
                    for l, c in zip(slices.slice_range(k), members):
                        alpha[c] = slices.a(l)
        for g in groups:
            for c in g.members:
                lead_of[c] = g.lead
        self.groups = tuple(groups)
        self.alpha = tuple(alpha)
        self.lead_of = tuple(lead_of)
        self.group_of = {c: g for g in groups for c in g.members}
        self.alpha_float = np.array([a.to_numpy() for a in alpha]).reshape(self.N, table.dim)
        # leads in the variable order of QsPoly: y_1..y_n, then slice-major Z_k(theta_j)
        self.leads = tuple(self.y_index(i + 1, 0) for i in range(n)) + tuple(
            self.theta_index(j + 1, slices.lead(k)) for k in range(self.r) for j in range(m)
        )

    # -- coordinates -----------------------------------------------------
    def y_index(self, i: int, k: int) -> int:
        return (i - 1) * (self.table.p + 1) + k

    def theta_index(self, j: int, l: int) -> int:
        return self.n * (self.table.p + 1) + (j - 1) * self.table.q + (l - 1)

    def label(self, c: int) -> str:
        p1 = self.table.p + 1
        if c < self.n * p1:
            return f"y{c // p1 + 1}^{c % p1}"
        c -= self.n * p1
        return f"theta{c // self.table.q + 1}^{c % self.table.q + 1}"

    def is_lead(self, c: int) -> bool:
        return self.lead_of[c] == c

    def d_second_directions(self) -> list[tuple]:
        """Keys of the d'' components, each paired with its coordinate index."""
        out = []
        for g in self.groups:
            for c in g.members[1:]:
                if g.kind == "y":
                    out.append((("y", g.var, c - g.lead), c))
                else:
                    out.append((("theta", g.var, c - self.theta_index(g.var, 1) + 1), c))
        out.sort(key=lambda kc: kc[1])
        return out

    def d_prime_directions(self) -> list[tuple]:
        out = []
        for g in self.groups:
            key = ("y", g.var) if g.kind == "y" else ("Z", g.var, g.slice)
            out.append((key, g.lead))
        return out

    def qs_variable(self, v: int) -> tuple:
        """``("y", i)`` or ``("Z", k, j)`` for QsPoly variable number ``v``."""
        if v < self.n:
            return ("y", v + 1)
        k, j = divmod(v - self.n, self.m)
        return ("Z", k + 1, j + 1)

    @property
    def n_qs_vars(self) -> int:
        return self.n + self.r * self.m

    def zero_point(self) -> tuple:
        return tuple(self.table.coerce(0) for _ in range(self.N))

    def __repr__(self) -> str:
        return f"Superspace({self.table!r}, n={self.n}, m={self.m}, N={self.N})"


@dataclass(frozen=True)
class SuperPoint:
    """A point ``(y, theta)`` with ``y`` even and ``theta`` odd."""

    y: tuple[AlgebraElement, ...]
    theta: tuple[AlgebraElement, ...]

    def __post_init__(self):
        object.__setattr__(self, "y", tuple(self.y))
        object.__setattr__(self, "theta", tuple(self.theta))
        for v in self.y:
            if not v.is_even():
                raise ValueError("y components must be even")
        for v in self.theta:
            if not v.is_odd():
                raise ValueError("theta components must be odd")

    def flatten(self, space: Superspace | None = None) -> tuple:
        out = []
        for v in self.y:
            out.extend(v.coeffs[: v.table.p + 1])
        for v in self.theta:
            out.extend(v.coeffs[v.table.p + 1:])
        return tuple(out)

    @classmethod
    def from_flat(cls, space: Superspace, flat: Sequence) -> "SuperPoint":
        t = space.table
        flat = list(flat)
        if len(flat) != space.N:
            raise ValueError(f"expected {space.N} coordinates, got {len(flat)}")
        p1, q = t.p + 1, t.q
        ys = []
        for i in range(space.n):
            ys.append(t.element(flat[i * p1:(i + 1) * p1] + [0] * q))
        th = []
        base = space.n * p1
        for j in range(space.m):
            th.append(t.element([0] * p1 + flat[base + j * q: base + (j + 1) * q]))
        return cls(tuple(ys), tuple(th))


def _flat(space: Superspace, x) -> tuple:
    if isinstance(x, SuperPoint):
        return x.flatten()
    if x is None:
        return space.zero_point()
    x = tuple(x)
    if len(x) != space.N:
        raise ValueError(f"expected {space.N} coordinates, got {len(x)}")
    return x


# -- real-coordinate polynomials ---------------------------------------------------

Exps = tuple[int, ...]


class RealPoly:
    """Lambda-valued polynomial in ``nvars`` real coordinates.

    ``terms`` maps exponent tuples to coefficients; zero coefficients are
    dropped on construction.
    """

    __slots__ = ("table", "nvars", "terms")

    def __init__(self, table: StructureTable, nvars: int, terms: Mapping[Exps, AlgebraElement] | None = None):
        self.table = table
        self.nvars = nvars
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(v) for v in e)
            if len(e) != nvars:
                raise ValueError(f"exponent {e} does not have {nvars} entries")
            if not isinstance(c, AlgebraElement):
                c = table.element(c)
            if not c.is_zero():
                clean[e] = c
        self.terms = clean

    # constructors
    @classmethod
    def constant(cls, table, nvars, value) -> "RealPoly":
        if not isinstance(value, AlgebraElement):
            value = table.scalar(value)
        return cls(table, nvars, {(0,) * nvars: value})

    @classmethod
    def coordinate(cls, table, nvars, c, coeff: AlgebraElement | None = None) -> "RealPoly":
        e = [0] * nvars
        e[c] = 1
        return cls(table, nvars, {tuple(e): table.one() if coeff is None else coeff})

    def _new(self, terms) -> "RealPoly":
        return RealPoly(self.table, self.nvars, terms)

    # structure
    def is_zero(self, tol: float = 0.0) -> bool:
        return all(c.is_zero(tol) for c in self.terms.values())

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def __eq__(self, other):
        if not isinstance(other, RealPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def allclose(self, other: "RealPoly", tol: float = 1e-9) -> bool:
        return (self - other).is_zero(tol)

    def __repr__(self) -> str:
        return f"RealPoly(nvars={self.nvars}, terms={len(self.terms)}, degree={self.degree})"

    # arithmetic
    def __add__(self, other):
        if isinstance(other, RealPoly):
            out = dict(self.terms)
            for e, c in other.terms.items():
                out[e] = out[e] + c if e in out else c
            return self._new(out)
        if isinstance(other, AlgebraElement):
            return self + RealPoly.constant(self.table, self.nvars, other)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self._new({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, RealPoly):
            out: dict = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    prod = c1 * c2
                    out[e] = out[e] + prod if e in out else prod
            return self._new(out)
        if isinstance(other, AlgebraElement):
            return self._new({e: c * other for e, c in self.terms.items()})
        if isinstance(other, (int, float, Fraction)):
            return self._new({e: c * other for e, c in self.terms.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, AlgebraElement):
            return self._new({e: other * c for e, c in self.terms.items()})
        if isinstance(other, (int, float, Fraction)):
            return self * other
        return NotImplemented

    def __pow__(self, k: int) -> "RealPoly":
        out = RealPoly.constant(self.table, self.nvars, self.table.one())
        for _ in range(k):
            out = out * self
        return out

    # calculus
    def derivative(self, c: int, order: int = 1) -> "RealPoly":
        out = {}
        for e, coeff in self.terms.items():
            if e[c] < order:
                continue
            factor = math.perm(e[c], order)
            ne = list(e)
            ne[c] -= order
            out[tuple(ne)] = coeff * factor
        return self._new(out)

    def evaluate(self, x: Sequence) -> AlgebraElement:
        total = self.table.zero()
        for e, c in self.terms.items():
            mono = 1
            for xv, k in zip(x, e):
                if k:
                    mono = mono * xv**k
            total = total + c * mono
        return total

    def _arrays(self):
        if not self.terms:
            return np.zeros((0, self.nvars), dtype=np.int64), np.zeros((0, self.table.dim))
        exps = np.array(list(self.terms.keys()), dtype=np.int64).reshape(len(self.terms), self.nvars)
        coeffs = np.array([c.to_numpy() for c in self.terms.values()])
        return exps, coeffs

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        """Float evaluation at the rows of ``X``; returns shape ``(M, dim)``."""
        X = np.asarray(X, dtype=float)
        exps, coeffs = self._arrays()
        if len(exps) == 0:
            return np.zeros((X.shape[0], self.table.dim))
        mono = np.ones((X.shape[0], len(exps)))
        for c in range(self.nvars):
            col = exps[:, c]
            if col.any():
                mono *= X[:, c:c + 1] ** col[None, :]
        return mono @ coeffs

    def shift(self, b: Sequence) -> "RealPoly":
        """The polynomial ``x -> P(x + b)``."""
        out: dict = {}
        for e, coeff in self.terms.items():
            # expand prod_c (x_c + b_c)^{e_c}
            factors = []
            for c, k in enumerate(e):
                factors.append([(j, math.comb(k, j) * b[c] ** (k - j)) for j in range(k + 1)])
            for combo in itertools.product(*factors):
                w = 1
                for _, v in combo:
                    w = w * v
                if w == 0:
                    continue
                ne = tuple(j for j, _ in combo)
                term = coeff * w
                out[ne] = out[ne] + term if ne in out else term
        return self._new(out)

    def to_float(self) -> "RealPoly":
        ft = self.table.to_float()
        return RealPoly(ft, self.nvars, {e: AlgebraElement(ft, c.coeffs) for e, c in self.terms.items()})


# -- hypervariable polynomials ----------------------------------------------------------

class QsPoly:
    """Polynomial in the hypervariables ``y_i`` and slice variables ``Z_k(theta_j)``.

    Keys are flat exponent tuples in the variable order
    ``(y_1..y_n, Z_1(theta_1)..Z_1(theta_m), ..., Z_r(theta_1)..Z_r(theta_m))``,
    i.e. ``I`` followed by ``J_1, ..., J_r``.  Each monomial is multiplied with
    its coefficient on the left.
    """

    __slots__ = ("space", "terms", "center")

    def __init__(self, space: Superspace, terms: Mapping[Exps, AlgebraElement] | None = None, center=None):
        self.space = space
        nv = space.n_qs_vars
        clean = {}
        for e, c in (terms or {}).items():
            e = self.flatten_key(e) if e and isinstance(e[0], tuple) else tuple(int(v) for v in e)
            if len(e) != nv:
                raise ValueError(f"multi-index {e} does not have {nv} entries")
            if not isinstance(c, AlgebraElement):
                c = space.table.element(c)
            if not c.is_zero():
                clean[e] = c
        self.terms = clean
        self.center = _flat(space, center)

    def flatten_key(self, key) -> Exps:
        """``(I, J_1, ..., J_r)`` (tuples) to the flat key."""
        return tuple(v for part in key for v in part)

    def split_key(self, key: Exps) -> tuple:
        n, m = self.space.n, self.space.m
        return (key[:n],) + tuple(key[n + k * m: n + (k + 1) * m] for k in range(self.space.r))

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def __eq__(self, other):
        if not isinstance(other, QsPoly):
            return NotImplemented
        return self.terms == other.terms and self.center == other.center

    def allclose(self, other: "QsPoly", tol: float = 1e-9) -> bool:
        keys = set(self.terms) | set(other.terms)
        z = self.space.table.zero()
        return all((self.terms.get(k, z) - other.terms.get(k, z)).is_zero(tol) for k in keys)

    def __add__(self, other: "QsPoly") -> "QsPoly":
        if self.center != other.center:
            raise ValueError("QsPoly sum needs a common center")
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return QsPoly(self.space, out, self.center)

    def __mul__(self, other):
        if isinstance(other, QsPoly):
            if self.center != other.center:
                raise ValueError("QsPoly product needs a common center")
            out: dict = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    prod = c1 * c2
                    out[e] = out[e] + prod if e in out else prod
            return QsPoly(self.space, out, self.center)
        if isinstance(other, AlgebraElement):
            return QsPoly(self.space, {e: c * other for e, c in self.terms.items()}, self.center)
        return NotImplemented

    def __repr__(self) -> str:
        return f"QsPoly({self.space!r}, terms={len(self.terms)}, degree={self.degree})"

    @classmethod
    def constant(cls, space: Superspace, value: AlgebraElement, center=None) -> "QsPoly":
        return cls(space, {(0,) * space.n_qs_vars: value}, center)

    @classmethod
    def variable(cls, space: Superspace, v: int, center=None) -> "QsPoly":
        e = [0] * space.n_qs_vars
        e[v] = 1
        return cls(space, {tuple(e): space.table.one()}, center)

    @classmethod
    def random(cls, space: Superspace, degree: int, rng: np.random.Generator, nterms: int = 4, center=None, coeff_range: int = 3) -> "QsPoly":
        """Random polynomial with small integer coefficients (exact tables stay exact)."""
        nv = space.n_qs_vars
        keys = [e for e in itertools.product(range(degree + 1), repeat=nv) if sum(e) <= degree]
        picks = rng.choice(len(keys), size=min(nterms, len(keys)), replace=False)
        terms = {}
        for k in sorted(int(i) for i in picks):
            coeffs = rng.integers(-coeff_range, coeff_range + 1, size=space.table.dim)
            terms[keys[k]] = space.table.element([int(c) for c in coeffs])
        return cls(space, terms, center)


def slice_variable(theta: AlgebraElement, k: int, s: SliceSpec) -> AlgebraElement:
    """``Z_k(theta) = sum_{l in slice k} theta^l a_l`` for 1-based slice ``k``."""
    t = theta.table
    out = t.zero()
    for l in s.slice_range(k - 1):
        c = theta.coeffs[t.p + l]
        if c != 0:
            out = out + s.a(l) * c
    return out


def _variable_values(space: Superspace, x: Sequence, center: Sequence) -> list[AlgebraElement]:
    t = space.table
    p1 = t.p + 1
    diff = [a - b for a, b in zip(x, center)]
    vals = []
    for i in range(1, space.n + 1):
        base = space.y_index(i, 0)
        vals.append(t.element(list(diff[base:base + p1]) + [0] * t.q))
    for k in range(1, space.r + 1):
        for j in range(1, space.m + 1):
            out = t.zero()
            for l in space.slices.slice_range(k - 1):
                c = diff[space.theta_index(j, l)]
                if c != 0:
                    out = out + space.slices.a(l) * c
            vals.append(out)
    return vals


def eval_qs(P: QsPoly, x, center=None) -> AlgebraElement:
    """Evaluate ``sum A_{I,J} (y-b)^I prod_k Z_k(theta-beta)^{J_k}``."""
    space = P.space
    center = P.center if center is None else _flat(space, center)
    vals = _variable_values(space, _flat(space, x), center)
    powers = [[space.table.one()] for _ in vals]
    total = space.table.zero()
    for e, coeff in P.terms.items():
        mono = space.table.one()
        for v, k in enumerate(e):
            if k:
                pw = powers[v]
                while len(pw) <= k:
                    pw.append(pw[-1] * vals[v])
                mono = mono * pw[k]
        total = total + coeff * mono
    return total


def _variable_polys(space: Superspace, center: Sequence) -> list[RealPoly]:
    t, N = space.table, space.N
    polys = []
    for i in range(1, space.n + 1):
        poly = RealPoly(t, N)
        for k in range(t.p + 1):
            c = space.y_index(i, k)
            poly = poly + RealPoly.coordinate(t, N, c, t.basis(k)) - RealPoly.constant(t, N, t.basis(k) * center[c])
        polys.append(poly)
    for k in range(1, space.r + 1):
        for j in range(1, space.m + 1):
            poly = RealPoly(t, N)
            for l in space.slices.slice_range(k - 1):
                c = space.theta_index(j, l)
                a = space.slices.a(l)
                poly = poly + RealPoly.coordinate(t, N, c, a) - RealPoly.constant(t, N, a * center[c])
            polys.append(poly)
    return polys


def qs_to_real(P: QsPoly, center=None) -> RealPoly:
    """Expand into the ``N`` real coordinates."""
    space = P.space
    center = P.center if center is None else _flat(space, center)
    var = _variable_polys(space, center)
    powers = [[RealPoly.constant(space.table, space.N, space.table.one())] for _ in var]
    out = RealPoly(space.table, space.N)
    for e, coeff in P.terms.items():
        mono = RealPoly.constant(space.table, space.N, coeff)
        for v, k in enumerate(e):
            if k:
                pw = powers[v]
                while len(pw) <= k:
                    pw.append(pw[-1] * var[v])
                mono = mono * pw[k]
        out = out + mono
    return out


# -- d'' and d' -----------------------------------------------------------------------

def d_second(P: RealPoly, space: Superspace) -> dict:
    """Components of d''P keyed by direction.

    Even direction ``("y", i, j)``: ``dP/dy_i^j - e_j * dP/dy_i^0`` (left).
    Odd direction ``("theta", l, t)``: ``dP/dtheta_l^t - (dP/dtheta_l^{s_k}) * a_t`` (right).
    """
    if P.nvars != space.N:
        raise ValueError("polynomial and superspace dimensions differ")
    lead_cache: dict[int, RealPoly] = {}
    out = {}
    for key, c in space.d_second_directions():
        lead = space.lead_of[c]
        if lead not in lead_cache:
            lead_cache[lead] = P.derivative(lead)
        alpha = space.alpha[c]
        if key[0] == "y":
            out[key] = P.derivative(c) - alpha * lead_cache[lead]
        else:
            out[key] = P.derivative(c) - lead_cache[lead] * alpha
    return out


def d_prime(P: RealPoly, space: Superspace) -> dict:
    """Coefficients of ``dY_i`` and ``dZ_k(theta_i)``: derivatives in the lead coordinates."""
    return {key: P.derivative(lead) for key, lead in space.d_prime_directions()}


def is_qs_differentiable(P: RealPoly, space: Superspace) -> bool:
    return all(comp.is_zero() for comp in d_second(P, space).values())


def laplacian(P: RealPoly) -> RealPoly:
    out = RealPoly(P.table, P.nvars)
    for c in range(P.nvars):
        out = out + P.derivative(c, 2)
    return out


def real_to_qs(P: RealPoly, space: Superspace, center=None) -> QsPoly:
    """Recover the hypervariable form of a qS polynomial.

    The Taylor coefficient of a lead-only monomial at ``center`` is the
    coefficient ``A_{I,J}``; the expansion is then checked to reproduce ``P``.
    """
    if not is_qs_differentiable(P, space):
        raise NotQs("d''P does not vanish")
    center = _flat(space, center)
    shifted = P.shift(center)
    leads = space.leads
    lead_set = set(leads)
    terms = {}
    for e, coeff in shifted.terms.items():
        if any(k and c not in lead_set for c, k in enumerate(e)):
            continue
        terms[tuple(e[c] for c in leads)] = coeff
    Q = QsPoly(space, terms, center)
    back = qs_to_real(Q)
    ok = back == P if space.table.exact else back.allclose(P)
    if not ok:
        raise NotQs("P is not a polynomial in the hypervariables")
    return Q


def taylor_coefficients(P: RealPoly, space: Superspace, center=None, max_degree: int | None = None) -> QsPoly:
    """``A_{I,J} = d^{I,J} P(center) / (I! J!)`` with derivatives along the lead coordinates."""
    if not is_qs_differentiable(P, space):
        raise NotQs("d''P does not vanish")
    center = _flat(space, center)
    max_degree = P.degree if max_degree is None else max_degree
    leads = space.leads
    nv = len(leads)
    cache: dict[Exps, RealPoly] = {(0,) * nv: P}
    terms = {}
    for total in range(max(max_degree, 0) + 1):
        for e in _compositions(total, nv):
            if e not in cache:
                v = max(i for i, k in enumerate(e) if k)
                parent = list(e)
                parent[v] -= 1
                cache[e] = cache[tuple(parent)].derivative(leads[v])
            deriv = cache[e]
            if deriv.is_zero():
                continue
            fact = math.prod(math.factorial(k) for k in e)
            value = deriv.evaluate(center)
            terms[e] = value / fact if fact != 1 else value
    return QsPoly(space, terms, center)


def _compositions(total: int, parts: int) -> Iterable[Exps]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def recenter(P: QsPoly, center) -> QsPoly:
    """Re-expand a QsPoly about a new center."""
    return taylor_coefficients(qs_to_real(P), P.space, center, max(P.degree, 0))


# -- finite differences ------------------------------------------------------------------

def fd_d_second(f: Callable[[np.ndarray], np.ndarray], space: Superspace, x, h: float = 1e-4) -> dict:
    """Central-difference d'' components of a black-box ``f``.

    ``f`` maps a flat float vector to a coefficient vector (or AlgebraElement).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.array([float(v) for v in _flat(space, x)])
    gamma = space.table.gamma_float

    def call(v):
        out = f(v)
        return out.to_numpy() if isinstance(out, AlgebraElement) else np.asarray(out, dtype=float)

    def partial(c):
        e = np.zeros_like(x)
        e[c] = h
        return (call(x + e) - call(x - e)) / (2 * h)

    cache: dict[int, np.ndarray] = {}
    out = {}
    ft = space.table.to_float()
    for key, c in space.d_second_directions():
        lead = space.lead_of[c]
        if lead not in cache:
            cache[lead] = partial(lead)
        a = space.alpha_float[c]
        dl = cache[lead]
        prod = np.einsum("i,j,ijk->k", a, dl, gamma) if key[0] == "y" else np.einsum("i,j,ijk->k", dl, a, gamma)
        out[key] = AlgebraElement(ft, partial(c) - prod)
    return out
