"""Hyperforms and the fundamental solutions of d''.

An (N-1)-form is stored as ``omega = sum_a c_a * hat_a`` where ``hat_a`` is
``dx^0 ^ ... ^ dx^{N-1}`` with ``dx^a`` left out.  No ``(-1)^a`` is folded
into the coefficients; signs come from :func:`wedge_one_into_hat` and from
the boundary pairing.

Every kernel here has the same shape.  For each coordinate group with lead
``L`` and multipliers ``alpha`` (``alpha_L = e_0``) let
``dW = sum_l alpha_l dx^l``.  Then

    A = sum_groups sum_{J != L} (-1)^{J-L} (x^J e_0 + x^L alpha_J) dW ^ hat_{L,J}

and ``Omega = KERNEL_SIGN * A / (N Vol(B_N) |x|^N)``.  Indices are global,
so the sign factor is relative to the lead of each group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .conditions import SliceSpec
from .csa_core import AlgebraElement, StructureTable
from .superfunc import RealPoly, Superspace, _flat

__all__ = [
    "KERNEL_SIGN",
    "HyperForm",
    "PolyForm",
    "SingularPoint",
    "Zero",
    "d_prime_of_field",
    "d_second_of_field",
    "kernel_K",
    "kernel_batch",
    "numerator_form",
    "omega0_eval",
    "omega1_eval",
    "omega_full_eval",
    "unit_ball_volume",
    "wedge_one_into_hat",
]

# Global orientation of the kernels.  +1 reproduces constants with the
# outward-normal boundary pairing used in ``quadrature``.
KERNEL_SIGN = 1


class SingularPoint(ValueError):
    pass


class _ZeroType:
    def __repr__(self):
        return "Zero"

    def __bool__(self):
        return False


Zero = _ZeroType()


def unit_ball_volume(d: int) -> float:
    if d < 1:
        raise ValueError("dimension must be at least 1")
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def wedge_one_into_hat(l: int, omitted: tuple[int, int]):
    """``dx^l ^ hat_{a,b}`` as ``(sign, remaining omitted index)`` or :data:`Zero`."""
    a, b = omitted
    if a == b:
        raise ValueError("omitted pair must be distinct")
    if l not in (a, b):
        return Zero
    other = b if l == a else a
    # dx^l moves past every retained coordinate below it
    below = l - (1 if other < l else 0)
    return (-1 if below % 2 else 1, other)


@dataclass(frozen=True)
class HyperForm:
    """(N-1)-form with one Lambda-valued coefficient per omitted coordinate."""

    table: StructureTable
    array: np.ndarray  # shape (N, dim), float

    @property
    def dim(self) -> int:
        return self.array.shape[0]

    def coeff(self, a: int) -> AlgebraElement:
        return AlgebraElement(self.table, self.array[a])

    @property
    def coeffs(self) -> dict[int, AlgebraElement]:
        return {a: self.coeff(a) for a in range(self.dim) if np.any(self.array[a] != 0)}

    def is_even(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.array[:, self.table.p + 1:]) <= tol))

    def __add__(self, other: "HyperForm") -> "HyperForm":
        return HyperForm(self.table, self.array + other.array)

    def __mul__(self, s: float) -> "HyperForm":
        return HyperForm(self.table, self.array * s)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {str(a): [float(v) for v in self.array[a]] for a in range(self.dim)}


# -- batch kernel assembly -------------------------------------------------------

def _prod(a: np.ndarray, b: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Row-wise algebra product of ``(M, dim)`` arrays."""
    return np.einsum("mi,mj,ijk->mk", a, b, gamma, optimize=True)


def _groups_local(space: Superspace):
    return [(g.lead, g.members) for g in space.groups]


def _numerator_batch(X: np.ndarray, groups, alpha: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Coefficient array ``(M, N, dim)`` of the un-normalised numerator A."""
    M, N = X.shape
    dim = gamma.shape[0]
    out = np.zeros((M, N, dim))
    e0 = np.zeros(dim)
    e0[0] = 1.0
    for lead, members in groups:
        aL = alpha[lead]
        for J in members:
            if J == lead:
                continue
            aJ = alpha[J]
            gam = X[:, J:J + 1] * e0[None, :] + X[:, lead:lead + 1] * aJ[None, :]
            base = -1.0 if (J - lead) % 2 else 1.0
            for l, a_l in ((lead, aL), (J, aJ)):
                w = wedge_one_into_hat(l, (lead, J))
                sign, rest = w
                term = _prod(gam, np.broadcast_to(a_l, gam.shape), gamma)
                out[:, rest, :] += base * sign * term
    return out


def _normalise(X: np.ndarray, A: np.ndarray) -> np.ndarray:
    N = X.shape[1]
    r = np.linalg.norm(X, axis=1)
    if np.any(r == 0):
        raise SingularPoint("kernel evaluated at its singularity")
    scale = KERNEL_SIGN / (N * unit_ball_volume(N) * r**N)
    return A * scale[:, None, None]


def kernel_batch(space: Superspace, X: np.ndarray) -> np.ndarray:
    """Full kernel at the rows of ``X`` (already ``x - x'``); shape ``(M, N, dim)``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    A = _numerator_batch(X, _groups_local(space), space.alpha_float, space.table.gamma_float)
    return _normalise(X, A)


def _block_space(t: StructureTable, which: str, s: SliceSpec | None) -> Superspace:
    if which == "even":
        return Superspace(t, 1, 0, s if t.q else None)
    return Superspace(t, 0, 1, s)


def omega0_eval(y: AlgebraElement, t: StructureTable) -> HyperForm:
    """Fundamental solution on ``Lambda_0`` at the even element ``y``."""
    if not y.is_even():
        raise ValueError("omega0 takes an even argument")
    space = _block_space(t, "even", None)
    X = y.to_numpy()[None, : t.p + 1]
    return HyperForm(t.to_float(), kernel_batch(space, X)[0])


def omega1_eval(theta: AlgebraElement, t: StructureTable, s: SliceSpec) -> HyperForm:
    """Fundamental solution on ``Lambda_1`` at the odd element ``theta``."""
    if not theta.is_odd():
        raise ValueError("omega1 takes an odd argument")
    space = _block_space(t, "odd", s)
    X = theta.to_numpy()[None, t.p + 1:]
    return HyperForm(t.to_float(), kernel_batch(space, X)[0])


def omega_full_eval(space: Superspace, x) -> HyperForm:
    X = np.array([float(v) for v in _flat(space, x)])[None, :]
    return HyperForm(space.table.to_float(), kernel_batch(space, X)[0])


def kernel_K(space: Superspace, x, x_prime) -> HyperForm:
    """Degree-0 part of the reproducing kernel: the full kernel at ``x - x'``."""
    a = np.array([float(v) for v in _flat(space, x)])
    b = np.array([float(v) for v in _flat(space, x_prime)])
    return HyperForm(space.table.to_float(), kernel_batch(space, (a - b)[None, :])[0])


# -- exterior derivatives of form fields -------------------------------------------

def d_second_of_field(space: Superspace, coeff_fn, x, h: float = 1e-4) -> np.ndarray:
    """Central-difference ``d''`` of an (N-1)-form field, as its top-degree coefficient.

    ``coeff_fn`` maps a batch ``(M, N)`` of points to ``(M, N, dim)``
    coefficient arrays.  The result is
    ``sum_{h non-lead} (-1)^h (d_h c_h - d_L c_h alpha_h)``.
    """
    x = np.asarray(x, dtype=float)
    N = space.N
    gamma = space.table.gamma_float
    shifts = np.concatenate([x + h * np.eye(N), x - h * np.eye(N)])
    vals = coeff_fn(shifts)
    grad = (vals[:N] - vals[N:]) / (2 * h)  # grad[c, a, :] = d_c coefficient a
    out = np.zeros(space.table.dim)
    for c in range(N):
        lead = space.lead_of[c]
        if lead == c:
            continue
        sign = -1.0 if c % 2 else 1.0
        term = grad[c, c] - np.einsum("i,j,ijk->k", grad[lead, c], space.alpha_float[c], gamma)
        out += sign * term
    return out


def d_prime_of_field(space: Superspace, coeff_fn, x, h: float = 1e-4) -> np.ndarray:
    """Central-difference ``d'`` of an (N-1)-form field: ``sum_G sum_l (-1)^l alpha_l d_L c_l``."""
    x = np.asarray(x, dtype=float)
    N = space.N
    gamma = space.table.gamma_float
    leads = sorted({g.lead for g in space.groups})
    shifts = np.concatenate([x + h * np.eye(N)[leads], x - h * np.eye(N)[leads]])
    vals = coeff_fn(shifts)
    k = len(leads)
    grad = {L: (vals[i] - vals[k + i]) / (2 * h) for i, L in enumerate(leads)}
    out = np.zeros(space.table.dim)
    for g in space.groups:
        for l in g.members:
            sign = -1.0 if l % 2 else 1.0
            out += sign * np.einsum("i,j,ijk->k", space.alpha_float[l], grad[g.lead][l], gamma)
    return out


# -- exact forms with polynomial coefficients --------------------------------------------

class PolyForm:
    """Differential form with RealPoly coefficients on sorted index tuples."""

    def __init__(self, space: Superspace, terms: dict[tuple[int, ...], RealPoly] | None = None):
        self.space = space
        self.terms = {k: v for k, v in (terms or {}).items() if not v.is_zero()}

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "PolyForm") -> "PolyForm":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return PolyForm(self.space, out)

    @staticmethod
    def _wedge_index(l: int, idx: tuple[int, ...]):
        if l in idx:
            return None
        pos = sum(1 for v in idx if v < l)
        return (-1 if pos % 2 else 1), tuple(sorted(idx + (l,)))

    def _apply(self, pieces) -> "PolyForm":
        out: dict = {}
        for idx, poly in self.terms.items():
            for l, op in pieces:
                w = self._wedge_index(l, idx)
                if w is None:
                    continue
                sign, nidx = w
                val = op(poly)
                if val.is_zero():
                    continue
                val = val * sign
                out[nidx] = out[nidx] + val if nidx in out else val
        return PolyForm(self.space, out)

    def d_second(self) -> "PolyForm":
        sp = self.space
        pieces = []
        for c in range(sp.N):
            lead = sp.lead_of[c]
            if lead == c:
                continue
            a = sp.alpha[c]
            pieces.append((c, lambda P, c=c, lead=lead, a=a: P.derivative(c) - a * P.derivative(lead)))
        return self._apply(pieces)

    def d_prime(self) -> "PolyForm":
        sp = self.space
        pieces = []
        for c in range(sp.N):
            lead = sp.lead_of[c]
            a = sp.alpha[c]
            pieces.append((c, lambda P, lead=lead, a=a: a * P.derivative(lead)))
        return self._apply(pieces)

    def d(self) -> "PolyForm":
        sp = self.space
        return self._apply([(c, lambda P, c=c: P.derivative(c)) for c in range(sp.N)])


def numerator_form(space: Superspace) -> list[RealPoly]:
    """Exact numerator ``A`` of the kernel: one RealPoly per omitted coordinate."""
    t, N = space.table, space.N
    out = [RealPoly(t, N) for _ in range(N)]
    for g in space.groups:
        for J in g.members:
            if J == g.lead:
                continue
            gam = RealPoly.coordinate(t, N, J) + RealPoly.coordinate(t, N, g.lead, space.alpha[J])
            base = -1 if (J - g.lead) % 2 else 1
            for l in (g.lead, J):
                sign, rest = wedge_one_into_hat(l, (g.lead, J))
                out[rest] = out[rest] + gam * space.alpha[l] * (base * sign)
    return out


def hyperform_top_coefficient(space: Superspace, coeffs: Sequence[RealPoly], op: str = "d_second") -> RealPoly:
    """Exact ``d''`` (or ``d'``) of ``sum_a c_a hat_a`` as a top-degree coefficient."""
    t, N = space.table, space.N
    out = RealPoly(t, N)
    for c in range(N):
        lead = space.lead_of[c]
        sign = -1 if c % 2 else 1
        if op == "d_second":
            if lead == c:
                continue
            out = out + (coeffs[c].derivative(c) - space.alpha[c] * coeffs[c].derivative(lead)) * sign
        else:
            out = out + (space.alpha[c] * coeffs[c].derivative(lead)) * sign
    return out
