"""Boundary and volume integration of hyperforms, and the integral formulas built on them.

Monte Carlo runs are split into fixed chunks of ``CHUNK`` samples.  Chunk
``c`` draws from ``numpy.random.default_rng([seed, c])`` and per-chunk sums
are combined in chunk order, so results do not depend on how many worker
threads evaluate the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .csa_core import AlgebraElement, StructureTable
from .kernels import HyperForm, kernel_batch, unit_ball_volume
from .superfunc import (
    NotQs,
    QsPoly,
    RealPoly,
    Superspace,
    _flat,
    d_second,
    is_qs_differentiable,
    qs_to_real,
    taylor_coefficients,
)

__all__ = [
    "BallDomain",
    "DimensionTooSmall",
    "IntegralResult",
    "PointOutsideDomain",
    "PolydiskDomain",
    "QuadratureSpec",
    "boundary_contract",
    "boundary_integral",
    "cauchy_bounds_check",
    "hartogs_extend",
    "polydisk_reproduce",
    "represent_with_volume",
    "reproduce",
    "unit_ball_volume",
    "volume_integral",
]

CHUNK = 1 << 16


class PointOutsideDomain(ValueError):
    pass


class DimensionTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    method: str = "monte_carlo"  # or "circle_trapezoid"
    samples: int = 100_000
    seed: int = 12345
    workers: int = 1

    def __post_init__(self):
        if self.method not in ("monte_carlo", "circle_trapezoid"):
            raise ValueError(f"unknown quadrature method {self.method!r}")
        if self.samples <= 0:
            raise ValueError("samples must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class BallDomain:
    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))

    @property
    def N(self) -> int:
        return len(self.center)

    def contains(self, x, strict: bool = True) -> bool:
        d = np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(self.center))
        return d < self.radius if strict else d <= self.radius


@dataclass(frozen=True)
class PolydiskDomain:
    """Product of balls, one per hypervariable: even blocks first, then odd ones."""

    space: Superspace
    centers: tuple  # flat point of the superspace
    radii: tuple[float, ...]  # n + m radii

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(float(v) for v in _flat(self.space, self.centers)))
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if len(self.radii) != self.space.n + self.space.m:
            raise ValueError("one radius per hypervariable is required")
        if any(r <= 0 for r in self.radii):
            raise ValueError("radii must be positive")

    def blocks(self) -> list[tuple[int, ...]]:
        """Coordinate indices of each factor ball."""
        sp = self.space
        out = [tuple(sp.y_index(i, k) for k in range(sp.table.p + 1)) for i in range(1, sp.n + 1)]
        out += [tuple(sp.theta_index(j, l) for l in range(1, sp.table.q + 1)) for j in range(1, sp.m + 1)]
        return out

    def contains(self, x) -> bool:
        x = np.asarray([float(v) for v in x])
        c = np.asarray(self.centers)
        return all(np.linalg.norm(x[list(b)] - c[list(b)]) < r for b, r in zip(self.blocks(), self.radii))


@dataclass(frozen=True)
class IntegralResult:
    value: AlgebraElement
    stderr: float
    samples: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"value": [float(v) for v in self.value.coeffs], "stderr": self.stderr, "samples": self.samples}


# -- pairing ---------------------------------------------------------------------------

def boundary_contract(w: HyperForm, nu: Sequence[float]) -> AlgebraElement:
    """``sum_a (-1)^a c_a nu_a``: the flux density of ``w`` through a surface with unit normal ``nu``."""
    nu = np.asarray(nu, dtype=float)
    signs = np.where(np.arange(w.dim) % 2, -1.0, 1.0)
    return AlgebraElement(w.table, (signs * nu) @ w.array)


def _contract_batch(forms: np.ndarray, nu: np.ndarray) -> np.ndarray:
    signs = np.where(np.arange(forms.shape[1]) % 2, -1.0, 1.0)
    return np.einsum("mad,ma->md", forms, nu * signs[None, :])


def _prod(a: np.ndarray, b: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    return np.einsum("mi,mj,ijk->mk", a, b, gamma, optimize=True)


# -- chunked Monte Carlo driver ---------------------------------------------------------------

def _chunk_sizes(total: int) -> list[int]:
    full, rest = divmod(total, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def _mc(sample_fn: Callable[[np.random.Generator, int], np.ndarray], spec: QuadratureSpec, dim: int, scale: float, key: tuple = ()):
    """Mean of ``sample_fn`` values times ``scale``, with the max per-coefficient stderr."""
    sizes = _chunk_sizes(spec.samples)

    def run(c):
        rng = np.random.default_rng([spec.seed, *key, c])
        vals = sample_fn(rng, sizes[c])
        return vals.sum(axis=0), (vals * vals).sum(axis=0)

    if spec.workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(spec.workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(c) for c in range(len(sizes))]
    s1 = np.zeros(dim)
    s2 = np.zeros(dim)
    for a, b in parts:  # fixed summation order
        s1 += a
        s2 += b
    M = spec.samples
    mean = s1 / M
    var = np.maximum(s2 / M - mean * mean, 0.0) * (M / (M - 1) if M > 1 else 0.0)
    stderr = float(np.max(np.sqrt(var / M))) * abs(scale)
    return mean * scale, stderr


def _sphere_dirs(rng: np.random.Generator, M: int, N: int) -> np.ndarray:
    g = rng.standard_normal((M, N))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _circle_nodes(M: int) -> np.ndarray:
    ang = 2 * np.pi * np.arange(M) / M
    return np.stack([np.cos(ang), np.sin(ang)], axis=1)


FormFn = Callable[[np.ndarray], np.ndarray]  # (M, N) points -> (M, N, dim) coefficients
ValueFn = Callable[[np.ndarray], np.ndarray]  # (M, N) points -> (M, dim)


def boundary_integral(
    f: ValueFn,
    kform: FormFn,
    D: BallDomain,
    q: QuadratureSpec,
    table: StructureTable,
) -> IntegralResult:
    """``int_{dD} f * kform`` with ``f`` on the left, by sphere sampling or circle trapezoid."""
    N, R = D.N, D.radius
    gamma = table.gamma_float
    center = np.asarray(D.center)
    area = N * unit_ball_volume(N) * R ** (N - 1)

    def integrand(nu):
        x = center + R * nu
        return _prod(np.asarray(f(x)), _contract_batch(kform(x), nu), gamma)

    ft = table.to_float()
    if q.method == "circle_trapezoid":
        if N != 2:
            raise ValueError("circle_trapezoid needs a 1-sphere (N = 2)")
        vals = integrand(_circle_nodes(q.samples))
        return IntegralResult(AlgebraElement(ft, vals.mean(axis=0) * area), 0.0, q.samples)
    mean, err = _mc(lambda rng, M: integrand(_sphere_dirs(rng, M, N)), q, table.dim, area)
    return IntegralResult(AlgebraElement(ft, mean), err, q.samples)


def volume_integral(g: ValueFn, D: BallDomain, q: QuadratureSpec, table: StructureTable, pole=None, key: tuple = (1,)) -> IntegralResult:
    """``int_D g`` over a ball.

    With ``pole`` set, samples are drawn in polar coordinates about that
    point with antithetic direction pairs ``(u, -u)``; the Jacobian
    ``r^{N-1}`` cancels an integrable ``|x - pole|^{1-N}`` singularity.
    Without it, points are uniform in the ball (Gaussian direction,
    radius ``R U^{1/N}``).
    """
    N, R = D.N, D.radius
    center = np.asarray(D.center)
    ft = table.to_float()
    if pole is None:
        vol = unit_ball_volume(N) * R**N

        def sample(rng, M):
            u = _sphere_dirs(rng, M, N)
            rad = R * rng.random(M) ** (1.0 / N)
            return np.asarray(g(center + rad[:, None] * u))

        mean, err = _mc(sample, q, table.dim, vol, key)
        return IntegralResult(AlgebraElement(ft, mean), err, q.samples)

    pole = np.asarray(pole, dtype=float)
    off = pole - center
    if np.linalg.norm(off) >= R:
        raise PointOutsideDomain("pole must lie inside the ball")
    area = N * unit_ball_volume(N)
    c0 = off @ off - R * R

    def one_side(u, U):
        b = u @ off
        rho = -b + np.sqrt(b * b - c0)
        r = rho * U
        vals = np.asarray(g(pole + r[:, None] * u))
        return vals * (rho * r ** (N - 1))[:, None]

    def sample(rng, M):
        u = _sphere_dirs(rng, M, N)
        U = rng.random(M)
        return 0.5 * (one_side(u, U) + one_side(-u, U))

    mean, err = _mc(sample, q, table.dim, area, key)
    return IntegralResult(AlgebraElement(ft, mean), err, q.samples)


# -- representation formulas -----------------------------------------------------------------

def _inside(D: BallDomain, x_prime):
    if not D.contains(x_prime):
        raise PointOutsideDomain(f"point is not strictly inside the ball of radius {D.radius}")


def _kernel_at(space: Superspace, x_prime: np.ndarray) -> FormFn:
    return lambda X: kernel_batch(space, X - x_prime[None, :])


def reproduce(f: QsPoly, x_prime, D: BallDomain, q: QuadratureSpec) -> IntegralResult:
    """``f(x') = int_{dD} f K(., x')`` for a qS polynomial."""
    space = f.space
    xp = np.array([float(v) for v in _flat(space, x_prime)])
    _inside(D, xp)
    real = qs_to_real(f).to_float()
    res = boundary_integral(real.evaluate_batch, _kernel_at(space, xp), D, q, space.table)
    return res


def represent_with_volume(
    f: RealPoly,
    space: Superspace,
    x_prime,
    D: BallDomain,
    q: QuadratureSpec,
    volume: QuadratureSpec | None = None,
) -> IntegralResult:
    """``f(x') = int_{dD} f K - int_D d''f ^ K`` for any polynomial ``f``.

    ``q`` drives the boundary term and ``volume`` (default: Monte Carlo with
    the same sample count and seed) the volume term.  ``extra`` holds both
    terms separately.
    """
    xp = np.array([float(v) for v in _flat(space, x_prime)])
    _inside(D, xp)
    table = space.table
    gamma = table.gamma_float
    fl = f.to_float()
    bnd = boundary_integral(fl.evaluate_batch, _kernel_at(space, xp), D, q, table)

    comps = d_second(f, space)
    parts = []
    for key, c in space.d_second_directions():
        comp = comps[key].to_float()
        if comp.terms:
            parts.append((c, comp))
    volume = volume or QuadratureSpec("monte_carlo", q.samples, q.seed, q.workers)
    if not parts:
        zero = AlgebraElement(table.to_float(), np.zeros(table.dim))
        vol = IntegralResult(zero, 0.0, 0)
    else:

        def g(X):
            K = kernel_batch(space, X - xp[None, :])
            out = np.zeros((X.shape[0], table.dim))
            for c, comp in parts:
                sign = -1.0 if c % 2 else 1.0
                out += sign * _prod(comp.evaluate_batch(X), K[:, c, :], gamma)
            return out

        vol = volume_integral(g, D, volume, table, pole=xp)
    value = bnd.value - vol.value
    err = math.hypot(bnd.stderr, vol.stderr)
    return IntegralResult(value, err, q.samples, {"boundary": bnd, "volume": vol})


def polydisk_reproduce(f: QsPoly, P: PolydiskDomain, x, q: QuadratureSpec) -> IntegralResult:
    """Iterated formula over the distinguished boundary, one kernel factor per ball."""
    space = f.space
    t = space.table
    gamma = t.gamma_float
    xv = np.array([float(v) for v in _flat(space, x)])
    if not P.contains(xv):
        raise PointOutsideDomain("point is not inside every factor ball")
    real = qs_to_real(f).to_float()
    blocks = P.blocks()
    centers = np.asarray(P.centers)
    factor_spaces = [Superspace(t, 1, 0, space.slices if t.q else None)] * space.n + [Superspace(t, 0, 1, space.slices)] * space.m
    areas = [len(b) * unit_ball_volume(len(b)) * r ** (len(b) - 1) for b, r in zip(blocks, P.radii)]
    scale = math.prod(areas)

    def integrand(dirs: list[np.ndarray]) -> np.ndarray:
        M = dirs[0].shape[0]
        X = np.tile(xv, (M, 1))
        for b, r, u in zip(blocks, P.radii, dirs):
            X[:, list(b)] = centers[list(b)] + r * u
        out = real.evaluate_batch(X)
        for b, fs, u in zip(blocks, factor_spaces, dirs):
            K = kernel_batch(fs, X[:, list(b)] - xv[list(b)])
            out = _prod(out, _contract_batch(K, u), gamma)
        return out

    ft = t.to_float()
    if q.method == "circle_trapezoid":
        if any(len(b) != 2 for b in blocks):
            raise ValueError("circle_trapezoid needs every factor to be a circle")
        nodes = _circle_nodes(q.samples)
        grids = np.meshgrid(*[np.arange(q.samples)] * len(blocks), indexing="ij")
        dirs = [nodes[gidx.ravel()] for gidx in grids]
        vals = integrand(dirs)
        return IntegralResult(AlgebraElement(ft, vals.mean(axis=0) * scale), 0.0, vals.shape[0])

    def sample(rng, M):
        return integrand([_sphere_dirs(rng, M, len(b)) for b in blocks])

    mean, err = _mc(sample, q, t.dim, scale, key=(2,))
    return IntegralResult(AlgebraElement(ft, mean), err, q.samples)


def hartogs_extend(f: ValueFn, space: Superspace, Omega: BallDomain, x_prime, q: QuadratureSpec) -> IntegralResult:
    """Value at ``x'`` of the extension of boundary data ``f``: ``int_{dOmega} f K^{(0)}(., x')``."""
    if space.n + space.m < 2:
        raise DimensionTooSmall("extension needs at least two hypervariables (n + m >= 2)")
    xp = np.array([float(v) for v in _flat(space, x_prime)])
    _inside(Omega, xp)
    return boundary_integral(f, _kernel_at(space, xp), Omega, q, space.table)


# -- Cauchy inequalities ---------------------------------------------------------------------

@dataclass(frozen=True)
class CauchyBoundRow:
    order: tuple[int, ...]
    lhs: float
    bound: float
    ratio: float


@dataclass(frozen=True)
class CauchyBoundReport:
    rows: tuple[CauchyBoundRow, ...]
    sup: float
    C: float

    @property
    def max_ratio(self) -> float:
        return max((r.ratio for r in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return all(math.isfinite(r.ratio) and r.ratio <= self.C for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "sup": self.sup,
            "C": self.C,
            "max_ratio": self.max_ratio,
            "pass": self.passed,
            "rows": [{"order": list(r.order), "lhs": r.lhs, "bound": r.bound, "ratio": r.ratio} for r in self.rows],
        }


def _distinguished_boundary_sup(real: RealPoly, P: PolydiskDomain, samples: int, seed: int) -> float:
    blocks = P.blocks()
    centers = np.asarray(P.centers)
    rng = np.random.default_rng([seed, 3])
    if all(len(b) == 2 for b in blocks) and len(blocks) == 1:
        dirs = [_circle_nodes(samples)]
    else:
        dirs = [_sphere_dirs(rng, samples, len(b)) for b in blocks]
    X = np.tile(centers, (samples, 1))
    for b, r, u in zip(blocks, P.radii, dirs):
        X[:, list(b)] = centers[list(b)] + r * u
    vals = real.evaluate_batch(X)
    return float(np.max(np.linalg.norm(vals, axis=1)))


def cauchy_bounds_check(
    f: QsPoly,
    P: PolydiskDomain,
    orders: Sequence[Sequence[int]],
    C: float = 10.0,
    samples: int = 4096,
    seed: int = 7,
) -> CauchyBoundReport:
    """Ratio of each derivative at the polydisk center to ``I! J! sup|f| r^{-order}``.

    Orders are multi-indices in QsPoly variable order.  The sup over the
    distinguished boundary is a sampled estimate (trapezoid nodes for a
    single circle).
    """
    space = f.space
    real = qs_to_real(f)
    if not is_qs_differentiable(real, space):
        raise NotQs("input is not qS")
    # radius attached to each QsPoly variable: y_i -> r_i, Z_k(theta_j) -> r_{n+j}
    var_r = [P.radii[i] for i in range(space.n)] + [P.radii[space.n + j] for _ in range(space.r) for j in range(space.m)]
    top = max((sum(o) for o in orders), default=0)
    coeffs = taylor_coefficients(real, space, P.centers if space.table.exact is False else _exact_center(space, P), top)
    sup = _distinguished_boundary_sup(real.to_float(), P, samples, seed)
    rows = []
    for order in orders:
        order = tuple(int(v) for v in order)
        fact = math.prod(math.factorial(k) for k in order)
        a = coeffs.terms.get(order)
        lhs = (a.norm() * fact) if a is not None else 0.0
        bound = fact * sup * math.prod(r ** (-k) for r, k in zip(var_r, order))
        ratio = lhs / bound if bound > 0 else (0.0 if lhs == 0 else math.inf)
        rows.append(CauchyBoundRow(order, lhs, bound, ratio))
    return CauchyBoundReport(tuple(rows), sup, C)


def _exact_center(space: Superspace, P: PolydiskDomain):
    from fractions import Fraction

    return tuple(Fraction(v) for v in P.centers)
