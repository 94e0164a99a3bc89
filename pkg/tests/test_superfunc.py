from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from superanalysis import conditions as cond
from superanalysis.csa_core import complex, complex_grassmann
from superanalysis.superfunc import (
    NotQs,
    QsPoly,
    RealPoly,
    SuperPoint,
    Superspace,
    d_prime,
    d_second,
    eval_qs,
    fd_d_second,
    is_qs_differentiable,
    laplacian,
    qs_to_real,
    real_to_qs,
    recenter,
    slice_variable,
    taylor_coefficients,
)

C = complex()


def space_c(n=1):
    return Superspace(C, n, 0)


def gspace(g, n, m):
    t = complex_grassmann(g)
    _, s = cond.grassmann_slices(t)
    return Superspace(t, n, m, s)


def frac_point(N):
    return st.lists(st.fractions(min_value=-2, max_value=2, max_denominator=5), min_size=N, max_size=N).map(tuple)


seeds = st.integers(0, 2**32 - 1)


def test_coordinate_layout():
    S = gspace(2, 2, 2)
    assert S.N == 2 * 4 + 2 * 4
    assert S.y_index(2, 3) == 7
    assert S.theta_index(1, 1) == 8
    assert S.theta_index(2, 4) == 15
    assert S.label(7) == "y2^3" and S.label(15) == "theta2^4"
    assert S.leads == (0, 4, 8, 12, 10, 14)
    assert len(S.d_second_directions()) == 2 * 3 + 2 * 2


@given(seeds)
def test_superpoint_flatten_roundtrip(seed):
    S = gspace(2, 2, 1)
    rng = np.random.default_rng(seed)
    flat = tuple(Fraction(int(v)) for v in rng.integers(-5, 6, S.N))
    pt = SuperPoint.from_flat(S, flat)
    assert pt.flatten() == flat
    assert all(y.is_even() for y in pt.y) and all(t.is_odd() for t in pt.theta)


def test_superpoint_parity_checked(cg1):
    with pytest.raises(ValueError):
        SuperPoint((cg1.eps(1),), ())


def test_slice_variable_examples(cg1):
    _, s = cond.grassmann_slices(cg1)
    assert slice_variable(cg1.element([0, 0, 3, 4]), 1, s) == cg1.element([3, 4, 0, 0])
    assert slice_variable(cg1.zero(), 1, s) == cg1.zero()
    assert slice_variable(cg1.eps(1), 1, s) == cg1.one()


def test_eval_examples(cg1):
    S = space_c()
    c = C.element([2, -1])
    assert eval_qs(QsPoly.constant(S, c), (5, 7)) == c
    y = QsPoly.variable(S, 0)
    assert eval_qs(y * y, (1, 1)) == C.element([0, 2])
    S1 = gspace(1, 1, 1)
    Y, Z = QsPoly.variable(S1, 0), QsPoly.variable(S1, 1)
    # y = i, theta = eta: Z_1(eta) = e0, so y Z_1 = i
    assert eval_qs(Y * Z, (0, 1, 1, 0)) == cg1.basis(1)
    assert eval_qs(Y * Z, (0, 1, 0, 1)) == -cg1.one()


def test_qs_to_real_examples():
    S = space_c()
    y = QsPoly.variable(S, 0)
    assert qs_to_real(y).terms == {(1, 0): C.one(), (0, 1): C.basis(1)}
    assert qs_to_real(y * y).terms == {(2, 0): C.one(), (1, 1): C.basis(1) * 2, (0, 2): -C.one()}


@given(seeds, frac_point(8))
def test_eval_commutes_with_expansion(seed, x):
    S = gspace(2, 1, 1)
    rng = np.random.default_rng(seed)
    center = tuple(Fraction(int(v)) for v in rng.integers(-2, 3, S.N))
    P = QsPoly.random(S, 3, rng, center=center)
    assert eval_qs(P, x) == qs_to_real(P).evaluate(x)


def test_d_second_examples(cg1):
    S = space_c()
    y = QsPoly.variable(S, 0)
    assert all(v.is_zero() for v in d_second(qs_to_real(y * y * y), S).values())
    comp = d_second(RealPoly.coordinate(C, 2, 1), S)[("y", 1, 1)]
    assert comp.terms == {(0, 0): C.one()}
    S1 = gspace(1, 1, 1)
    Z = qs_to_real(QsPoly.variable(S1, 1))
    comps = d_second(Z, S1)
    assert comps[("theta", 1, 2)].is_zero()
    assert Z.derivative(S1.theta_index(1, 2)).terms == {(0, 0, 0, 0): cg1.basis(1)}


def test_d_prime_examples():
    S = space_c()
    y = QsPoly.variable(S, 0)
    assert all(v.is_zero() for v in d_prime(RealPoly.constant(C, 2, C.one()), S).values())
    got = d_prime(qs_to_real(y * y), S)[("y", 1)]
    assert got == qs_to_real(y * C.scalar(2))


def test_d_prime_keys():
    S = gspace(2, 1, 2)
    assert [k for k, _ in S.d_prime_directions()] == [("y", 1), ("Z", 1, 1), ("Z", 2, 1), ("Z", 1, 2), ("Z", 2, 2)]


@given(seeds)
def test_qs_closure(seed):
    S = gspace(1, 1, 1)
    rng = np.random.default_rng(seed)
    P, Q = QsPoly.random(S, 2, rng), QsPoly.random(S, 2, rng)
    assert is_qs_differentiable(qs_to_real(P), S)
    assert is_qs_differentiable(qs_to_real(P * Q), S)
    assert qs_to_real(P * Q) == qs_to_real(P) * qs_to_real(Q)


def test_coordinate_function_not_qs():
    S = space_c()
    y1 = RealPoly.coordinate(C, 2, 1)
    assert not is_qs_differentiable(y1, S)
    with pytest.raises(NotQs):
        real_to_qs(y1, S)
    with pytest.raises(NotQs):
        taylor_coefficients(y1, S)


def test_real_to_qs_examples(cg2):
    S = space_c()
    y = QsPoly.variable(S, 0)
    P = y * y * y + y * C.scalar(2)
    assert real_to_qs(qs_to_real(P), S) == P
    S2 = gspace(2, 0, 1)
    Z1, Z2 = QsPoly.variable(S2, 0), QsPoly.variable(S2, 1)
    assert real_to_qs(qs_to_real(Z1 * Z2), S2) == Z1 * Z2


@given(seeds)
def test_roundtrip_property(seed):
    rng = np.random.default_rng(seed)
    S = gspace(2, 1, 1)
    P = QsPoly.random(S, int(rng.integers(0, 5)), rng)
    assert real_to_qs(qs_to_real(P), S) == P


def test_taylor_examples():
    S = space_c()
    y = QsPoly.variable(S, 0)
    b = (Fraction(1), Fraction(2))
    T = taylor_coefficients(qs_to_real(y * y), S, b)
    bb = C.element(list(b))
    assert T.terms == {(0,): bb * bb, (1,): bb * 2, (2,): C.one()}
    c = C.element([3, -1])
    assert taylor_coefficients(RealPoly.constant(C, 2, c), S).terms == {(0,): c}


@given(seeds)
def test_double_recentering(seed):
    rng = np.random.default_rng(seed)
    S = gspace(2, 1, 1)
    P = QsPoly.random(S, 4, rng)
    center = tuple(Fraction(int(v), 2) for v in rng.integers(-3, 4, S.N))
    moved = taylor_coefficients(qs_to_real(P), S, center)
    assert recenter(moved, S.zero_point()) == P


def test_taylor_matches_real_to_qs(cg2):
    rng = np.random.default_rng(5)
    S = gspace(2, 1, 1)
    P = qs_to_real(QsPoly.random(S, 3, rng))
    center = tuple(Fraction(int(v)) for v in rng.integers(-2, 3, S.N))
    assert taylor_coefficients(P, S, center) == real_to_qs(P, S, center)


def test_taylor_truncation_and_liouville_surrogate():
    rng = np.random.default_rng(8)
    S = gspace(1, 1, 1)
    P = QsPoly.random(S, 3, rng)
    T = taylor_coefficients(qs_to_real(P), S, None, max_degree=7)
    assert max(sum(k) for k in T.terms) <= 3


def test_laplacian_examples():
    S = space_c()
    y = QsPoly.variable(S, 0)
    assert laplacian(qs_to_real(y * y)).is_zero()
    sq = RealPoly(C, 2, {(2, 0): C.one()})
    assert laplacian(sq).terms == {(0, 0): C.scalar(2)}


@given(seeds)
def test_harmonicity_property(seed):
    rng = np.random.default_rng(seed)
    S = gspace(2, 1, 1)
    assert laplacian(qs_to_real(QsPoly.random(S, 4, rng))).is_zero()


def test_fd_d_second_examples():
    S = space_c()
    y = QsPoly.variable(S, 0)
    P = qs_to_real(y * y * y).to_float()
    comps = fd_d_second(lambda v: P.evaluate_batch(v[None])[0], S, (0.4, -0.3))
    assert max(c.norm() for c in comps.values()) < 1e-7
    comps = fd_d_second(lambda v: np.array([v[1], 0.0]), S, (0.4, -0.3))
    assert np.allclose(comps[("y", 1, 1)].to_numpy(), [1, 0], atol=1e-10)
    comps = fd_d_second(lambda v: np.array([2.0, 1.0]), S, (0.4, -0.3))
    assert all(c.is_zero() for c in comps.values())


def test_fd_d_second_odd_direction():
    S = gspace(1, 1, 1)
    P = qs_to_real(QsPoly.random(S, 3, np.random.default_rng(2))).to_float()
    comps = fd_d_second(lambda v: P.evaluate_batch(v[None])[0], S, (0.1, 0.2, -0.3, 0.4), h=1e-4)
    assert max(c.norm() for c in comps.values()) < 1e-6


def test_degenerate_dimensions(cg1):
    S = gspace(1, 0, 1)
    assert S.N == 2 and S.n_qs_vars == 1
    S0 = Superspace(cg1, 1, 0, cond.grassmann_slices(cg1)[1])
    assert S0.N == 2 and S0.n_qs_vars == 1
    assert len(S0.d_second_directions()) == 1


def test_shift_matches_evaluation():
    rng = np.random.default_rng(4)
    S = gspace(1, 1, 1)
    P = qs_to_real(QsPoly.random(S, 3, rng))
    b = tuple(Fraction(int(v)) for v in rng.integers(-2, 3, 4))
    x = tuple(Fraction(int(v)) for v in rng.integers(-2, 3, 4))
    assert P.shift(b).evaluate(x) == P.evaluate(tuple(u + v for u, v in zip(x, b)))


def test_batch_evaluation_matches_exact():
    rng = np.random.default_rng(6)
    S = gspace(2, 1, 1)
    P = qs_to_real(QsPoly.random(S, 3, rng))
    X = rng.integers(-2, 3, (5, S.N))
    got = P.to_float().evaluate_batch(X.astype(float))
    want = np.array([P.evaluate(tuple(Fraction(int(v)) for v in row)).to_numpy() for row in X])
    assert np.allclose(got, want, rtol=1e-12, atol=1e-12)
