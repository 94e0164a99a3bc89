import math

import numpy as np
import pytest

from superanalysis import conditions as cond
from superanalysis.csa_core import complex, complex_grassmann
from superanalysis.kernels import HyperForm
from superanalysis.quadrature import (
    BallDomain,
    DimensionTooSmall,
    PointOutsideDomain,
    PolydiskDomain,
    QuadratureSpec,
    boundary_contract,
    boundary_integral,
    cauchy_bounds_check,
    hartogs_extend,
    polydisk_reproduce,
    represent_with_volume,
    reproduce,
    unit_ball_volume,
    volume_integral,
)
from superanalysis.superfunc import QsPoly, RealPoly, Superspace, qs_to_real

C = complex()


def gspace(g, n, m):
    t = complex_grassmann(g)
    return Superspace(t, n, m, cond.grassmann_slices(t)[1])


def test_boundary_contract_example():
    t = C.to_float()
    w = HyperForm(t, np.array([[0.0, 0.0], [1.0, 0.0]]))
    got = boundary_contract(w, [0.0, 1.0])
    assert np.allclose(got.coeffs, [-1.0, 0.0])


def test_boundary_contract_zero_form():
    t = C.to_float()
    assert boundary_contract(HyperForm(t, np.zeros((2, 2))), [0.6, 0.8]).is_zero()


@pytest.mark.parametrize("N,vol", [(1, 2.0), (2, math.pi), (3, 4 * math.pi / 3)])
def test_unit_ball_volume(N, vol):
    assert unit_ball_volume(N) == pytest.approx(vol, rel=1e-14)


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(method="simpson")
    with pytest.raises(ValueError):
        QuadratureSpec(samples=0)
    with pytest.raises(ValueError):
        BallDomain((0, 0), 0)


def test_volume_integral_of_constant():
    t = C.to_float()
    D = BallDomain((0.5, -0.5, 0.0), 1.5)
    one = lambda X: np.tile([1.0, 0.0], (X.shape[0], 1))  # noqa: E731
    exact = unit_ball_volume(3) * 1.5**3
    for pole in (None, (0.6, -0.2, 0.3)):
        r = volume_integral(one, D, QuadratureSpec(samples=20000, seed=1), t, pole=pole)
        assert abs(r.value.coeffs[0] - exact) < 5 * r.stderr + 1e-12
        assert r.value.coeffs[1] == 0


def test_volume_pole_outside():
    t = C.to_float()
    with pytest.raises(PointOutsideDomain):
        volume_integral(lambda X: X, BallDomain((0, 0), 1), QuadratureSpec(samples=10), t, pole=(2, 0))


def test_circle_trapezoid_reproduces_complex_polynomial():
    S = Superspace(C, 1, 0)
    z = QsPoly.variable(S, 0)
    f = z * z * z + QsPoly.constant(S, C.element([2, 1]))
    xp = (0.3, 0.4)
    r = reproduce(f, xp, BallDomain((0, 0), 1.0), QuadratureSpec("circle_trapezoid", samples=64))
    want = qs_to_real(f).to_float().evaluate(np.array(xp))
    assert np.allclose(r.value.coeffs, want.coeffs, atol=1e-13)


def test_trapezoid_requires_circle():
    S = gspace(1, 1, 0)
    with pytest.raises(ValueError):
        reproduce(QsPoly.constant(S, S.table.one()), (0, 0, 0, 0), BallDomain((0,) * 4, 1), QuadratureSpec("circle_trapezoid", 16))


def test_constant_reproduction_superspace():
    S = gspace(1, 1, 1)
    f = QsPoly.constant(S, S.table.element([1, 2, -1, 0.5]))
    r = reproduce(f, np.zeros(S.N), BallDomain(np.zeros(S.N), 1.0), QuadratureSpec(samples=40000, seed=3))
    assert np.allclose(r.value.coeffs, [1, 2, -1, 0.5], atol=6 * r.stderr)


def test_reproduce_rejects_outside_point():
    S = Superspace(C, 1, 0)
    f = QsPoly.constant(S, C.one())
    with pytest.raises(PointOutsideDomain):
        reproduce(f, (1.0, 0.0), BallDomain((0, 0), 1.0), QuadratureSpec(samples=10))


def test_mc_independent_of_workers():
    S = gspace(1, 1, 1)
    f = QsPoly.random(S, 2, np.random.default_rng(5))
    D = BallDomain(np.zeros(S.N), 1.0)
    xp = np.full(S.N, 0.1)
    a = reproduce(f, xp, D, QuadratureSpec(samples=150000, seed=9, workers=1))
    b = reproduce(f, xp, D, QuadratureSpec(samples=150000, seed=9, workers=3))
    assert np.array_equal(a.value.coeffs, b.value.coeffs)
    assert a.stderr == b.stderr


def test_bidisk_trapezoid():
    S = Superspace(C, 2, 0)
    z1, z2 = QsPoly.variable(S, 0), QsPoly.variable(S, 1)
    f = z1 * z2 * z2 + z1 + QsPoly.constant(S, C.element([0, 3]))
    P = PolydiskDomain(S, (0, 0, 0, 0), (1.0, 2.0))
    x = (0.2, -0.3, 0.5, 1.1)
    r = polydisk_reproduce(f, P, x, QuadratureSpec("circle_trapezoid", samples=32))
    want = qs_to_real(f).to_float().evaluate(np.array(x))
    assert np.allclose(r.value.coeffs, want.coeffs, atol=1e-12)


def test_polydisk_mc_superspace():
    S = gspace(1, 1, 1)
    f = QsPoly.random(S, 2, np.random.default_rng(6), coeff_range=1)
    P = PolydiskDomain(S, np.zeros(S.N), (1.0, 0.8))
    x = np.array([0.1, -0.2, 0.2, 0.1])
    r = polydisk_reproduce(f, P, x, QuadratureSpec(samples=60000, seed=2))
    want = qs_to_real(f).to_float().evaluate(x)
    assert np.max(np.abs(np.subtract(r.value.coeffs, want.coeffs))) < 6 * r.stderr + 1e-9


def test_polydisk_outside_point():
    S = Superspace(C, 2, 0)
    P = PolydiskDomain(S, (0, 0, 0, 0), (1.0, 1.0))
    with pytest.raises(PointOutsideDomain):
        polydisk_reproduce(QsPoly.constant(S, C.one()), P, (0, 0, 1.5, 0), QuadratureSpec("circle_trapezoid", 8))
    with pytest.raises(ValueError):
        PolydiskDomain(S, (0, 0, 0, 0), (1.0,))


def test_volume_term_vanishes_for_qs_input():
    S = Superspace(C, 1, 0)
    f = qs_to_real(QsPoly.variable(S, 0) * QsPoly.variable(S, 0))
    r = represent_with_volume(f, S, (0.2, 0.1), BallDomain((0, 0), 1), QuadratureSpec("circle_trapezoid", 64))
    assert r.extra["volume"].value.is_zero()
    assert np.allclose(r.value.coeffs, [0.2**2 - 0.1**2, 2 * 0.2 * 0.1], atol=1e-13)


def test_cauchy_pompeiu_non_holomorphic():
    # f = Im z is not holomorphic; the volume term restores f(x')
    S = Superspace(C, 1, 0)
    f = RealPoly.coordinate(C, 2, 1)
    xp = (0.25, -0.3)
    r = represent_with_volume(
        f, S, xp, BallDomain((0, 0), 1), QuadratureSpec("circle_trapezoid", 128), QuadratureSpec(samples=200000, seed=4)
    )
    assert not r.extra["volume"].value.is_zero(1e-3)
    assert np.allclose(r.value.coeffs, [-0.3, 0.0], atol=6 * r.stderr + 1e-12)


def test_hartogs_dimension_check():
    S = Superspace(C, 1, 0)
    with pytest.raises(DimensionTooSmall):
        hartogs_extend(lambda X: X, S, BallDomain((0, 0), 1), (0, 0), QuadratureSpec(samples=10))


def test_hartogs_extends_polynomial_data():
    S = Superspace(C, 2, 0)
    z1, z2 = QsPoly.variable(S, 0), QsPoly.variable(S, 1)
    real = qs_to_real(z1 * z2 + z2).to_float()
    xp = np.array([0.1, 0.2, -0.2, 0.1])
    r = hartogs_extend(real.evaluate_batch, S, BallDomain(np.zeros(4), 1.0), xp, QuadratureSpec(samples=100000, seed=8))
    assert np.allclose(r.value.coeffs, real.evaluate(xp).coeffs, atol=6 * r.stderr)


def test_cauchy_sharp_monomial():
    S = Superspace(C, 1, 0)
    z = QsPoly.variable(S, 0)
    f = z * z * z
    P = PolydiskDomain(S, (0, 0), (2.0,))
    rep = cauchy_bounds_check(f, P, [(3,)], C=1.0)
    assert rep.rows[0].ratio == pytest.approx(1.0, abs=1e-12)
    assert rep.passed


def test_cauchy_constant_has_zero_ratio():
    S = gspace(1, 1, 1)
    f = QsPoly.constant(S, S.table.element([1, 1, 0, 0]))
    P = PolydiskDomain(S, np.zeros(S.N), (1.0, 1.0))
    rep = cauchy_bounds_check(f, P, [(1, 0), (0, 1), (2, 0)])
    assert rep.max_ratio == 0.0


def test_liouville_surrogate():
    # for order k above the degree the bound decays like R^{deg-k}, so that derivative vanishes
    S = Superspace(C, 1, 0)
    z = QsPoly.variable(S, 0)
    f = z * z + QsPoly.constant(S, C.one())
    bounds = []
    for R in (1.0, 10.0, 100.0):
        rep = cauchy_bounds_check(f, PolydiskDomain(S, (0, 0), (R,)), [(1,), (3,)])
        assert rep.rows[1].lhs == 0.0
        assert rep.passed
        bounds.append(rep.rows[1].bound)
    assert bounds[0] > bounds[1] > bounds[2] > 0
    assert bounds[2] < 0.1
