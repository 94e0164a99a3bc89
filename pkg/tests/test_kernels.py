import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from superanalysis import conditions as cond
from superanalysis.csa_core import complex, complex_grassmann, even_subalgebra
from superanalysis.kernels import (
    PolyForm,
    SingularPoint,
    Zero,
    d_prime_of_field,
    d_second_of_field,
    hyperform_top_coefficient,
    kernel_K,
    kernel_batch,
    numerator_form,
    omega0_eval,
    omega1_eval,
    omega_full_eval,
    wedge_one_into_hat,
)
from superanalysis.superfunc import QsPoly, RealPoly, Superspace, qs_to_real

C = complex()


def gspace(g, n, m):
    t = complex_grassmann(g)
    return Superspace(t, n, m, cond.grassmann_slices(t)[1])


def test_wedge_examples():
    assert wedge_one_into_hat(0, (0, 1)) == (1, 1)
    assert wedge_one_into_hat(2, (0, 2)) == (-1, 0)
    assert wedge_one_into_hat(1, (0, 2)) is Zero
    with pytest.raises(ValueError):
        wedge_one_into_hat(1, (1, 1))


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_wedge_sign_by_permutation_parity(N):
    for a, b in itertools.combinations(range(N), 2):
        for l in (a, b):
            sign, rest = wedge_one_into_hat(l, (a, b))
            retained = [c for c in range(N) if c not in (a, b)]
            seq = [l] + retained
            inversions = sum(1 for i, j in itertools.combinations(range(len(seq)), 2) if seq[i] > seq[j])
            assert sign == (-1) ** inversions
            assert sorted(seq) == [c for c in range(N) if c != rest]


def test_omega0_complex_oracle():
    rng = np.random.default_rng(0)
    for _ in range(100):
        x, y = rng.uniform(-2, 2, 2)
        f = 1 / (2j * np.pi * (x + 1j * y))
        H = omega0_eval(C.element([x, y]), C)
        got = H.array[:, 0] + 1j * H.array[:, 1]
        assert np.allclose(got, [1j * f, f], atol=1e-12, rtol=0)


@given(st.floats(0.1, 10))
def test_omega0_homogeneity(lam):
    t = even_subalgebra(complex_grassmann(2)).to_float()
    y = t.element([0.3, -0.7, 0.2, 0.5])
    a = omega0_eval(y, t).array
    b = omega0_eval(y * lam, t).array
    assert np.allclose(b, a * lam ** (-t.p), rtol=1e-12, atol=0)


def test_omega0_singular():
    with pytest.raises(SingularPoint):
        omega0_eval(C.zero(), C)


def test_omega1_mirrors_complex_kernel(cg1):
    _, s = cond.grassmann_slices(cg1)
    rng = np.random.default_rng(1)
    for _ in range(20):
        a, b = rng.uniform(-1, 1, 2)
        odd = omega1_eval(cg1.element([0, 0, a, b]), cg1, s).array
        even = omega0_eval(C.element([a, b]), C).array
        assert np.allclose(odd[:, :2], even, atol=1e-14)
        assert np.allclose(odd[:, 2:], 0)


@given(st.floats(0.1, 10))
def test_omega1_homogeneity(lam):
    t = complex_grassmann(2)
    _, s = cond.grassmann_slices(t)
    th = t.to_float().element([0, 0, 0, 0, 0.4, -0.1, 0.9, 0.3])
    a = omega1_eval(th, t, s).array
    b = omega1_eval(th * lam, t, s).array
    assert np.allclose(b, a * lam ** (1 - t.q), rtol=1e-12, atol=0)


def test_full_kernel_reduces_to_blocks(cg2):
    _, s = cond.grassmann_slices(cg2)
    y = cg2.element([0.2, 0.4, -0.1, 0.3, 0, 0, 0, 0])
    assert np.allclose(omega_full_eval(Superspace(cg2, 1, 0, s), (0.2, 0.4, -0.1, 0.3)).array, omega0_eval(y, cg2).array)
    th = cg2.element([0, 0, 0, 0, 0.5, 0.1, -0.2, 0.7])
    assert np.allclose(omega_full_eval(Superspace(cg2, 0, 1, s), (0.5, 0.1, -0.2, 0.7)).array, omega1_eval(th, cg2, s).array)


@given(st.floats(0.1, 10))
def test_full_kernel_homogeneity(lam):
    S = gspace(2, 1, 1)
    x = np.linspace(-0.5, 0.6, S.N)
    a = kernel_batch(S, x[None])[0]
    b = kernel_batch(S, (lam * x)[None])[0]
    assert np.allclose(b, a * lam ** (1 - S.N), rtol=1e-12, atol=0)


def test_kernel_translation_invariance_and_evenness():
    S = gspace(2, 1, 1)
    rng = np.random.default_rng(2)
    for _ in range(10):
        x, xp, v = rng.standard_normal((3, S.N))
        a = kernel_K(S, x, xp)
        b = kernel_K(S, x + v, xp + v)
        assert np.allclose(a.array, b.array, rtol=1e-12, atol=1e-14)
        assert a.is_even()
    with pytest.raises(SingularPoint):
        kernel_K(S, np.ones(S.N), np.ones(S.N))


def test_kernel_K_complex_is_cauchy_kernel():
    S = Superspace(C, 1, 0)
    xp = np.array([0.3, -0.2])
    for x in ([1.0, 0.5], [-0.4, 0.9]):
        w = (x[0] - xp[0]) + 1j * (x[1] - xp[1])
        f = 1 / (2j * np.pi * w)
        K = kernel_K(S, x, xp).array
        assert np.allclose(K[:, 0] + 1j * K[:, 1], [1j * f, f], atol=1e-13)


@pytest.mark.parametrize(
    "space",
    [Superspace(C, 1, 0), Superspace(C, 2, 0), gspace(1, 1, 1), gspace(2, 0, 1), Superspace(even_subalgebra(complex_grassmann(2)), 1, 0)],
    ids=["c", "c2", "cg1-11", "cg2-01", "cg2-even"],
)
def test_kernel_closed_numerically(space):
    rng = np.random.default_rng(3)
    fn = lambda X: kernel_batch(space, X)  # noqa: E731
    for _ in range(10):
        u = rng.standard_normal(space.N)
        x = u / np.linalg.norm(u) * rng.uniform(0.7, 2)
        assert np.abs(d_second_of_field(space, fn, x)).max() < 1e-6
        assert np.abs(d_prime_of_field(space, fn, x)).max() < 1e-9


@pytest.mark.parametrize("space", [Superspace(C, 1, 0), gspace(2, 1, 1), Superspace(even_subalgebra(complex_grassmann(2)), 2, 0)], ids=["c", "cg2-11", "cg2even-2"])
def test_exact_numerator_identities(space):
    A = numerator_form(space)
    top = hyperform_top_coefficient(space, A)
    assert top == RealPoly.constant(space.table, space.N, space.table.scalar(space.N))
    assert hyperform_top_coefficient(space, A, "d_prime").is_zero()


def test_residual_is_second_order():
    S = gspace(2, 1, 1)
    fn = lambda X: kernel_batch(S, X)  # noqa: E731
    x = np.full(S.N, 0.6 / np.sqrt(S.N))
    coarse = np.abs(d_second_of_field(S, fn, x, 1e-3)).max()
    fine = np.abs(d_second_of_field(S, fn, x, 1e-4)).max()
    assert 50 < coarse / fine < 200


@pytest.mark.parametrize("space", [gspace(1, 1, 1), Superspace(C, 2, 0)], ids=["cg1-11", "c2"])
def test_operator_identities_on_forms(space):
    rng = np.random.default_rng(4)
    P = qs_to_real(QsPoly.random(space, 3, rng))
    # a generic polynomial: perturb a qS one with a non-qS monomial
    bump = RealPoly(space.table, space.N, {tuple([1] * space.N): space.table.one()})
    for f in (P, P + bump):
        w = PolyForm(space, {(): f})
        assert w.d_second().d_second().is_zero()
        assert w.d_prime().d_prime().is_zero()
        assert (w.d_prime().d_second() + w.d_second().d_prime()).is_zero()
        assert w.d().d().is_zero()
    assert PolyForm(space, {(): P}).d_second().is_zero()
    assert not PolyForm(space, {(): P + bump}).d_second().is_zero()
