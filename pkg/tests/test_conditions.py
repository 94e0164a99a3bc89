import itertools

import numpy as np
import pytest

from superanalysis import conditions as cond
from superanalysis.csa_core import complex, complex_grassmann, even_subalgebra, hyperbolic


def test_a0_examples(ex3):
    c = cond.verify_A0(complex())
    assert c.passed and c.residual == 0
    h = cond.verify_A0(hyperbolic())
    assert not h.passed and h.residual == 2.0
    e = cond.verify_A0(ex3)
    assert e.passed and e.residual == 0


def test_a0_rejects_non_bases():
    c = complex()
    with pytest.raises(cond.NotABasis):
        cond.verify_A0(c, [c.one(), c.one()])
    with pytest.raises(cond.NotABasis):
        cond.verify_A0(c, [c.basis(1), c.one()])


@pytest.mark.parametrize("signs", list(itertools.product([1, -1], repeat=3)))
def test_a0_invariant_under_signed_permutation(signs):
    t = even_subalgebra(complex_grassmann(2))
    base = [t.basis(k) for k in range(1, 4)]
    want = cond.verify_A0(t).passed
    for perm in itertools.permutations(base):
        basis = [t.one()] + [b * s for b, s in zip(perm, signs)]
        assert cond.verify_A0(t, basis).passed == want


@pytest.mark.parametrize("g", [1, 2])
def test_a1_grassmann(g):
    t = complex_grassmann(g)
    eps, s = cond.grassmann_slices(t)
    res = cond.verify_A1(t, eps, s)
    assert res.passed
    assert all(r == 0 for r in res.residuals)
    for k in range(s.r):
        total = t.zero()
        for j in s.slice_range(k):
            total = total + s.a(j) * s.a(j)
        assert total == t.zero()


def test_a1_all_ones_fails_per_slice():
    t = complex_grassmann(1)
    eps = [t.eps(1), t.eps(2)]
    s = cond.SliceSpec((1, 2, 3), (t.one(), t.one()))
    res = cond.verify_A1(t, eps, s)
    assert not res.passed
    sums = [d for d in res.diagnostics if d["check"] == "slice_sum_of_squares"]
    assert [d["residual"] for d in sums] == [1.0, 1.0]


def test_a1_example_diagnostics(ex3):
    eps, s = cond.example3_slices(ex3)
    res = cond.verify_A1(ex3, eps, s)
    assert not res.passed
    assert res.residuals == (0.0, 0.0)
    # only eps6 = e5 eps1 fails: the table gives e5 eps1 = eps2
    assert [(d["check"], d["index"]) for d in res.diagnostics] == [("eps_relation", 4)]


def test_slice_spec_validation(cg1):
    with pytest.raises(ValueError):
        cond.SliceSpec((1, 2), (cg1.one(), cg1.basis(1)))
    with pytest.raises(ValueError):
        cond.SliceSpec((1, 1, 3), (cg1.one(), cg1.basis(1)))
    with pytest.raises(ValueError):
        cond.SliceSpec((1, 3), (cg1.one(), cg1.eps(1)))


def test_a1_rejects_dependent_odd_basis(cg1):
    s = cond.SliceSpec((1, 3), (cg1.one(), cg1.basis(1)))
    with pytest.raises(cond.NotABasis):
        cond.verify_A1(cg1, [cg1.eps(1), cg1.eps(1)], s)


def test_sqrt_minus_one_complex():
    c = complex()
    iota = cond.find_sqrt_minus_one(c)
    assert iota in (c.basis(1), -c.basis(1))


@pytest.mark.parametrize("full", [True, False])
def test_sqrt_minus_one_grassmann(cg2, full):
    t = cg2 if full else even_subalgebra(cg2)
    iota = cond.find_sqrt_minus_one(t)
    assert (iota * iota + t.one()).norm() < 1e-12
    for k in range(t.dim):
        b = t.basis(k)
        assert iota * b == b * iota


def test_sqrt_minus_one_float_table(cg2):
    ft = cg2.to_float()
    iota = cond.find_sqrt_minus_one(ft)
    assert (iota * iota + ft.one()).norm() < 1e-12


def test_sqrt_minus_one_hyperbolic():
    with pytest.raises(cond.NotFound, match="none exists"):
        cond.find_sqrt_minus_one(hyperbolic(), starts=8)


def test_sqrt_minus_one_is_reproducible():
    t = even_subalgebra(complex_grassmann(2)).to_float()
    assert cond.find_sqrt_minus_one(t, seed=3) == cond.find_sqrt_minus_one(t, seed=3)


def test_complexify_examples(cg1, cg2):
    c = complex()
    pairing = cond.complexify(c, c.basis(1))
    assert pairing.complex_dim == 1
    assert pairing.pairs[0] == (c.one(), c.basis(1))
    for t, dim in ((cg1, 2), (cg2, 4)):
        iota = cond.find_sqrt_minus_one(t)
        pairing = cond.complexify(t, iota)
        assert pairing.complex_dim == dim
        flat = [v for pair in pairing.pairs for v in pair]
        assert np.linalg.matrix_rank(np.array([v.to_numpy() for v in flat])) == t.dim
        for b, ib in pairing.pairs:
            assert iota * b == ib
            assert iota * ib == -b


def test_complexify_errors():
    h = hyperbolic()
    with pytest.raises(cond.NotASquareRoot):
        cond.complexify(h, h.basis(1))
    t = complex_grassmann(1)
    with pytest.raises(cond.NotASquareRoot):
        cond.complexify(t, t.eps(1))
