from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from bwpinch.exterior import (KForm, MultiIndex, basis, hodge_matrix, hodge_star, interior,
                              random_form, self_dual_split, set_max_dim, wedge)


def theta(n, *idx):
    return KForm.basis_form(n, idx)


def test_multiindex_round_trip():
    for n in range(1, 8):
        for k in range(n + 1):
            for r in range(comb(n, k)):
                mi = MultiIndex.unrank(n, k, r)
                assert mi.rank(n) == r
                assert tuple(i - 1 for i in mi.indices) == basis(n, k)[r]


def test_multiindex_rejects_bad_input():
    with pytest.raises(ValueError):
        MultiIndex((2, 1))
    with pytest.raises(ValueError):
        MultiIndex((0, 1))
    with pytest.raises(ValueError):
        MultiIndex((1, 5)).rank(4)
    with pytest.raises(ValueError):
        MultiIndex.unrank(4, 2, 6)


def test_wedge_basics():
    n = 3
    assert wedge(theta(n, 1), theta(n, 2)).allclose(theta(n, 1, 2))
    assert wedge(theta(n, 2), theta(n, 1)).allclose(-theta(n, 1, 2))
    a = theta(n, 1) + theta(n, 2)
    b = theta(n, 1) - theta(n, 2)
    assert wedge(a, b).allclose(-2 * theta(n, 1, 2))


def test_wedge_errors():
    with pytest.raises(ValueError):
        wedge(theta(3, 1), theta(4, 1))
    with pytest.raises(ValueError):
        wedge(theta(3, 1, 2), theta(3, 2, 3))


def test_wedge_matches_index_oracle():
    rng = np.random.default_rng(0)
    for n in range(2, 7):
        for p in range(n + 1):
            for q in range(n - p + 1):
                a, b = random_form(n, p, rng), random_form(n, q, rng)
                ref = oracles.wedge(a.coeffs, p, b.coeffs, q, n)
                np.testing.assert_allclose(wedge(a, b).coeffs, ref, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), st.integers(0, 8), st.integers(0, 8), st.integers(0, 2 ** 32 - 1))
def test_wedge_graded_commutative(n, p, q, seed):
    p, q = p % (n + 1), q % (n + 1)
    if p + q > n:
        return
    rng = np.random.default_rng(seed)
    a, b = random_form(n, p, rng), random_form(n, q, rng)
    assert wedge(a, b).allclose((-1) ** (p * q) * wedge(b, a), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 8), st.integers(0, 2 ** 32 - 1))
def test_wedge_associative(n, seed):
    rng = np.random.default_rng(seed)
    p, q = rng.integers(0, n // 2 + 1, 2)
    r = rng.integers(0, n - p - q + 1)
    a, b, c = (random_form(n, d, rng) for d in (p, q, r))
    assert wedge(wedge(a, b), c).allclose(wedge(a, wedge(b, c)), atol=1e-10)


def test_interior_basics():
    e1, e3 = np.eye(3)[0], np.eye(3)[2]
    assert interior(e1, theta(3, 1, 2)).allclose(theta(3, 2))
    assert interior(e3, theta(3, 1, 2)).allclose(KForm.zero(3, 1))
    with pytest.raises(ValueError):
        interior(e1, KForm.zero(3, 0))


def test_interior_adjoint_to_wedge():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = int(rng.integers(1, 9))
        k = int(rng.integers(1, n + 1))
        v = rng.standard_normal(n)
        a, b = random_form(n, k, rng), random_form(n, k - 1, rng)
        lhs = interior(v, a).inner(b)
        rhs = a.inner(wedge(KForm.from_vector(v), b))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_hodge_examples():
    assert hodge_star(theta(4, 1, 2)).allclose(theta(4, 3, 4))
    for r in range(comb(6, 3)):
        e = KForm(6, 3, np.eye(comb(6, 3))[r])
        assert hodge_star(hodge_star(e)).allclose(-e)


def test_hodge_defining_identity():
    # a ^ *b = <a, b> vol
    rng = np.random.default_rng(2)
    for n in range(1, 7):
        for k in range(n + 1):
            a, b = random_form(n, k, rng), random_form(n, k, rng)
            top = wedge(a, hodge_star(b)).coeffs[0]
            assert abs(top - a.inner(b)) <= 1e-12 * max(1.0, abs(top))


def test_hodge_square_every_degree():
    set_max_dim(12)
    for n in range(1, 13):
        for k in range(n + 1):
            sq = hodge_matrix(n, n - k) @ hodge_matrix(n, k)
            assert np.array_equal(sq, (-1) ** (k * (n - k)) * np.eye(comb(n, k)))


def test_hodge_isometry_random():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(1, 11))
        a = random_form(n, int(rng.integers(0, n + 1)), rng)
        assert abs(hodge_star(a).norm() - a.norm()) <= 1e-12 * max(1.0, a.norm())


def test_self_dual_split():
    for n in (4, 8):
        plus, minus = self_dual_split(n)
        assert plus.shape[1] == minus.shape[1] == comb(n, n // 2) // 2
        assert np.abs(plus.T @ minus).max() < 1e-12
        star = hodge_matrix(n, n // 2)
        np.testing.assert_allclose(star @ plus, plus, atol=1e-12)
        np.testing.assert_allclose(star @ minus, -minus, atol=1e-12)
    with pytest.raises(ValueError):
        self_dual_split(6)


def test_dimension_guard():
    with pytest.raises(ValueError):
        KForm(3, 1, np.zeros(4))
    with pytest.raises(ValueError):
        set_max_dim(0)
