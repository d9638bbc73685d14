from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from bwpinch.curvature import ComplexProjective, ModelSpace, Sphere, curvature_of_model, \
    form_to_tensor, ricci_decompose
from bwpinch.double_forms import DoubleForm, as_operator, contract, contraction, kn_product, \
    metric, metric_power, metric_product, norm_identity_check, project_primitive, \
    random_double_form


def traceless_11(n, rng):
    t = rng.standard_normal((n, n))
    t = 0.5 * (t + t.T)
    return DoubleForm(n, 1, 1, t - np.trace(t) / n * np.eye(n))


def test_metric_calibration():
    g = metric(4)
    np.testing.assert_allclose(kn_product(g, g).coeffs, 2 * np.eye(6), atol=0)
    for n in range(1, 9):
        for j in range(n + 1):
            prod = metric(n) if j else DoubleForm(n, 0, 0, np.ones((1, 1)))
            for _ in range(j - 1):
                prod = kn_product(prod, metric(n))
            fact = float(np.prod(np.arange(1, j + 1)))
            np.testing.assert_allclose(prod.coeffs / fact, np.eye(comb(n, j)), atol=1e-12)


def test_kn_matches_index_oracle():
    rng = np.random.default_rng(0)
    for n in range(2, 6):
        for pa, qa, pb, qb in [(1, 1, 1, 1), (1, 2, 1, 0), (2, 2, 1, 1), (0, 1, 2, 1)]:
            if max(pa + pb, qa + qb) > n:
                continue
            a = random_double_form(n, pa, qa, rng)
            b = random_double_form(n, pb, qb, rng)
            ref = oracles.kn(a.coeffs, pa, qa, b.coeffs, pb, qb, n)
            np.testing.assert_allclose(kn_product(a, b).coeffs, ref, atol=1e-12)


def test_metric_product_matches_kn():
    rng = np.random.default_rng(1)
    for n in range(3, 8):
        for j in range(0, n - 1):
            b = random_double_form(n, 1, 1, rng)
            np.testing.assert_allclose(metric_product(j, b).coeffs,
                                       kn_product(metric_power(n, j), b).coeffs, atol=1e-12)


def test_kn_traceless_ricci_trace_zero():
    rng = np.random.default_rng(2)
    for n in range(3, 9):
        t = traceless_11(n, rng)
        for k in range(1, n):
            op = metric_product(k - 1, t).coeffs
            assert abs(np.trace(op)) <= 1e-12 * max(1.0, np.abs(op).sum())


def test_kn_associative_random():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(3, 7))
        a, b, c = (random_double_form(n, 1, 1, rng) for _ in range(3))
        lhs = kn_product(kn_product(a, b), c).coeffs
        rhs = kn_product(a, kn_product(b, c)).coeffs
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 7), st.integers(0, 2 ** 32 - 1))
def test_kn_commutes_on_even_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    a = random_double_form(n, 2, 2, rng, symmetric=True)
    b = random_double_form(n, 1, 1, rng, symmetric=True)
    c = random_double_form(n, 2, 2, rng, symmetric=True)
    np.testing.assert_allclose(kn_product(b, b).coeffs, kn_product(b, b).coeffs.T, atol=1e-12)
    np.testing.assert_allclose(kn_product(a, b).coeffs, kn_product(b, a).coeffs, atol=1e-10)
    np.testing.assert_allclose(kn_product(a, c).coeffs, kn_product(c, a).coeffs, atol=1e-10)


def test_contraction_matches_index_oracle():
    rng = np.random.default_rng(4)
    for n in range(2, 6):
        for p, q in [(1, 1), (2, 2), (2, 1), (3, 2)]:
            if max(p, q) > n:
                continue
            a = random_double_form(n, p, q, rng)
            np.testing.assert_allclose(contraction(a).coeffs, oracles.ctr(a.coeffs, p, q, n),
                                       atol=1e-12)


def test_contraction_adjoint_random():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(2, 8))
        p, q = int(rng.integers(1, n + 1)), int(rng.integers(1, n + 1))
        a = random_double_form(n, p, q, rng)
        b = random_double_form(n, p - 1, q - 1, rng)
        lhs = contraction(a).inner(b)
        rhs = a.inner(metric_product(1, b))
        assert abs(lhs - rhs) <= 1e-11 * max(1.0, abs(lhs))


def test_contraction_examples():
    for n in range(2, 9):
        g2 = metric_power(n, 2)
        np.testing.assert_allclose(contraction(g2).coeffs, (n - 1) * np.eye(n), atol=1e-12)
    with pytest.raises(ValueError):
        contraction(DoubleForm.zero(3, 0, 1))


def test_double_contraction_of_curvature():
    # with ctr the adjoint of g., the scalar ctr^2 Rm is R itself
    for n in range(3, 8):
        rm = curvature_of_model(ModelSpace((Sphere(n, 1.0),)))
        assert abs(contract(rm.form, 2).scalar() - n * (n - 1)) <= 1e-10


def test_norm_identity():
    rng = np.random.default_rng(6)
    res = norm_identity_check(project_primitive(random_double_form(6, 2, 2, rng, True)), 1)
    assert res.factor == 2 and res.residual <= 1e-10 and res.pairing_residual <= 1e-10
    res = norm_identity_check(project_primitive(random_double_form(6, 2, 2, rng, True)), 0)
    assert res.factor == 1 and res.residual == 0
    res = norm_identity_check(project_primitive(random_double_form(10, 3, 3, rng, True)), 4)
    assert res.factor == 1 and res.residual <= 1e-10
    for n in range(2, 11):
        for k in range(1, n // 2 + 1):
            for j in range(n - 2 * k + 1):
                t = project_primitive(random_double_form(n, k, k, rng, True))
                res = norm_identity_check(t, j)
                assert res.factor == comb(n - 2 * k, j)
                assert res.residual <= 1e-10 and res.pairing_residual <= 1e-10


def test_norm_identity_errors():
    rng = np.random.default_rng(7)
    t = project_primitive(random_double_form(6, 2, 2, rng, True))
    with pytest.raises(ValueError):
        norm_identity_check(t, 3)
    with pytest.raises(ValueError):
        norm_identity_check(random_double_form(6, 2, 2, rng, True), 1)
    with pytest.raises(ValueError):
        norm_identity_check(DoubleForm.zero(6, 2, 2), 1)


def test_as_operator():
    rm = curvature_of_model(ModelSpace((Sphere(4, 2.5),)))
    np.testing.assert_allclose(as_operator(rm.form), 2.5 * np.eye(6), atol=1e-14)
    rng = np.random.default_rng(8)
    op = as_operator(random_double_form(5, 2, 2, rng, symmetric=True))
    assert np.abs(op - op.T).max() <= 1e-12
    with pytest.raises(ValueError):
        as_operator(random_double_form(5, 2, 2, rng))
    with pytest.raises(ValueError):
        as_operator(random_double_form(5, 2, 1, rng))


def test_operator_norm_matches_tensor_norm():
    dec = ricci_decompose(curvature_of_model(ModelSpace((ComplexProjective(2, 4.0),))))
    w = form_to_tensor(dec.weyl)
    hs = float(np.sum(as_operator(dec.weyl) ** 2))
    assert abs(hs - oracles.full_norm_sq_quarter(w)) <= 1e-10 * max(1.0, hs)
    assert hs > 1


def test_symmetric_flag():
    rng = np.random.default_rng(9)
    assert random_double_form(4, 2, 2, rng, symmetric=True).symmetric_flag
    assert not random_double_form(4, 2, 2, rng).symmetric_flag
    assert not random_double_form(4, 2, 1, rng).symmetric_flag
    with pytest.raises(ValueError):
        DoubleForm(4, 2, 2, np.zeros((6, 5)))
