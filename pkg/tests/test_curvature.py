import math

import numpy as np
import pytest
from scipy.stats import special_ortho_group

import oracles
from bwpinch.curvature import (AlgCurvature, Circle, ComplexProjective, CoshCylinder, ModelSpace,
                               Sphere, bianchi_sum, cosh_cylinder_curvature, curvature_of_model,
                               form_to_tensor, normalize_base, product, project_curvature,
                               random_curvature, ricci_decompose, rho_of, tensor_to_form,
                               volume_of)
from bwpinch.double_forms import contraction


def model(*factors):
    return ModelSpace(tuple(factors))


def test_sphere_curvature():
    rm = curvature_of_model(model(Sphere(4, 1.0)))
    np.testing.assert_allclose(rm.operator, np.eye(6), atol=1e-15)
    assert ricci_decompose(rm).R == pytest.approx(12, abs=1e-12)


def test_operator_matches_tensor_oracle():
    rng = np.random.default_rng(0)
    rm = random_curvature(5, rng)
    np.testing.assert_allclose(rm.operator, oracles.curvature_operator(rm.tensor()), atol=1e-14)
    np.testing.assert_allclose(ricci_decompose(rm).ricci, oracles.ricci(rm.tensor()), atol=1e-12)


def test_product_of_three_spheres_einstein():
    dec = ricci_decompose(curvature_of_model(model(Sphere(3, 1.0), Sphere(3, 1.0))))
    assert dec.R == pytest.approx(12, abs=1e-12)
    assert dec.is_einstein()


@pytest.mark.parametrize("m", [1, 2, 3, 4])
@pytest.mark.parametrize("c", [1.0, 4.0])
def test_complex_projective(m, c):
    r = curvature_of_model(model(ComplexProjective(m, c))).tensor()
    np.testing.assert_allclose(r, oracles.complex_space_form(m, c), atol=1e-14)
    np.testing.assert_allclose(oracles.ricci(r), (m + 1) * c / 2 * np.eye(2 * m), atol=1e-12)
    e = np.eye(2 * m)
    assert oracles.sectional(r, e[0], e[1]) == pytest.approx(c, abs=1e-12)
    if m >= 2:
        assert oracles.sectional(r, e[0], e[2]) == pytest.approx(c / 4, abs=1e-12)


def test_ricci_decompose_sphere():
    for n in range(3, 9):
        dec = ricci_decompose(curvature_of_model(model(Sphere(n, 0.7))))
        assert np.abs(dec.ric0).max() <= 1e-12
        assert dec.weyl.norm() <= 1e-12
        assert dec.R == pytest.approx(n * (n - 1) * 0.7, rel=1e-14)


def test_s2xs2_weyl():
    dec = ricci_decompose(curvature_of_model(model(Sphere(2, 1.0), Sphere(2, 1.0))))
    assert dec.is_einstein()
    w_sq = oracles.full_norm_sq_quarter(form_to_tensor(dec.weyl))
    assert w_sq > 0.1
    assert dec.weyl_norm_sq == pytest.approx(w_sq, rel=1e-12)


def test_sphere_times_circle_ric0():
    for n in range(4, 11):
        dec = ricci_decompose(curvature_of_model(model(Sphere(n - 1, 1.0), Circle(1.0))))
        eig = np.sort(np.linalg.eigvalsh(dec.ric0))
        assert eig[0] == pytest.approx(-(n - 1) * (n - 2) / n, rel=1e-12)
        np.testing.assert_allclose(eig[1:], (n - 2) / n, rtol=1e-12)
        assert dec.ric0_norm_sq == pytest.approx((n - 1) * (n - 2) ** 2 / n, rel=1e-12)


def test_weyl_vanishes_in_dimension_three():
    rng = np.random.default_rng(1)
    for _ in range(20):
        assert ricci_decompose(random_curvature(3, rng)).weyl.norm() <= 1e-12


def test_decomposition_invariants_random():
    rng = np.random.default_rng(2)
    for i in range(500):
        n = 3 + i % 6
        rm = random_curvature(n, rng)
        dec = ricci_decompose(rm)
        scale = max(1.0, rm.form.norm())
        assert abs(np.trace(dec.ric0)) <= 1e-12 * scale
        assert contraction(dec.weyl).norm() <= 1e-10 * scale
        assert (dec.reassemble() - rm.form).norm() <= 1e-10 * scale


def test_decomposition_invariants_models():
    models = [model(Sphere(3, 1.0), Sphere(3, 2.0)), model(ComplexProjective(2, 4.0), Circle(1.0)),
              model(Sphere(2, 1.0), Sphere(2, 1.0), ComplexProjective(2, 1.0)),
              model(Sphere(5, 1.0), Circle(3.0))]
    for m in models:
        rm = curvature_of_model(m)
        assert rm.bianchi_residual() <= 1e-12
        dec = ricci_decompose(rm)
        assert (dec.reassemble() - rm.form).norm() <= 1e-10 * max(1.0, rm.form.norm())


def test_projection():
    rng = np.random.default_rng(3)
    for n in range(3, 8):
        x = rng.standard_normal((n, n, n, n))
        p = project_curvature(x)
        assert np.abs(bianchi_sum(p)).max() <= 1e-12 * np.abs(p).max()
        assert np.abs(project_curvature(p) - p).max() <= 1e-12 * np.abs(p).max()
        # round trip through the (2,2) form
        np.testing.assert_allclose(form_to_tensor(tensor_to_form(p)), p, atol=1e-14)


def test_alg_curvature_rejects_bad_input():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((4, 4, 4, 4))
    r = 0.5 * (x - np.einsum("bacd->abcd", x))
    r = 0.5 * (r - np.einsum("abdc->abcd", r))
    r = 0.5 * (r + np.einsum("cdab->abcd", r))
    with pytest.raises(ValueError, match="Bianchi"):
        AlgCurvature.from_tensor(r)
    f = tensor_to_form(project_curvature(x))
    f.coeffs[0, 1] += 1.0
    with pytest.raises(ValueError, match="pair symmetry"):
        AlgCurvature(f)


def test_rho():
    for n in range(3, 8):
        assert abs(rho_of(curvature_of_model(model(Sphere(n, 1.0))))) <= 1e-12
    rm = curvature_of_model(model(Sphere(3, 1.0), Sphere(3, 1.0)))
    assert rho_of(rm) == pytest.approx(12 / 30, rel=1e-12)
    rng = np.random.default_rng(5)
    found = 0
    for _ in range(50):
        rm = random_curvature(5, rng)
        if np.linalg.eigvalsh(rm.operator)[0] < 0:
            dec = ricci_decompose(rm)
            assert rho_of(rm) > dec.R / 20
            found += 1
    assert found > 0


def test_frame_invariance():
    rng = np.random.default_rng(6)
    rm = random_curvature(6, rng)
    q = special_ortho_group.rvs(6, random_state=rng)
    a, b = ricci_decompose(rm), ricci_decompose(rm.rotated(q))
    assert a.R == pytest.approx(b.R, rel=1e-12)
    assert a.weyl_norm_sq == pytest.approx(b.weyl_norm_sq, rel=1e-10)
    assert rho_of(rm) == pytest.approx(rho_of(rm.rotated(q)), rel=1e-10)


def test_volumes():
    assert volume_of(model(Sphere(2, 1.0))) == pytest.approx(4 * math.pi, rel=1e-15)
    assert volume_of(model(ComplexProjective(1, 4.0))) == pytest.approx(math.pi, rel=1e-15)
    assert volume_of(model(Sphere(2, 4.0))) == pytest.approx(math.pi, rel=1e-15)
    assert volume_of(product(Sphere(3, 1.0), Sphere(3, 1.0))) == \
        pytest.approx((2 * math.pi ** 2) ** 2, rel=1e-14)
    assert volume_of(model(ComplexProjective(2, 4.0))) == pytest.approx(math.pi ** 2 / 2)
    assert volume_of(model(Circle(2.5))) == 2.5
    with pytest.raises(ValueError):
        volume_of(CoshCylinder(model(Sphere(3, 1.0))))


def test_invalid_factors():
    for bad in (lambda: Sphere(1, 1.0), lambda: Sphere(2, 0.0), lambda: ComplexProjective(0, 1.0),
                lambda: ComplexProjective(1, -1.0), lambda: Circle(0.0),
                lambda: ModelSpace(()), lambda: CoshCylinder(model(Sphere(3, 1.0)), 0.0)):
        with pytest.raises(ValueError):
            bad()


def test_cosh_cylinder_needs_t():
    with pytest.raises(ValueError):
        curvature_of_model(CoshCylinder(model(Sphere(5, 1.0))))


def test_cosh_cylinder_closed_forms():
    c = cosh_cylinder_curvature(model(Sphere(5, 1.0)), 1.0, 0.0)
    assert c.R == pytest.approx(10, rel=1e-12)
    assert c.r1 == pytest.approx(20 / 3, rel=1e-12)
    assert c.R_closed_form == pytest.approx(10, rel=1e-14)
    far = cosh_cylinder_curvature(model(Sphere(5, 1.0)), 1.0, 15.0)
    assert abs(far.R) < 1e-10
    for t in (0.0, 0.3, 1.7):
        assert abs(cosh_cylinder_curvature(model(Sphere(3, 1.0)), 2.0, t).R) <= 1e-12


def test_cosh_cylinder_matches_closed_form_on_einstein_bases():
    for base in (model(Sphere(4, 3.0)), model(Sphere(2, 1.0), Sphere(2, 1.0)),
                 model(ComplexProjective(2, 1.0))):
        for t in (0.0, 0.4, -1.1):
            c = cosh_cylinder_curvature(base, 1.5, t)
            assert c.R == pytest.approx(c.R_closed_form, rel=1e-12)
            assert c.r1 == pytest.approx(c.r1_closed_form, rel=1e-12)
            assert abs(np.trace(c.ric0)) <= 1e-12


def test_normalize_base():
    nb, lam = normalize_base(model(Sphere(2, 1.0), Sphere(2, 3.0)))
    assert ricci_decompose(curvature_of_model(nb)).R == pytest.approx(12, rel=1e-14)
    assert lam == pytest.approx(8 / 12)
