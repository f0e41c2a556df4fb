import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kobalab.domains import get_domain
from kobalab.errors import DegenerateGradientError, EvaluationError
from kobalab.levi import (Jet, JetField, complex_gradient, complex_hessian, levi_form,
                          min_levi_eigenvalue, tangential_basis)


def norm2(z):
    return float(np.vdot(z, z).real)


def quartic(z):
    return abs(z[0]) ** 4


def test_gradient_examples():
    z = np.array([0.3 + 0.2j, -0.1 + 0.5j])
    assert np.allclose(complex_gradient(lambda p: p[0].real, z), [0.5, 0], atol=1e-9)
    assert np.allclose(complex_gradient(norm2, z), np.conj(z), atol=1e-9)
    r = get_domain("graph2")
    g = complex_gradient(r.eval_r, np.array([0.1 + 0j, 0j]))
    assert abs(g[0] - 2e-3) <= 1e-9


def test_levi_form_examples():
    z = np.array([0.3 + 0.2j, -0.1 + 0.5j])
    assert levi_form(norm2, z, [1, 0]) == pytest.approx(1.0, abs=1e-8)
    assert abs(levi_form(lambda p: (p[0] ** 2).real, z, [0.3 - 1j, 2.0])) <= 1e-8
    assert levi_form(quartic, np.array([0.1 + 0j, 0j]), [1, 0]) == pytest.approx(0.04, abs=1e-7)


def test_min_eigenvalue_examples():
    z = np.array([0.2 + 0.1j, 0.4j])
    assert min_levi_eigenvalue(norm2, z) == pytest.approx(1.0, abs=1e-8)
    assert min_levi_eigenvalue(lambda p: abs(p[0]) ** 2 - abs(p[1]) ** 2, z) == pytest.approx(-1.0, abs=1e-8)
    ball = get_domain("ball")
    field = JetField(lambda p: ball.r_jet(p) / 0.05)
    assert min_levi_eigenvalue(field, z) == pytest.approx(20.0, abs=1e-6)
    assert min_levi_eigenvalue(lambda p: ball.eval_r(p) / 0.05, z) == pytest.approx(20.0, abs=1e-6)


def test_tangential_basis_examples():
    sphere = JetField(lambda p: Jet.norm2(p) - 1.0)
    (v,) = tangential_basis(sphere, np.array([1 + 0j, 0j]))
    assert np.allclose(np.abs(v), [0, 1])
    (v,) = tangential_basis(JetField(lambda p: Jet.im(p, 1)), np.array([0.3j, 0.1 + 0j]))
    assert np.allclose(np.abs(v), [1, 0])


def test_tangential_basis_degenerate():
    with pytest.raises(DegenerateGradientError):
        tangential_basis(JetField(lambda p: Jet.norm2(p)), np.zeros(2, complex))


def test_quadratic_hessian_identity():
    H = complex_hessian(norm2, np.array([0.7 - 0.2j, 0.1j]))
    assert np.allclose(H.matrix, np.eye(2), atol=1e-8)
    assert np.array_equal(H.matrix, H.matrix.conj().T)


def test_second_order_convergence():
    z = np.array([0.4 + 0.3j, 0.2j])
    exact = np.diag([4 * abs(z[0]) ** 2, 0.0])
    errs = [np.max(np.abs(complex_hessian(quartic, z, step=h, richardson=False).matrix - exact))
            for h in (1e-2, 5e-3, 2.5e-3, 1.25e-3)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    assert all(3.5 < r < 4.5 for r in ratios)


def test_evaluation_failure():
    def bad(p):
        if p[0].real > 0.5:
            raise ValueError("undefined")
        return 0.0

    with pytest.raises(EvaluationError):
        complex_gradient(bad, np.array([0.5 + 0j]))


def test_jet_matches_finite_differences():
    dom = get_domain("flat")
    z = np.array([0.03 + 0.01j, -0.002j])
    jet = dom.phi_jet(1e-2, z)
    fd = complex_hessian(lambda p: dom.phi_jet(1e-2, p).val, z, step=1e-5)
    assert np.max(np.abs(fd.matrix - jet.hess)) <= 1e-4 * np.max(np.abs(jet.hess))


points = st.tuples(*[st.floats(-0.9, 0.9)] * 4).map(lambda t: np.array([t[0] + 1j * t[1], t[2] + 1j * t[3]]))
vectors = st.tuples(*[st.floats(-2, 2)] * 4).map(lambda t: np.array([t[0] + 1j * t[1], t[2] + 1j * t[3]]))


@given(points, vectors, st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_sesquilinear(z, X, c):
    field = JetField(lambda p: Jet.abs2(p, 0).power(2) + Jet.norm2(p) * 0.3)
    a = levi_form(field, z, c * X)
    b = abs(c) ** 2 * levi_form(field, z, X)
    assert a == pytest.approx(b, rel=1e-10, abs=1e-10)


@given(points)
def test_psh_fields_nonnegative(z):
    for fn in (norm2, quartic, lambda p: np.exp(p[0].real) * (1 + abs(p[1]) ** 2)):
        assert min_levi_eigenvalue(fn, z) >= -1e-8


@given(points)
def test_tangential_pairing(z):
    if np.linalg.norm(z) < 1e-3:
        return
    field = JetField(lambda p: Jet.norm2(p) + Jet.abs2(p, 0).power(2) - 1.0)
    grad = field.jet(z).grad
    for v in tangential_basis(field, z):
        assert abs(np.dot(grad, v)) <= 1e-8
        assert np.linalg.norm(v) == pytest.approx(1.0)
