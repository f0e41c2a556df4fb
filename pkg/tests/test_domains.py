import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kobalab.domains import DOMAIN_NAMES, fproperty_check, get_domain
from kobalab.errors import (NotInteriorError, OutOfPatchError, StripError,
                            UnsupportedDomainError)
from kobalab.levi import JetField, tangential_basis


def brute_distance(dom, z, n=801, span=0.05):
    """Distance to graph boundary points on a polar grid around z."""
    rad = np.linspace(0, span, n)
    ang = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    best = np.inf
    for x2 in np.linspace(z[1].real - span, z[1].real + span, 41):
        z1 = z[0] + rad[:, None] * np.exp(1j * ang[None, :])
        pts = np.stack([z1.ravel(), np.full(z1.size, x2 + 0j)], axis=1)
        pts[:, 1] = x2 - 1j * np.abs(pts[:, 0]) ** (2 * dom.m)
        best = min(best, float(np.min(np.linalg.norm(pts - z, axis=1))))
    return best


def test_eval_r_examples():
    ball = get_domain("ball")
    assert ball.eval_r([0, 0]) == -1.0
    assert ball.eval_r([1, 0]) == 0.0
    g = get_domain("graph2")
    assert g.eval_r([0.1, 0.2j]) == pytest.approx(0.2001, abs=1e-15)


def test_out_of_patch_and_unknown():
    with pytest.raises(OutOfPatchError):
        get_domain("graph2").eval_r([0.9, 0])
    with pytest.raises(UnsupportedDomainError):
        get_domain("polydisc")


def test_distance_examples():
    assert get_domain("ball").boundary_distance([0.5, 0]) == pytest.approx(0.5, abs=1e-15)
    assert get_domain("disc").boundary_distance([0.9]) == pytest.approx(0.1, abs=1e-15)
    g = get_domain("graph2")
    d = g.boundary_distance([0, -0.01j])
    assert d == pytest.approx(0.01, rel=1e-4)
    z = np.array([0.02 + 0.01j, 0.003 - 0.01j])
    assert g.boundary_distance(z) == pytest.approx(brute_distance(g, z), rel=1e-4)


def test_projection_examples():
    assert np.allclose(get_domain("ball").boundary_project([0.5, 0]), [1, 0])
    assert np.allclose(get_domain("disc").boundary_project([0.3 + 0.4j]), [0.6 + 0.8j])
    g = get_domain("graph2")
    w = g.boundary_project([0, 0.07 - 0.02j])
    assert np.allclose(w, [0, 0.07], atol=1e-10)


def test_projection_postconditions():
    rng = np.random.default_rng(3)
    for name in ("graph2", "ellipsoid2", "flat"):
        dom = get_domain(name)
        for z in dom.strip_grid(1e-2, 10, rng):
            w = dom.boundary_project(z)
            assert abs(dom.eval_r(w)) <= 1e-10
            n = dom.normal(w)
            d = (z - w) / np.linalg.norm(z - w)
            assert abs(abs(np.vdot(n, d).real) - 1) <= 1e-6


def test_not_interior():
    with pytest.raises(NotInteriorError):
        get_domain("ball").boundary_distance([1.2, 0])


def test_sign_consistency():
    rng = np.random.default_rng(0)
    for name in ("ball", "graph2", "flat"):
        dom = get_domain(name)
        half = 0.3 if dom.global_r else dom.patch.half_re[0] * 0.99
        for _ in range(1000 // 3):
            z = dom.z_o + half * (rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2))
            if dom.eval_r(z) < 0:
                if dom.global_r:
                    assert dom.boundary_distance(z) > 0
            else:
                with pytest.raises(NotInteriorError):
                    dom.boundary_distance(z)


@pytest.mark.parametrize("name", ["ball", "graph2", "ellipsoid2", "flat"])
def test_distance_vs_defining_function(name):
    dom = get_domain(name)
    rng = np.random.default_rng(1)
    for z in dom.strip_grid(1e-2, 20, rng):
        d = dom.boundary_distance(z)
        w = dom.boundary_project(z)
        if d <= 1e-2:
            ratio = abs(dom.eval_r(z)) / (d * dom.r_jet(w).real_gradient_norm())
            assert abs(ratio - 1) <= 0.1


@pytest.mark.parametrize("name", [n for n in DOMAIN_NAMES if n != "disc"])
def test_pseudoconvex(name):
    dom = get_domain(name)
    field = JetField(dom.r_jet)
    worst = np.inf
    for w in dom.sample_boundary(np.random.default_rng(2), 1000):
        for X in tangential_basis(field, w):
            worst = min(worst, dom.r_jet(w).levi(X))
    assert worst >= -1e-10


def test_projection_drift():
    g = get_domain("graph2")
    w0 = g.snap(np.array([0.05 + 0.02j, 0.01 + 0j]))
    n = g.normal(w0)
    for t in (1e-2, 1e-3, 1e-4):
        w = g.boundary_project(w0 - t * n)
        assert np.linalg.norm(w - w0) <= 10 * t * t + 1e-12


def test_ball_fproperty_exact():
    ball = get_domain("ball")
    grid = ball.strip_grid(0.1, 30, np.random.default_rng(0))
    rep = fproperty_check(ball, 0.1, grid)
    assert rep.passed
    assert rep.c_fit == pytest.approx(1.0, abs=1e-8)
    assert -1 < rep.value_min and rep.value_max < 0
    assert rep.fd_max_rel <= 1e-8


def test_flat_fproperty():
    dom = get_domain("flat")
    grid = dom.strip_grid(1e-3, 1000, np.random.default_rng(0))
    assert len(grid) >= 900
    rep = fproperty_check(dom, 1e-3, grid)
    assert rep.passed and rep.c_fit >= 0.1


def test_strip_violation():
    ball = get_domain("ball")
    with pytest.raises(StripError):
        fproperty_check(ball, 0.1, [np.array([0.2 + 0j, 0j])])


@given(st.floats(0.0, 0.95), st.floats(0, 2 * np.pi))
def test_ball_distance_closed_form(rad, ang):
    z = np.array([rad * np.exp(1j * ang), 0j])
    assert get_domain("ball").boundary_distance(z) == pytest.approx(1 - rad, abs=1e-14)


@given(st.floats(-0.1, 0.1), st.floats(-0.1, 0.1), st.floats(1e-4, 0.04))
def test_graph_family_range(x, y, t):
    g = get_domain("graph2")
    z = np.array([x + 1j * y, -1j * (t + abs(x + 1j * y) ** 4)])
    delta = 2 * t
    v = g.phi(delta, z)
    assert -1 - 1e-12 <= v <= 1e-12
