import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finslerflow.anisotropy import (Anisotropy, AnisotropyError, check_duality, eval_F,
                                    eval_polar, grad_F, polar_anisotropy, psi,
                                    tangential_hessian, wulff_area, wulff_boundary)
from finslerflow.periodic import angle_grid

finite = st.floats(-1e3, 1e3, allow_nan=False)
vectors = st.tuples(finite, finite).filter(lambda v: np.hypot(*v) > 1e-6)

QUAD = Anisotropy.quadratic(4.0, 1.0)
FOURIER = Anisotropy.fourier(1.0, [(4, 0.05, 0.0)])
rng = np.random.default_rng(3)
SAMPLED = Anisotropy.sampled(
    1.0 + 0.04 * np.cos(2 * angle_grid(256)) + 0.01 * np.sin(6 * angle_grid(256)))
KINDS = [Anisotropy.euclidean(), QUAD, FOURIER, SAMPLED]


def quad_polar(v):
    return np.sqrt(v[0] ** 2 / 4.0 + v[1] ** 2)


# -- values from closed forms --------------------------------------------------

def test_eval_F_examples():
    assert eval_F(Anisotropy.euclidean(), (3.0, 4.0)) == pytest.approx(5.0, abs=1e-14)
    assert eval_F(QUAD, (1.0, 0.0)) == pytest.approx(2.0, abs=1e-14)
    assert eval_F(QUAD, (0.0, 0.0)) == 0.0


def test_grad_F_examples():
    np.testing.assert_allclose(grad_F(Anisotropy.euclidean(), (0.0, 2.0)), [0.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(grad_F(QUAD, (1.0, 0.0)), [2.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(grad_F(FOURIER, (1.0, 0.0)), [1.05, 0.0], atol=1e-12)
    assert eval_polar(QUAD, (2.0, 0.0)) == pytest.approx(1.0, abs=1e-10)


def test_grad_F_rejects_zero():
    with pytest.raises(ValueError):
        grad_F(QUAD, (0.0, 0.0))


def test_tangential_hessian_examples():
    assert tangential_hessian(Anisotropy.euclidean(), 0.7) == pytest.approx(1.0)
    assert tangential_hessian(FOURIER, 0.0) == pytest.approx(0.25, abs=1e-12)
    assert tangential_hessian(QUAD, 0.0) == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("theta", [0.0, 0.3, 1.1, 2.5])
def test_quadratic_hessian_matches_finite_differences(theta):
    h = 1e-4
    phi = lambda t: QUAD.phi(t)
    fd = (phi(theta + h) - 2 * phi(theta) + phi(theta - h)) / h ** 2
    assert tangential_hessian(QUAD, theta) == pytest.approx(phi(theta) + fd, rel=1e-6)


def test_psi_examples():
    assert psi(Anisotropy.euclidean(), 1.3) == pytest.approx(1.0)
    assert psi(FOURIER, 0.0) == pytest.approx(0.2625, abs=1e-12)
    assert psi(QUAD, 0.0) == pytest.approx(1.0, abs=1e-14)


def test_eval_polar_examples():
    assert eval_polar(Anisotropy.euclidean(), (3.0, 4.0)) == pytest.approx(5.0, rel=1e-10)
    assert eval_polar(QUAD, (1.0, 0.0)) == pytest.approx(0.5, rel=1e-10)
    assert eval_polar(QUAD, (0.0, 0.0)) == 0.0


def test_eval_polar_against_dense_grid():
    # independent oracle: brute-force max over a very fine direction grid
    t = np.linspace(0, 2 * np.pi, 200001)
    e = np.stack([np.cos(t), np.sin(t)], 1)
    for v in rng.normal(size=(5, 2)):
        dense = ((e @ v) / FOURIER.phi(t)).max()
        assert eval_polar(FOURIER, v) == pytest.approx(dense, rel=1e-9)
        assert eval_polar(QUAD, v) == pytest.approx(quad_polar(v), rel=1e-10)


def test_wulff_area_examples():
    assert wulff_area(Anisotropy.euclidean()) == pytest.approx(np.pi, abs=1e-10)
    assert wulff_area(QUAD) == pytest.approx(2 * np.pi, rel=1e-6)
    assert wulff_area(FOURIER) == pytest.approx(np.pi * (1 - 7.5 * 0.0025), rel=1e-12)


def test_wulff_area_matches_dense_shoelace():
    # an inscribed N-gon loses O(N^-2) area, so the comparison needs a dense polygon
    for a in KINDS:
        assert wulff_boundary(a, 8192).area == pytest.approx(wulff_area(a), rel=1e-6)


def test_wulff_polygon_area_deficit_on_circle():
    n = 512
    exact = 0.5 * n * np.sin(2 * np.pi / n)
    assert wulff_boundary(Anisotropy.euclidean(), n).area == pytest.approx(exact, rel=1e-14)


def test_quadratic_wulff_is_ellipse():
    w = wulff_boundary(QUAD, 64)
    np.testing.assert_allclose(w.vertices[0], [2.0, 0.0], atol=1e-14)
    x, y = w.vertices.T
    np.testing.assert_allclose(x ** 2 / 4 + y ** 2, 1.0, atol=1e-13)


def test_euclidean_wulff_is_unit_circle():
    w = wulff_boundary(Anisotropy.euclidean(), 16)
    np.testing.assert_allclose(np.hypot(*w.vertices.T), 1.0, atol=1e-15)


@pytest.mark.parametrize("a", KINDS, ids=lambda a: a.kind)
def test_wulff_vertices_on_unit_polar_sphere(a):
    w = wulff_boundary(a, 256)
    vals = np.array([eval_polar(a, v) for v in w.vertices])
    assert np.abs(vals - 1).max() <= 1e-8


def test_wulff_boundary_rejects_small_M():
    with pytest.raises(ValueError):
        wulff_boundary(QUAD, 7)


def test_bounds_and_kappa_values():
    assert QUAD.lower_bound == pytest.approx(1.0)
    assert QUAD.upper_bound == pytest.approx(2.0)
    assert FOURIER.lower_bound == pytest.approx(0.95)
    assert FOURIER.upper_bound == pytest.approx(1.05)


# -- construction and serialization --------------------------------------------

def test_rejects_odd_modes():
    with pytest.raises(AnisotropyError):
        Anisotropy.fourier(1.0, [(3, 0.05, 0.0)])


def test_rejects_non_elliptic():
    with pytest.raises(AnisotropyError):
        Anisotropy.fourier(1.0, [(4, 0.1, 0.0)])  # 1 - 15 * 0.1 < 0


def test_rejects_nonpositive():
    with pytest.raises(AnisotropyError):
        Anisotropy.quadratic(-1.0, 1.0)


def test_sampled_is_symmetrized():
    t = angle_grid(64)
    a = Anisotropy.sampled(1.0 + 0.02 * np.cos(t) + 0.03 * np.cos(2 * t))
    np.testing.assert_allclose(a.phi(t), a.phi(t + np.pi), atol=1e-14)
    np.testing.assert_allclose(a.phi(t), 1.0 + 0.03 * np.cos(2 * t), atol=1e-14)


@pytest.mark.parametrize("a", KINDS, ids=lambda a: a.kind)
def test_dict_round_trip(a):
    b = Anisotropy.from_dict(a.to_dict())
    t = np.linspace(0, 7, 50)
    np.testing.assert_array_equal(a.phi(t), b.phi(t))


@pytest.mark.parametrize("d, field", [
    ({"alpha": 1.0}, "kind"),
    ({"kind": "quadratic", "alpha": 4.0}, "beta"),
    ({"kind": "euclidean", "colour": 1}, "colour"),
])
def test_from_dict_names_field(d, field):
    with pytest.raises(AnisotropyError, match=field):
        Anisotropy.from_dict(d)


# -- identities and properties ---------------------------------------------------

@pytest.mark.parametrize("a", KINDS, ids=lambda a: a.kind)
def test_check_duality(a):
    reports = check_duality(a, n_samples=300, seed=1)
    assert {r.name for r in reports} >= {"euler_F", "F_of_grad_polar", "polar_of_grad_F",
                                          "inverse_polar_then_F", "cauchy_schwarz"}
    for r in reports:
        assert r.passed, str(r)


def test_polar_of_quadratic_is_quadratic():
    b = polar_anisotropy(QUAD)
    t = np.linspace(0, np.pi, 37)
    np.testing.assert_allclose(b.phi(t), np.sqrt(np.cos(t) ** 2 / 4 + np.sin(t) ** 2), rtol=1e-10)


@settings(max_examples=100, deadline=None)
@given(v=vectors, t=st.floats(-50, 50).filter(lambda x: abs(x) > 1e-3))
def test_homogeneity(v, t):
    v = np.array(v)
    for a in KINDS:
        tol = 1e-12 if a.kind != "sampled" else 1e-8
        assert abs(eval_F(a, t * v) - abs(t) * eval_F(a, v)) <= tol * abs(t) * eval_F(a, v)


@settings(max_examples=100, deadline=None)
@given(v=vectors)
def test_bounds_and_euler(v):
    v = np.array(v)
    n = np.hypot(*v)
    for a in KINDS:
        F = eval_F(a, v)
        assert a.lower_bound * n * (1 - 1e-8) <= F <= a.upper_bound * n * (1 + 1e-8)
        assert abs(grad_F(a, v) @ v - F) <= 1e-8 * max(F, 1.0)


@settings(max_examples=40, deadline=None)
@given(v=vectors, w=vectors)
def test_cauchy_schwarz(v, w):
    for a in (QUAD, FOURIER):
        assert abs(np.dot(v, w)) <= eval_F(a, v) * eval_polar(a, w) * (1 + 1e-10)


@settings(max_examples=40, deadline=None)
@given(v=vectors)
def test_polar_of_gradient_is_one(v):
    for a in (QUAD, FOURIER, SAMPLED):
        assert eval_polar(a, grad_F(a, v)) == pytest.approx(1.0, abs=1e-9)
