import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finslerflow.anisotropy import Anisotropy, wulff_boundary
from finslerflow.curve import PolylineCurve, geometry
from finslerflow.gen import GenSpec, arclength_samples, circle, generate
from finslerflow.verify import (PreconditionError, batch_verify, convex_chain, curve_seed,
                                equality_gap, hausdorff, isoperimetric, main_inequality,
                                wulff_gage)

E = Anisotropy.euclidean()
QUAD = Anisotropy.quadratic(4.0, 1.0)
FOURIER = Anisotropy.fourier(1.0, [(4, 0.05, 0.0)])
ELLIPSE = generate(GenSpec("ellipse", M=512), E)
BEAN = generate(GenSpec("bean", M=512), E)


def test_main_inequality_circle():
    r = main_inequality(circle(512), E)
    assert r.lhs == pytest.approx(1.0, abs=1e-4)
    assert r.rhs == pytest.approx(1.0, abs=1e-4)
    assert abs(r.margin) <= r.tolerance and r.passed


def test_main_inequality_ellipse():
    r = main_inequality(ELLIPSE, E)
    assert r.lhs == pytest.approx(2.0, abs=1e-3)
    assert r.rhs == pytest.approx(np.sqrt(0.5), rel=1e-4)
    assert r.margin == pytest.approx(2 - np.sqrt(0.5), abs=2e-3)


def test_main_inequality_tolerance_formula():
    r = main_inequality(circle(256), E)
    assert r.tolerance == pytest.approx((1e-6 + 2 * (2 * np.pi / 256) ** 2) * r.rhs)


@pytest.mark.parametrize("a", [QUAD, FOURIER], ids=["quadratic", "fourier"])
@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_wulff_equality_cases(a, r):
    w = wulff_boundary(a, 512).scaled(r)
    assert abs(main_inequality(w, a).relative_margin) <= 1e-3
    assert abs(wulff_gage(w, a).relative_margin) <= 5e-3
    assert wulff_gage(w, a).lhs == pytest.approx(2 * a.kappa / r, rel=5e-3)
    assert abs(isoperimetric(w, a).relative_margin) <= 1e-3
    low, mid, high = convex_chain(w, a).values
    assert mid == pytest.approx(low, rel=5e-3) and high == pytest.approx(low, rel=5e-3)
    assert equality_gap(w, a) <= 1e-3


def test_wulff_gage_circle():
    r = wulff_gage(circle(512), E)
    assert r.lhs == pytest.approx(2 * np.pi, rel=1e-4)
    assert r.rhs == pytest.approx(2 * np.pi, rel=1e-4)
    assert r.passed


def test_convex_checks_reject_nonconvex():
    with pytest.raises(PreconditionError, match="precondition: convex"):
        wulff_gage(BEAN, E)
    with pytest.raises(PreconditionError):
        convex_chain(BEAN, E)


def test_isoperimetric_circle_quadratic():
    r = isoperimetric(circle(512), QUAD)
    # oracle: dense quadrature of F(nu) over the unit circle
    t = np.linspace(0, 2 * np.pi, 200001)[:-1]
    dense = np.mean(np.sqrt(4 * np.cos(t) ** 2 + np.sin(t) ** 2)) * 2 * np.pi
    assert dense == pytest.approx(9.6884, abs=1e-4)
    assert r.lhs == pytest.approx(dense, rel=1e-4)
    assert r.rhs == pytest.approx(2 * np.sqrt(2 * np.pi * np.pi), rel=1e-4)  # 8.8858
    assert r.margin > 0


def test_chain_ellipse_strictly_increasing():
    low, mid, high = convex_chain(ELLIPSE, E).values
    assert low < mid < high
    # oracle for the middle term: dense quadrature of k^2 ds on the exact ellipse
    u = np.linspace(0, 2 * np.pi, 400001)[:-1]
    speed = np.hypot(2 * np.sin(u), np.cos(u))
    k = 2.0 / speed ** 3
    assert mid == pytest.approx(np.sum(k ** 2 * speed) * (u[1] - u[0]), rel=1e-3)


def test_chain_reproduces_main_inequality():
    c = generate(GenSpec("random_convex", M=512, seed=3), E)
    low, mid, high = convex_chain(c, FOURIER).values
    g = geometry(c, FOURIER)
    assert np.sqrt(high / g.P_F) == pytest.approx(main_inequality(c, FOURIER).lhs, rel=1e-12)
    assert np.sqrt(low / g.P_F) == pytest.approx(main_inequality(c, FOURIER).rhs, rel=1e-12)


def test_equality_gap_values():
    assert equality_gap(ELLIPSE, E) > 0.05
    pw = generate(GenSpec("perturbed_wulff", {"eps": 0.01}, M=512), FOURIER)
    gap = equality_gap(pw, FOURIER)
    assert 0 < gap < 0.05
    assert main_inequality(pw, FOURIER).margin > 0


def test_hausdorff_against_point_sampling():
    # oracle: dense sampling of both polygons, point-to-point distances
    def dense(c, n=40):
        s = np.linspace(0, 1, n, endpoint=False)[:, None, None]
        p = c.vertices[None] + s * c.edges[None]
        return p.reshape(-1, 2)
    a = generate(GenSpec("random_jordan", M=64, seed=1), E)
    b = generate(GenSpec("random_convex", M=48, seed=2), E)
    pa, pb = dense(a), dense(b)
    d = np.linalg.norm(pa[:, None] - pb[None], axis=-1)
    brute = max(d.min(1).max(), d.min(0).max())
    assert hausdorff(a, b) == pytest.approx(brute, rel=2e-3)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 1000), scale=st.floats(0.05, 20.0))
def test_scaling_covariance(seed, scale):
    c = generate(GenSpec("random_jordan", M=128, seed=seed), E)
    r0 = main_inequality(c, FOURIER)
    r1 = main_inequality(c.scaled(scale), FOURIER)
    assert r1.lhs == pytest.approx(r0.lhs / scale, rel=1e-10)
    assert r1.relative_margin == pytest.approx(r0.relative_margin, abs=1e-8)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 1000))
def test_euclidean_specialization(seed):
    c = generate(GenSpec("random_jordan", M=128, seed=seed), E)
    r = main_inequality(c, E)
    assert r.lhs == pytest.approx(np.abs(geometry(c, E).k).max(), abs=1e-10)
    assert r.rhs == pytest.approx(np.sqrt(np.pi / c.area), rel=1e-12)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_inequalities_hold_on_random_curves(seed):
    for family in ("random_convex", "random_jordan"):
        c = generate(GenSpec(family, M=256, seed=seed), E)
        for a in (E, QUAD, FOURIER):
            assert main_inequality(c, a).passed
            assert isoperimetric(c, a).passed


def test_batch_summary_and_determinism():
    g = GenSpec("random_convex", M=128)
    s1 = batch_verify(g, FOURIER, 6, seed=4)
    s2 = batch_verify(g, FOURIER, 6, seed=4, workers=2)
    assert s1.passed and s1.failures == []
    assert s1.rows == s2.rows
    assert [r["seed"] for r in s1.rows] == [curve_seed(4, i) for i in range(6)]
    assert set(s1.min_margins) == {"main_inequality", "isoperimetric", "wulff_gage"}
    assert all(len(q) == 5 for q in s1.quantiles.values())
    assert "0 failure(s)" in s1.text()


def test_batch_jordan_has_no_convex_rows():
    s = batch_verify(GenSpec("random_jordan", M=128), FOURIER, 4, seed=1)
    assert s.passed
    assert not any(r["convex"] for r in s.rows)
    assert "wulff_gage" not in s.min_margins


def test_batch_rejects_empty():
    with pytest.raises(ValueError, match="n"):
        batch_verify(GenSpec("bean"), E, 0)
