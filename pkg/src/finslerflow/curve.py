"""Closed polygonal curves and their (anisotropic) differential geometry.

Conventions: vertices run counterclockwise, the outward normal is the
tangent rotated by -pi/2, and curvature is positive on convex arcs
(``k = 1/R`` on a circle of radius ``R``). The normal angle ``theta`` is
the polar angle of the outward normal, so ``nu = (cos theta, sin theta)``
and ``k = d theta / ds``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial.distance import pdist

from .periodic import (PeriodicField, angle_grid, fourier_modes, trapezoid_periodic,
                       trig_eval)

MIN_VERTICES = 8


class CurveError(ValueError):
    """Invalid curve data; ``index`` names the offending vertex when known."""

    def __init__(self, message, index=None):
        if index is not None:
            message = f"{message} (vertex {index})"
        super().__init__(message)
        self.index = index


def _cross(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _wrap(angle):
    return (angle + np.pi) % (2.0 * np.pi) - np.pi


def signed_area(vertices):
    """Shoelace area; positive for counterclockwise vertex order."""
    p = np.asarray(vertices, dtype=float)
    q = np.roll(p, -1, axis=0)
    return 0.5 * float(np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]))


def _first_crossing(vertices, chunk=256):
    """Index of the first edge crossing a non-adjacent edge, or ``None``."""
    p = np.asarray(vertices, dtype=float)
    m = len(p)
    a, b = p, np.roll(p, -1, axis=0)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    idx = np.arange(m)
    for start in range(0, m, chunk):
        i = idx[start:start + chunk, None]
        j = idx[None, :]
        pair = (j > i + 1) & ~((i == 0) & (j == m - 1))
        if not pair.any():
            continue
        ai, bi = a[i[:, 0]][:, None, :], b[i[:, 0]][:, None, :]
        aj, bj = a[None, :, :], b[None, :, :]
        box = np.all((lo[i[:, 0]][:, None, :] <= hi[None, :, :])
                     & (lo[None, :, :] <= hi[i[:, 0]][:, None, :]), axis=-1)
        cand = pair & box
        if not cand.any():
            continue
        d1 = _cross(bj - aj, ai - aj)
        d2 = _cross(bj - aj, bi - aj)
        d3 = _cross(bi - ai, aj - ai)
        d4 = _cross(bi - ai, bj - ai)
        hit = cand & (d1 * d2 <= 0) & (d3 * d4 <= 0)
        if hit.any():
            return int(start + np.argwhere(hit)[0, 0])
    return None


def is_simple(c):
    """True iff no two non-adjacent edges of the closed polygon intersect."""
    vertices = c.vertices if isinstance(c, PolylineCurve) else np.asarray(c, dtype=float)
    return _first_crossing(vertices) is None


class PolylineCurve:
    """Closed, simple, counterclockwise polygon (closure is implicit).

    Parameters
    ----------
    vertices : array_like, shape (M, 2)
    validate : bool
        Check vertex count, edge lengths, orientation and simplicity. Only
        internal callers that maintain these invariants themselves skip it.
    """

    def __init__(self, vertices, validate=True):
        p = np.array(vertices, dtype=float)
        if p.ndim != 2 or p.shape[1] != 2:
            raise CurveError("vertices must have shape (M, 2)")
        p.setflags(write=False)
        self.vertices = p
        if validate:
            self._validate()

    def _validate(self):
        p = self.vertices
        if len(p) < MIN_VERTICES:
            raise CurveError(f"curve needs at least {MIN_VERTICES} vertices, got {len(p)}")
        if not np.all(np.isfinite(p)):
            bad = int(np.argwhere(~np.isfinite(p))[0, 0])
            raise CurveError("non-finite coordinate", bad)
        lengths = self.edge_lengths
        tiny = 1e-12 * self.diameter
        if lengths.min() <= tiny:
            raise CurveError("degenerate edge", int(np.argmin(lengths)))
        if signed_area(p) <= 0.0:
            raise CurveError("vertices are not counterclockwise (signed area <= 0)")
        bad = _first_crossing(p)
        if bad is not None:
            raise CurveError("curve is not simple", bad)

    def __len__(self):
        return len(self.vertices)

    @property
    def edges(self):
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    @property
    def edge_lengths(self):
        e = self.edges
        return np.hypot(e[:, 0], e[:, 1])

    @property
    def length(self):
        return float(self.edge_lengths.sum())

    @property
    def area(self):
        return signed_area(self.vertices)

    @property
    def diameter(self):
        p = self.vertices
        if len(p) > 4096:
            # bounding-box diagonal; only used for tolerances at this size
            return float(np.hypot(*np.ptp(p, axis=0)))
        return float(pdist(p).max())

    @property
    def centroid(self):
        """Centroid of the enclosed region."""
        p = self.vertices
        q = np.roll(p, -1, axis=0)
        w = p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]
        a = 0.5 * w.sum()
        return ((p + q) * w[:, None]).sum(axis=0) / (6.0 * a)

    def scaled(self, factor, center=(0.0, 0.0)):
        center = np.asarray(center, dtype=float)
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return PolylineCurve(center + factor * (self.vertices - center), validate=False)

    def translated(self, offset):
        return PolylineCurve(self.vertices + np.asarray(offset, dtype=float), validate=False)

    def __repr__(self):
        return f"PolylineCurve(M={len(self)}, area={self.area:.6g})"


@dataclass(frozen=True)
class CurveGeometry:
    """Per-vertex and integral geometry of a polygon under an anisotropy.

    ``ds`` is the dual arc length attached to each vertex (half the two
    adjacent edges); vertex integrals are ``sum(f * ds)``.
    """

    s: np.ndarray
    ds: np.ndarray
    tau: np.ndarray
    nu: np.ndarray
    theta: np.ndarray
    k: np.ndarray
    kF: np.ndarray
    F_nu: np.ndarray
    L: float
    A: float
    P_F: float
    rotation: float

    @property
    def kF_max(self):
        return float(np.abs(self.kF).max())


def _edge_frame(p):
    e = np.roll(p, -1, axis=0) - p
    ell = np.hypot(e[:, 0], e[:, 1])
    # outward normal of edge i (from p_i to p_{i+1}) is its tangent rotated by -pi/2
    alpha = np.arctan2(-e[:, 0], e[:, 1])
    turn = _wrap(alpha - np.roll(alpha, 1))  # turning at vertex i: edge i-1 -> edge i
    return ell, alpha, turn


def turning_data(c):
    """Edge lengths, vertex turning angles, dual lengths and Euclidean curvature.

    The curvature at vertex ``i`` is the centred difference of the edge
    normal angle across the vertex divided by the dual length,
    ``k_i = (alpha_i - alpha_{i-1}) / ((l_{i-1} + l_i) / 2)``.
    """
    p = c.vertices if isinstance(c, PolylineCurve) else np.asarray(c, dtype=float)
    ell, alpha, turn = _edge_frame(p)
    ds = 0.5 * (ell + np.roll(ell, 1))
    return ell, alpha, turn, ds, turn / ds


def geometry(c, a):
    """Full discrete geometry of ``c`` under the anisotropy ``a``.

    Edge normals are averaged to the vertices with the opposite edge
    lengths as weights (exact on circles for any spacing). That average is
    biased by ``k_s l_prev l_next / 6`` where curvature varies, so the
    bias is subtracted using a centred difference of ``k``. The
    anisotropic curvature is ``kF = (phi + phi'')(theta) k``.
    """
    p = c.vertices
    ell, alpha, turn, ds, k = turning_data(c)
    rotation = float(turn.sum())
    if abs(rotation - 2.0 * np.pi) > 1e-6:
        raise CurveError(f"rotation index is {rotation / (2 * np.pi):.6g}, expected 1")
    alpha_unw = alpha[0] + np.concatenate([[0.0], np.cumsum(turn[1:])])
    alpha_prev = np.roll(alpha_unw, 1)
    alpha_prev[0] -= 2.0 * np.pi
    ell_prev = np.roll(ell, 1)
    k_s = (np.roll(k, -1) - np.roll(k, 1)) / (ell_prev + ell)
    theta = alpha_prev + turn * ell_prev / (ell_prev + ell) - k_s * ell_prev * ell / 6.0
    nu = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    tau = np.stack([-nu[:, 1], nu[:, 0]], axis=1)
    F_nu = a.phi(theta)
    kF = (F_nu + a.phi(theta, 2)) * k
    s = np.concatenate([[0.0], np.cumsum(ell[:-1])])
    return CurveGeometry(
        s=s, ds=ds, tau=tau, nu=nu, theta=theta, k=k, kF=kF, F_nu=F_nu,
        L=float(ell.sum()), A=signed_area(p),
        P_F=float((a.phi(alpha) * ell).sum()), rotation=rotation,
    )


def kF_max(c, a):
    """``max |kF|`` over the vertices (the L-infinity norm)."""
    return geometry(c, a).kF_max


def perimeter_F(c, a):
    """Anisotropic perimeter: ``sum F(edge normal) * edge length``."""
    ell, alpha, _ = _edge_frame(c.vertices)
    return float((a.phi(alpha) * ell).sum())


def area(c):
    return c.area


def is_convex(c, tol=1e-3):
    """True iff ``min k >= -tol * max |k|``."""
    k = turning_data(c)[4]
    return bool(k.min() >= -tol * np.abs(k).max())


def menger_curvature(c):
    """Signed curvature of the circle through each vertex and its neighbours.

    Independent of :func:`geometry`; used to cross-check it.
    """
    p = c.vertices if isinstance(c, PolylineCurve) else np.asarray(c, dtype=float)
    a, b = np.roll(p, 1, axis=0), np.roll(p, -1, axis=0)
    u, v, w = p - a, b - p, b - a
    return 2.0 * _cross(u, v) / (np.linalg.norm(u, axis=1)
                                 * np.linalg.norm(v, axis=1)
                                 * np.linalg.norm(w, axis=1))


def _equal_chord_points(path, total, m, max_iter=500, tol=1e-13):
    """Points ``path(sigma_i)`` with equal consecutive chords, ``sigma_0 = 0``."""
    inc = np.full(m, total / m)
    for _ in range(max_iter):
        sigma = np.concatenate([[0.0], np.cumsum(inc[:-1])])
        pts = path(sigma)
        chord = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        ratio = chord / chord.mean()
        if np.abs(ratio - 1.0).max() < tol:
            break
        inc = inc / ratio
        inc *= total / inc.sum()
    return pts


def resample(c, M, method="linear"):
    """Redistribute ``M`` vertices along ``c`` with equal edge lengths.

    The first vertex is kept. ``method="linear"`` places vertices on the
    polygon itself; ``"spline"`` uses the periodic cubic spline through the
    vertices, which keeps the enclosed area to fourth order.
    """
    if M < MIN_VERTICES:
        raise CurveError(f"resample needs M >= {MIN_VERTICES}, got {M}")
    p = c.vertices
    ell = c.edge_lengths
    s = np.concatenate([[0.0], np.cumsum(ell)])
    total = s[-1]
    closed = np.vstack([p, p[:1]])
    if method == "linear":
        def path(sigma):
            sigma = np.mod(sigma, total)
            return np.stack([np.interp(sigma, s, closed[:, 0]),
                             np.interp(sigma, s, closed[:, 1])], axis=1)
    elif method == "spline":
        spline = CubicSpline(s, closed, bc_type="periodic")

        def path(sigma):
            return spline(np.mod(sigma, total))
    else:
        raise ValueError(f"unknown resample method {method!r}")
    return PolylineCurve(_equal_chord_points(path, total, M), validate=False)


class ConvexSupportCurve:
    """Strictly convex curve given by its support function on a uniform grid.

    ``h(theta) = <x(theta), e(theta)>`` where ``x(theta)`` is the boundary
    point with outward normal ``e(theta)``; the radius of curvature is
    ``h + h''``.
    """

    def __init__(self, h):
        self.field = h if isinstance(h, PeriodicField) else PeriodicField(h)
        self._dh = None
        self._radius = r = self.h + self.field.derivative(2)
        if r.min() <= 0.0:
            raise CurveError("support function is not strictly convex (h + h'' <= 0)",
                             int(np.argmin(r)))

    @property
    def h(self):
        return self.field.values

    @property
    def theta(self):
        return self.field.theta

    @property
    def dh(self):
        if self._dh is None:
            self._dh = self.field.derivative(1)
        return self._dh

    @property
    def radius(self):
        return self._radius

    @property
    def area(self):
        h, dh = self.h, self.dh
        return float(0.5 * trapezoid_periodic(h * h - dh * dh))

    def points(self):
        t, h, dh = self.theta, self.h, self.dh
        c, s = np.cos(t), np.sin(t)
        return np.stack([h * c - dh * s, h * s + dh * c], axis=1)

    @classmethod
    def from_polyline(cls, c, N=None, preserve_area=False):
        """Support function of a strictly convex polygon on an ``N``-grid.

        The radius of curvature ``1/k`` is interpolated (periodic cubic
        spline in the normal angle) onto the grid, ``h + h'' = rho`` is
        solved spectrally, and the free translation mode is fitted to the
        vertex samples ``<p_i, nu_i>``. Interpolating ``h`` itself would put
        the interpolation error straight into ``h''``. With ``preserve_area``
        the result is scaled about the polygon's centroid to the polygon's
        area, which leaves the shape (and normalized curvature) unchanged.
        """
        from .anisotropy import Anisotropy  # local: avoid import cycle

        N = len(c) if N is None else int(N)
        g = geometry(c, Anisotropy.euclidean(grid_size=8))
        if g.k.min() <= 0.0:
            raise CurveError("curve is not strictly convex", int(np.argmin(g.k)))
        theta = g.theta
        shift = theta[0]
        t = np.concatenate([theta, [theta[0] + 2.0 * np.pi]]) - shift
        rho = 1.0 / g.k
        spline = CubicSpline(t, np.concatenate([rho, rho[:1]]), bc_type="periodic")
        grid = angle_grid(N)
        rho_hat = np.fft.rfft(spline(np.mod(grid - shift, 2.0 * np.pi)))
        m = np.arange(rho_hat.size)
        h_hat = np.zeros_like(rho_hat)
        h_hat[0] = rho_hat[0]
        h_hat[2:] = rho_hat[2:] / (1.0 - m[2:] ** 2)
        h0 = np.fft.irfft(h_hat, n=N)
        # translation (mode 1) from a least-squares fit at the vertices
        hv = np.einsum("ij,ij->i", c.vertices, g.nu)
        fm, fa, fb = fourier_modes(h0)
        resid = hv - trig_eval(fm, fa, fb, theta)
        basis = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        (cx, cy), *_ = np.linalg.lstsq(basis, resid, rcond=None)
        h = cls(h0 + cx * np.cos(grid) + cy * np.sin(grid))
        if preserve_area:
            q = c.centroid[0] * np.cos(grid) + c.centroid[1] * np.sin(grid)
            lam = np.sqrt(c.area / h.area)
            h = cls(q + lam * (h.h - q))
        return h


def support_samples(c, N):
    """``h(theta_i) = max_j <p_j, e(theta_i)>`` on the uniform ``N``-grid."""
    t = angle_grid(N)
    e = np.stack([np.cos(t), np.sin(t)], axis=1)
    return (c.vertices @ e.T).max(axis=0)


def to_polyline(h):
    """Boundary points ``(h cos - h' sin, h sin + h' cos)`` on the grid."""
    if not isinstance(h, ConvexSupportCurve):
        h = ConvexSupportCurve(h)
    return PolylineCurve(h.points())


def rotation_index(c):
    """Total turning of the edge normals in units of full turns (1 for simple curves)."""
    return float(turning_data(c)[2].sum() / (2.0 * np.pi))


def geometry_table(g, c):
    """Columns ``s, x, y, theta, k, kF, F_nu`` as a 2-d array."""
    p = c.vertices
    return np.column_stack([g.s, p[:, 0], p[:, 1], g.theta, g.k, g.kF, g.F_nu])


__all__ = [
    "CurveError", "PolylineCurve", "CurveGeometry", "ConvexSupportCurve",
    "geometry", "kF_max", "perimeter_F", "area", "is_convex", "is_simple",
    "resample", "to_polyline", "menger_curvature", "support_samples",
    "signed_area", "rotation_index", "turning_data", "geometry_table",
]
