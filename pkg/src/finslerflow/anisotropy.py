"""Elliptic Finsler norms on the plane.

A norm ``F`` is stored through its restriction to the unit circle,
``phi(theta) = F(cos theta, sin theta)``. In two dimensions ``phi`` and its
first two derivatives determine ``F``, its gradient and its Hessian, so
nothing here needs finite differences:

* ``grad F(e(theta)) = phi e + phi' e_perp`` (0-homogeneous extension),
* ``Hess F(e(theta)) tau . tau = phi + phi''``,
* the boundary of the unit Wulff shape ``{F° < 1}`` is the curve with
  support function ``phi``.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np

from .curve import PolylineCurve
from .periodic import angle_grid, fourier_modes, trapezoid_periodic, trig_eval
from .report import InequalityReport

KINDS = ("euclidean", "quadratic", "fourier", "sampled")

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class AnisotropyError(ValueError):
    """Raised for malformed or non-elliptic anisotropy data."""


def _is_power_of_two(n):
    return n >= 4 and (n & (n - 1)) == 0


class Anisotropy:
    """Immutable elliptic Finsler norm.

    Use the constructors :meth:`euclidean`, :meth:`quadratic`,
    :meth:`fourier` and :meth:`sampled` rather than ``__init__``.

    Parameters
    ----------
    kind : {"euclidean", "quadratic", "fourier", "sampled"}
    grid_size : int
        Power of two; resolution of grid-based evaluations (Wulff area,
        polar sampling, validation).
    """

    def __init__(self, kind, *, grid_size=512, alpha=None, beta=None,
                 c0=None, modes=None, phi=None):
        if kind not in KINDS:
            raise AnisotropyError(f"kind: unknown anisotropy kind {kind!r}")
        grid_size = int(grid_size)
        if not _is_power_of_two(grid_size):
            raise AnisotropyError(f"grid_size: must be a power of two >= 4, got {grid_size}")
        self.kind = kind
        self.grid_size = grid_size
        self.alpha = self.beta = self.c0 = None
        self.modes = ()
        self.phi_samples = None

        if kind == "quadratic":
            if alpha is None or beta is None or not (alpha > 0 and beta > 0):
                raise AnisotropyError("alpha/beta: quadratic anisotropy needs alpha > 0 and beta > 0")
            self.alpha, self.beta = float(alpha), float(beta)
        elif kind == "fourier":
            if c0 is None:
                raise AnisotropyError("c0: fourier anisotropy needs a constant term")
            self.c0 = float(c0)
            cleaned = []
            for entry in modes or ():
                if len(entry) != 3:
                    raise AnisotropyError("modes: each mode must be [m, a_m, b_m]")
                m, am, bm = entry
                if int(m) != m or m < 2 or int(m) % 2:
                    raise AnisotropyError(f"modes: mode index must be an even integer >= 2, got {m}")
                if m >= grid_size // 2:
                    raise AnisotropyError(f"modes: mode {m} not resolved by grid_size {grid_size}")
                cleaned.append((int(m), float(am), float(bm)))
            self.modes = tuple(cleaned)
            m = np.array([0.0] + [e[0] for e in cleaned])
            a = np.array([self.c0] + [e[1] for e in cleaned])
            b = np.array([0.0] + [e[2] for e in cleaned])
            self._trig = (m, a, b)
        elif kind == "sampled":
            if phi is None:
                raise AnisotropyError("phi: sampled anisotropy needs phi values")
            values = np.asarray(phi, dtype=float)
            if values.ndim != 1 or not _is_power_of_two(values.size):
                raise AnisotropyError("phi: sampled values must be a 1-d array with power-of-two length")
            if not np.all(np.isfinite(values)):
                raise AnisotropyError("phi: sampled values must be finite")
            self.grid_size = values.size
            half = values.size // 2
            values = 0.5 * (values + np.roll(values, -half))
            values.setflags(write=False)
            self.phi_samples = values
            m, a, b = fourier_modes(values)
            keep = (m.astype(int) % 2) == 0
            self._trig = (m[keep], a[keep], b[keep])
        self._validate()

    # constructors -----------------------------------------------------

    @classmethod
    def euclidean(cls, grid_size=512):
        return cls("euclidean", grid_size=grid_size)

    @classmethod
    def quadratic(cls, alpha, beta, grid_size=512):
        return cls("quadratic", alpha=alpha, beta=beta, grid_size=grid_size)

    @classmethod
    def fourier(cls, c0, modes, grid_size=512):
        return cls("fourier", c0=c0, modes=modes, grid_size=grid_size)

    @classmethod
    def sampled(cls, phi):
        return cls("sampled", phi=phi, grid_size=len(phi))

    # evaluation -------------------------------------------------------

    def phi(self, theta, deriv=0):
        """``d^deriv/dtheta^deriv F(cos theta, sin theta)``."""
        theta = np.asarray(theta, dtype=float)
        if self.kind == "euclidean":
            return np.ones_like(theta) if deriv == 0 else np.zeros_like(theta)
        if self.kind == "quadratic":
            al, be = self.alpha, self.beta
            c, s = np.cos(theta), np.sin(theta)
            g = al * c * c + be * s * s
            f = np.sqrt(g)
            if deriv == 0:
                return f
            g1 = (be - al) * np.sin(2.0 * theta)
            if deriv == 1:
                return g1 / (2.0 * f)
            if deriv == 2:
                g2 = 2.0 * (be - al) * np.cos(2.0 * theta)
                return g2 / (2.0 * f) - g1 * g1 / (4.0 * f ** 3)
            raise ValueError("quadratic anisotropy supports deriv <= 2")
        m, a, b = self._trig
        return trig_eval(m, a, b, theta, deriv)

    @cached_property
    def theta_grid(self):
        return angle_grid(self.grid_size)

    def on_grid(self, N):
        """``(phi, phi + phi'', psi)`` on the uniform ``N``-grid, cached per ``N``."""
        cache = self.__dict__.setdefault("_grid_cache", {})
        if N not in cache:
            t = angle_grid(N)
            p = self.phi(t)
            h = p + self.phi(t, 2)
            out = (p, h, p * h)
            for arr in out:
                arr.setflags(write=False)
            cache[N] = out
        return cache[N]

    @cached_property
    def phi_grid(self):
        """``(phi, phi', phi'')`` on the uniform grid."""
        t = self.theta_grid
        out = tuple(self.phi(t, d) for d in range(3))
        for arr in out:
            arr.setflags(write=False)
        return out

    @property
    def lower_bound(self):
        """``a = min phi``: ``a|xi| <= F(xi)``."""
        return float(self.phi_grid[0].min())

    @property
    def upper_bound(self):
        """``b = max phi``: ``F(xi) <= b|xi|``."""
        return float(self.phi_grid[0].max())

    @property
    def ellipticity(self):
        """``min (phi + phi'')`` on the grid; positive for elliptic norms."""
        p, _, p2 = self.phi_grid
        return float((p + p2).min())

    @cached_property
    def kappa(self):
        return wulff_area(self)

    @cached_property
    def max_psi(self):
        return float(psi(self, self.theta_grid).max())

    def _validate(self):
        p, _, p2 = self.phi_grid
        if not np.all(np.isfinite(p)):
            raise AnisotropyError("phi: non-finite values")
        if p.min() <= 0.0:
            raise AnisotropyError(f"phi: not positive (min phi = {p.min():.6g})")
        if (p + p2).min() <= 1e-6 * p.mean():
            raise AnisotropyError(
                f"phi: not elliptic (min(phi + phi'') = {(p + p2).min():.6g})")

    # serialization ----------------------------------------------------

    def to_dict(self):
        d = {"kind": self.kind, "grid_size": self.grid_size}
        if self.kind == "quadratic":
            d.update(alpha=self.alpha, beta=self.beta)
        elif self.kind == "fourier":
            d.update(c0=self.c0, modes=[list(e) for e in self.modes])
        elif self.kind == "sampled":
            d.update(phi=[float(x) for x in self.phi_samples])
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise AnisotropyError("anisotropy spec must be an object")
        if "kind" not in d:
            raise AnisotropyError("kind: missing field")
        known = {"kind", "grid_size", "alpha", "beta", "c0", "modes", "phi"}
        extra = set(d) - known
        if extra:
            raise AnisotropyError(f"{sorted(extra)[0]}: unknown field")
        kind = d["kind"]
        kwargs = {"grid_size": d.get("grid_size", 512)}
        try:
            if kind == "quadratic":
                kwargs.update(alpha=float(d["alpha"]), beta=float(d["beta"]))
            elif kind == "fourier":
                kwargs.update(c0=float(d["c0"]), modes=d.get("modes", []))
            elif kind == "sampled":
                kwargs.update(phi=d["phi"])
                kwargs["grid_size"] = len(d["phi"])
        except KeyError as exc:
            raise AnisotropyError(f"{exc.args[0]}: missing field") from None
        except (TypeError, ValueError) as exc:
            raise AnisotropyError(f"{kind}: {exc}") from None
        return cls(kind, **kwargs)

    def __repr__(self):
        if self.kind == "quadratic":
            return f"Anisotropy.quadratic({self.alpha}, {self.beta})"
        if self.kind == "fourier":
            return f"Anisotropy.fourier({self.c0}, {list(self.modes)})"
        if self.kind == "sampled":
            return f"Anisotropy.sampled(<{self.grid_size} values>)"
        return "Anisotropy.euclidean()"

    @property
    def label(self):
        if self.kind == "quadratic":
            return f"quadratic({self.alpha:g},{self.beta:g})"
        if self.kind == "fourier":
            return "fourier(" + ",".join(f"{m}:{a:g}:{b:g}" for m, a, b in self.modes) + ")"
        return self.kind


def _unit(theta):
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def _unit_perp(theta):
    return np.stack([-np.sin(theta), np.cos(theta)], axis=-1)


def eval_F(a, xi):
    """``F(xi) = |xi| phi(atan2(xi_2, xi_1))``; vectorized over ``xi[..., 2]``."""
    xi = np.asarray(xi, dtype=float)
    r = np.hypot(xi[..., 0], xi[..., 1])
    theta = np.arctan2(xi[..., 1], xi[..., 0])
    return r * a.phi(theta)


def grad_F(a, xi):
    """Gradient of ``F`` at nonzero ``xi`` (the Cahn-Hoffman vector for unit ``xi``)."""
    xi = np.asarray(xi, dtype=float)
    if np.any(np.hypot(xi[..., 0], xi[..., 1]) == 0.0):
        raise ValueError("grad_F is undefined at the zero vector")
    theta = np.arctan2(xi[..., 1], xi[..., 0])
    p = a.phi(theta)[..., None]
    dp = a.phi(theta, 1)[..., None]
    return p * _unit(theta) + dp * _unit_perp(theta)


def tangential_hessian(a, theta):
    """``Hess F(nu) tau . tau = phi + phi''`` at normal angle ``theta``."""
    return a.phi(theta) + a.phi(theta, 2)


def psi(a, theta):
    """Flow mobility ``phi (phi + phi'')``."""
    return a.phi(theta) * tangential_hessian(a, theta)


def _golden_max(f, lo, hi, tol):
    """Vectorized golden-section maximization of ``f`` on ``[lo, hi]``."""
    width = float(np.max(hi - lo))
    iters = max(1, int(math.ceil(math.log(tol / width) / math.log(_GOLDEN))))
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc > fd
        lo = np.where(left, lo, c)
        hi = np.where(left, d, hi)
        new = np.where(left, hi - _GOLDEN * (hi - lo), lo + _GOLDEN * (hi - lo))
        fnew = f(new)
        c, fc, d, fd = (np.where(left, new, d), np.where(left, fnew, fd),
                        np.where(left, c, new), np.where(left, fc, fnew))
    x = 0.5 * (lo + hi)
    return f(x)


def eval_polar(a, v, tol=1e-10):
    """Polar norm ``F°(v) = max_theta <v, e(theta)> / phi(theta)``.

    Grid argmax over ``a.grid_size`` directions, then golden-section
    refinement on the two neighbouring cells down to ``tol`` in angle.
    """
    v = np.asarray(v, dtype=float)
    shape = v.shape[:-1]
    flat = v.reshape(-1, 2)
    t = a.theta_grid
    p = a.phi_grid[0]
    vals = (flat[:, :1] * np.cos(t) + flat[:, 1:] * np.sin(t)) / p
    j = np.argmax(vals, axis=1)
    best = vals[np.arange(len(j)), j]
    h = t[1] - t[0]
    lo = t[j] - h
    hi = t[j] + h

    def ratio(theta):
        return (flat[:, 0] * np.cos(theta) + flat[:, 1] * np.sin(theta)) / a.phi(theta)

    refined = _golden_max(ratio, lo, hi, tol)
    out = np.maximum(best, refined)
    out[np.all(flat == 0.0, axis=1)] = 0.0
    return out.reshape(shape)


def polar_anisotropy(a, tail_tol=1e-13, max_grid=1 << 14):
    """The polar norm ``F°`` as a sampled anisotropy.

    Sampling starts on ``a``'s grid and doubles until the upper half of the
    spectrum carries less than ``tail_tol`` relative amplitude; polars of
    strongly anisotropic norms decay much more slowly than the norm itself.
    """
    n = a.grid_size
    while True:
        values = eval_polar(a, _unit(angle_grid(n)))
        _, ca, cb = fourier_modes(values)
        tail = np.hypot(ca, cb)[len(ca) // 2:].max()
        if tail <= tail_tol * values.mean() or n >= max_grid:
            return Anisotropy.sampled(values)
        n *= 2


def wulff_boundary(a, M):
    """Boundary of the unit Wulff shape sampled at ``theta_j = 2 pi j / M``.

    Vertices are ``phi e + phi' e_perp = grad F(e(theta_j))``.
    """
    if M < 8:
        raise ValueError(f"wulff_boundary needs M >= 8, got {M}")
    return PolylineCurve(grad_F(a, _unit(angle_grid(M))))


def wulff_area(a):
    """``kappa = |W| = 1/2 int (phi^2 - phi'^2) dtheta``."""
    p, p1, _ = a.phi_grid
    return float(0.5 * trapezoid_periodic(p * p - p1 * p1))


def check_duality(a, n_samples=1000, seed=0, tolerance=1e-6):
    """Residuals of the Finsler duality identities on seeded random vectors.

    Checks ``<grad F(xi), xi> = F(xi)``, ``F(grad F°(xi)) = F°(grad F(xi)) = 1``,
    ``F°(xi) grad F(grad F°(xi)) = F(xi) grad F°(grad F(xi)) = xi`` and the
    anisotropic Cauchy-Schwarz inequality ``|<xi, eta>| <= F(xi) F°(eta)``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal((n_samples, 2))
    eta = rng.standard_normal((n_samples, 2))
    pol = polar_anisotropy(a)

    F_xi = eval_F(a, xi)
    Fo_xi = eval_polar(a, xi)
    gF = grad_F(a, xi)
    gFo = grad_F(pol, xi)

    euler_F = np.abs(np.einsum("ij,ij->i", gF, xi) - F_xi).max()
    euler_Fo = np.abs(np.einsum("ij,ij->i", gFo, xi) - Fo_xi).max()
    unit_F = np.abs(eval_F(a, gFo) - 1.0).max()
    unit_Fo = np.abs(eval_polar(a, gF) - 1.0).max()
    inv_1 = np.linalg.norm(Fo_xi[:, None] * grad_F(a, gFo) - xi, axis=1).max()
    inv_2 = np.linalg.norm(F_xi[:, None] * grad_F(pol, gF) - xi, axis=1).max()
    cs = (F_xi * eval_polar(a, eta) - np.abs(np.einsum("ij,ij->i", xi, eta))).min()

    ctx = {"anisotropy": a.label, "n_samples": n_samples, "seed": seed}
    return [
        InequalityReport.residual("euler_F", euler_F, tolerance, **ctx),
        InequalityReport.residual("euler_polar", euler_Fo, tolerance, **ctx),
        InequalityReport.residual("F_of_grad_polar", unit_F, tolerance, **ctx),
        InequalityReport.residual("polar_of_grad_F", unit_Fo, tolerance, **ctx),
        InequalityReport.residual("inverse_polar_then_F", inv_1, tolerance, **ctx),
        InequalityReport.residual("inverse_F_then_polar", inv_2, tolerance, **ctx),
        InequalityReport.build("cauchy_schwarz", cs, 0.0, 1e-12, **ctx),
    ]
