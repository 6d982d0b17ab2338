"""Seeded test curves.

Every family returns a validated :class:`PolylineCurve`; random families
draw from ``numpy.random.default_rng(seed)`` and retry until the sample
passes the family's acceptance test (at most ``REJECTION_BUDGET`` draws).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .anisotropy import wulff_boundary
from .curve import (ConvexSupportCurve, CurveError, PolylineCurve, is_convex,
                    is_simple, to_polyline, turning_data)
from .periodic import angle_grid, spectral_diff

REJECTION_BUDGET = 1000

FAMILIES = {
    "wulff": {"scale": 1.0, "center": (0.0, 0.0)},
    "ellipse": {"a": 2.0, "b": 1.0},
    "random_convex": {"max_mode": 6, "amp": 0.6},
    "random_jordan": {"max_mode": 5, "amp": 0.6},
    "perturbed_wulff": {"eps": 0.01, "mode": 3},
    "bean": {},
}


class GenerationError(RuntimeError):
    """The rejection budget ran out before an acceptable curve was drawn."""


@dataclass(frozen=True)
class GenSpec:
    """Curve family, its parameters, vertex count and seed."""

    family: str
    params: dict = field(default_factory=dict)
    M: int = 512
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family: unknown curve family {self.family!r}")
        unknown = set(self.params) - set(FAMILIES[self.family])
        if unknown:
            raise ValueError(f"{sorted(unknown)[0]}: not a parameter of {self.family}")
        if self.M < 8:
            raise ValueError(f"M: need at least 8 vertices, got {self.M}")
        merged = {**FAMILIES[self.family], **self.params}
        for key in ("scale", "a", "b", "amp"):
            if key in merged and not merged[key] > 0:
                raise ValueError(f"{key}: must be positive")
        object.__setattr__(self, "params", merged)

    def with_seed(self, seed):
        return GenSpec(self.family, dict(self.params), self.M, int(seed))

    def to_dict(self):
        params = {k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()}
        return {"family": self.family, "params": params, "M": self.M, "seed": self.seed}

    @classmethod
    def from_dict(cls, d):
        params = dict(d.get("params", {}))
        if "center" in params:
            params["center"] = tuple(params["center"])
        return cls(d["family"], params, int(d.get("M", 512)), int(d.get("seed", 0)))

    @classmethod
    def parse(cls, text, M=512, seed=0):
        """Parse ``family[:key=value,...]``, e.g. ``random_convex:max_mode=8``."""
        family, _, rest = text.partition(":")
        params = {}
        for item in filter(None, rest.split(",")):
            key, _, value = item.partition("=")
            key = key.strip()
            if key == "center":
                x, y = value.split(";")
                params[key] = (float(x), float(y))
            elif key in ("max_mode", "mode"):
                params[key] = int(value)
            else:
                params[key] = float(value)
        return cls(family.strip(), params, M, seed)


def arclength_samples(curve_fn, M, oversample=64):
    """``M`` points of a closed parametric curve, evenly spaced in arc length.

    ``curve_fn`` maps parameters in ``[0, 2 pi)`` to points; the returned
    points lie exactly on the curve.
    """
    u = angle_grid(oversample * M)
    p = curve_fn(u)
    seg = np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    uu = np.concatenate([u, [2.0 * np.pi]])
    target = s[-1] * np.arange(M) / M
    return curve_fn(np.interp(target, s, uu))


def _ellipse(a, b, M):
    return arclength_samples(lambda u: np.stack([a * np.cos(u), b * np.sin(u)], axis=1), M)


def bean_points(M):
    """``rho(u) = 1 + 0.45 cos u + 0.25 cos 2u`` traced in polar form."""
    def fn(u):
        rho = 1.0 + 0.45 * np.cos(u) + 0.25 * np.cos(2.0 * u)
        return np.stack([rho * np.cos(u), rho * np.sin(u)], axis=1)
    return arclength_samples(fn, M)


def _random_convex(rng, max_mode, amp, M):
    n = max(4 * M, 64)
    t = angle_grid(n)
    for _ in range(REJECTION_BUDGET):
        h_fine = np.ones(n)
        h_grid = np.ones(M)
        tg = angle_grid(M)
        for m in range(2, max_mode + 1):
            am, bm = rng.uniform(-amp / m ** 3, amp / m ** 3, size=2)
            h_fine += am * np.cos(m * t) + bm * np.sin(m * t)
            h_grid += am * np.cos(m * tg) + bm * np.sin(m * tg)
        radius = h_fine + spectral_diff(h_fine, 2)
        if radius.min() >= 0.05 * h_fine.mean():
            return to_polyline(ConvexSupportCurve(h_grid))
    raise GenerationError("random_convex: rejection budget exhausted")


def _random_jordan(rng, max_mode, amp, M):
    for _ in range(REJECTION_BUDGET):
        modes = np.arange(2, max_mode + 1)
        coef = rng.uniform(-1.0, 1.0, size=(4, modes.size)) * amp / modes ** 2

        def fn(u, coef=coef):
            mu = np.multiply.outer(u, modes)
            c, s = np.cos(mu), np.sin(mu)
            x = np.cos(u) + c @ coef[0] + s @ coef[1]
            y = np.sin(u) + c @ coef[2] + s @ coef[3]
            return np.stack([x, y], axis=1)

        p = arclength_samples(fn, M)
        try:
            curve = PolylineCurve(p)
        except CurveError:
            continue
        k = turning_data(curve)[4]
        if 1.0 / np.abs(k).max() < 1e-3 * curve.diameter:
            continue
        if is_convex(curve):
            continue
        return curve
    raise GenerationError("random_jordan: rejection budget exhausted")


def _perturbed_wulff(a, eps, mode, M):
    t = angle_grid(M)
    h = a.phi(t) * (1.0 + eps * np.cos(mode * t))
    return to_polyline(ConvexSupportCurve(h))


def generate(g, a):
    """Build the curve described by ``g`` (anisotropy ``a`` for Wulff families)."""
    p, M = g.params, g.M
    if g.family == "wulff":
        c = wulff_boundary(a, M).scaled(p["scale"]).translated(p["center"])
        return PolylineCurve(c.vertices)
    if g.family == "ellipse":
        return PolylineCurve(_ellipse(p["a"], p["b"], M))
    if g.family == "bean":
        return PolylineCurve(bean_points(M))
    if g.family == "perturbed_wulff":
        return _perturbed_wulff(a, p["eps"], int(p["mode"]), M)
    rng = np.random.default_rng(g.seed)
    if g.family == "random_convex":
        return _random_convex(rng, int(p["max_mode"]), p["amp"], M)
    if g.family == "random_jordan":
        return _random_jordan(rng, int(p["max_mode"]), p["amp"], M)
    raise ValueError(f"family: unknown curve family {g.family!r}")


def circle(M=512, radius=1.0):
    """Regular ``M``-gon inscribed in the circle of the given radius."""
    t = angle_grid(M)
    return PolylineCurve(radius * np.stack([np.cos(t), np.sin(t)], axis=1))


__all__ = ["GenSpec", "GenerationError", "generate", "circle", "bean_points",
           "arclength_samples", "FAMILIES", "is_simple"]
