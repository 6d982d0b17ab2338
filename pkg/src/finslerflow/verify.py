"""Curvature inequalities on single curves and seeded batches.

Every check returns an :class:`InequalityReport` for ``lhs >= rhs``. The
default tolerances scale with ``rhs`` and with ``(2 pi / M)^2`` so that
refining a curve tightens the test.
"""

from __future__ import annotations

import weakref
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .anisotropy import wulff_area, wulff_boundary
from .curve import PolylineCurve, geometry, is_convex
from .gen import GenSpec, generate
from .report import InequalityReport

QUANTILES = (0.0, 0.05, 0.5, 0.95, 1.0)


class PreconditionError(ValueError):
    """The check is only defined for convex curves."""


def discretization_tolerance(rhs, M):
    """``1e-6 |rhs| + 2 (2 pi / M)^2 |rhs|``."""
    return (1e-6 + 2.0 * (2.0 * np.pi / M) ** 2) * abs(rhs)


def _require_convex(c, name):
    if not is_convex(c):
        raise PreconditionError(f"{name}: precondition: convex curve required")


def main_inequality(c, a, tolerance=None):
    """Maximal anisotropic curvature against that of the equal-area Wulff shape.

    ``lhs = max |kF|`` and ``rhs = sqrt(kappa / A)``; equality holds exactly
    for rescaled Wulff shapes.
    """
    g = geometry(c, a)
    rhs = np.sqrt(a.kappa / g.A)
    tol = discretization_tolerance(rhs, len(c)) if tolerance is None else tolerance
    return InequalityReport.build("main_inequality", g.kF_max, rhs, tol,
                                  anisotropy=a.label, M=len(c))


def wulff_gage(c, a, tolerance=None):
    """``sum kF^2 F(nu) ds >= kappa P_F / A`` for convex curves."""
    _require_convex(c, "wulff_gage")
    g = geometry(c, a)
    lhs = float((g.kF ** 2 * g.F_nu * g.ds).sum())
    rhs = a.kappa * g.P_F / g.A
    tol = discretization_tolerance(rhs, len(c)) if tolerance is None else tolerance
    return InequalityReport.build("wulff_gage", lhs, rhs, tol, anisotropy=a.label, M=len(c))


def isoperimetric(c, a, tolerance=None):
    """Anisotropic isoperimetric inequality ``P_F >= 2 sqrt(kappa A)``."""
    g = geometry(c, a)
    rhs = 2.0 * np.sqrt(a.kappa * g.A)
    tol = discretization_tolerance(rhs, len(c)) if tolerance is None else tolerance
    return InequalityReport.build("isoperimetric", g.P_F, rhs, tol, anisotropy=a.label, M=len(c))


@dataclass(frozen=True)
class ChainReport:
    """``kappa P_F / A <= sum kF^2 F(nu) ds <= kF_max^2 P_F`` with both links checked."""

    values: tuple
    lower: InequalityReport
    upper: InequalityReport

    @property
    def passed(self):
        return self.lower.passed and self.upper.passed

    def as_dict(self):
        return {"values": list(self.values), "lower": self.lower.as_dict(),
                "upper": self.upper.as_dict(), "pass": self.passed}


def convex_chain(c, a):
    """Both links of the convex chain; dividing the outer one by ``P_F`` gives the main inequality."""
    _require_convex(c, "convex_chain")
    g = geometry(c, a)
    low = a.kappa * g.P_F / g.A
    mid = float((g.kF ** 2 * g.F_nu * g.ds).sum())
    high = g.kF_max ** 2 * g.P_F
    M = len(c)
    lower = InequalityReport.build("chain_lower", mid, low, discretization_tolerance(low, M),
                                   anisotropy=a.label, M=M)
    upper = InequalityReport.build("chain_upper", high, mid, discretization_tolerance(mid, M),
                                   anisotropy=a.label, M=M)
    return ChainReport((low, mid, high), lower, upper)


def _segment_distances(points, c, edges):
    """Distance from ``points[i]`` to edge ``edges[i, j]`` of ``c``, minimized over ``j``."""
    a = c.vertices[edges]
    e = c.edges[edges]
    w = points[:, None, :] - a
    s = np.clip(np.einsum("pij,pij->pi", w, e) / np.einsum("pij,pij->pi", e, e), 0.0, 1.0)
    d = w - s[..., None] * e
    return np.sqrt(np.einsum("pij,pij->pi", d, d).min(axis=1))


def _point_segment_distances(points, c, k=16):
    """Distance from each point to the closed polygon ``c`` (vertex-to-edge).

    A closest edge has an endpoint within ``d0 + max edge length`` of the
    point, ``d0`` being the nearest-vertex distance; the ``k`` nearest
    vertices cover that ball for almost every point and the rest fall back
    to all edges.
    """
    m = len(c)
    k = min(k, m)
    dist, idx = cKDTree(c.vertices).query(points, k=k)
    reach = dist[:, 0] + c.edge_lengths.max()
    cand = np.concatenate([idx, (idx - 1) % m], axis=1)
    out = _segment_distances(points, c, cand)
    loose = dist[:, -1] <= reach
    if loose.any():
        full = np.broadcast_to(np.arange(m), (int(loose.sum()), m))
        out[loose] = _segment_distances(points[loose], c, full)
    return out


def hausdorff(c1, c2):
    """Symmetric Hausdorff distance between two polygons, vertices against edges."""
    return float(max(_point_segment_distances(c1.vertices, c2).max(),
                     _point_segment_distances(c2.vertices, c1).max()))


_WULFF_CACHE = weakref.WeakKeyDictionary()


def _unit_wulff(a, M):
    per = _WULFF_CACHE.setdefault(a, {})
    if M not in per:
        w = wulff_boundary(a, M)
        per[M] = (w, w.diameter)
    return per[M]


def equality_gap(c, a, M=None):
    """Normalized distance from ``c`` to the Wulff shape of equal area.

    ``c`` is rescaled to area ``kappa`` and centred at its centroid; the
    result is the Hausdorff distance to the unit Wulff shape divided by the
    Wulff shape's diameter.
    """
    M = len(c) if M is None else int(M)
    scale = np.sqrt(wulff_area(a) / c.area)
    unit = PolylineCurve(scale * (c.vertices - c.centroid), validate=False)
    w, diam = _unit_wulff(a, M)
    return hausdorff(unit, w) / diam


@dataclass
class BatchSummary:
    """Outcome of :func:`batch_verify`.

    ``rows`` holds one dict per curve; ``failures`` lists ``(id, check)``
    pairs; ``min_margins`` and ``quantiles`` are over relative margins.
    """

    genspec: GenSpec
    anisotropy: str
    n: int
    seed: int
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    min_margins: dict = field(default_factory=dict)
    quantiles: dict = field(default_factory=dict)
    equality_violations: list = field(default_factory=list)

    COLUMNS = ("id", "seed", "convex", "main_margin", "main_relative", "iso_margin",
               "iso_relative", "gage_margin", "gage_relative", "chain_upper_margin", "gap")

    @property
    def passed(self):
        return not self.failures

    def as_dict(self):
        return {"genspec": self.genspec.to_dict(), "anisotropy": self.anisotropy,
                "n": self.n, "seed": self.seed, "pass": self.passed,
                "failures": [list(f) for f in self.failures],
                "min_margins": self.min_margins, "quantiles": self.quantiles,
                "equality_violations": self.equality_violations}

    def text(self):
        lines = [f"batch {self.genspec.family} n={self.n} seed={self.seed} "
                 f"anisotropy={self.anisotropy}: {len(self.failures)} failure(s)"]
        for name, value in self.min_margins.items():
            q = ", ".join(f"{v:.3e}" for v in self.quantiles[name])
            lines.append(f"  {name}: min relative margin {value:.3e}  quantiles [{q}]")
        for cid, check in self.failures:
            lines.append(f"  FAIL curve {cid}: {check}")
        return "\n".join(lines)


def curve_seed(seed, i):
    """Per-curve seed mixed from the batch seed and the curve index."""
    return int(np.random.SeedSequence([int(seed), int(i)]).generate_state(1)[0])


def verify_curve(c, a):
    """All applicable checks on one curve, as a list of reports."""
    reports = [main_inequality(c, a), isoperimetric(c, a)]
    if is_convex(c):
        reports.append(wulff_gage(c, a))
        chain = convex_chain(c, a)
        reports += [chain.lower, chain.upper]
    return reports


def _one(args):
    genspec, a, i, s = args
    c = generate(genspec.with_seed(s), a)
    reports = {r.name: r for r in verify_curve(c, a)}
    gap = equality_gap(c, a)
    nan = float("nan")

    def get(name, attr):
        r = reports.get(name)
        return getattr(r, attr) if r is not None else nan

    row = {
        "id": i, "seed": s, "convex": "chain_lower" in reports,
        "main_margin": get("main_inequality", "margin"),
        "main_relative": get("main_inequality", "relative_margin"),
        "iso_margin": get("isoperimetric", "margin"),
        "iso_relative": get("isoperimetric", "relative_margin"),
        "gage_margin": get("wulff_gage", "margin"),
        "gage_relative": get("wulff_gage", "relative_margin"),
        "chain_upper_margin": get("chain_upper", "margin"),
        "gap": gap,
    }
    failed = [name for name, r in reports.items() if not r.passed]
    return row, failed


def batch_verify(genspec, a, n, seed=0, workers=1):
    """Run every applicable check on ``n`` seeded curves from ``genspec``.

    Curve ``i`` is drawn with seed ``curve_seed(seed, i)``, so serial and
    parallel runs give identical summaries.
    """
    if int(n) < 1:
        raise ValueError("n: batch size must be at least 1")
    jobs = [(genspec, a, i, curve_seed(seed, i)) for i in range(int(n))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_one(j) for j in jobs]

    summary = BatchSummary(genspec=genspec, anisotropy=a.label, n=int(n), seed=int(seed))
    for row, failed in results:
        summary.rows.append(row)
        summary.failures += [(row["id"], name) for name in failed]
    for key, name in (("main_relative", "main_inequality"), ("iso_relative", "isoperimetric"),
                      ("gage_relative", "wulff_gage")):
        vals = np.array([r[key] for r in summary.rows], dtype=float)
        vals = vals[np.isfinite(vals)]
        if vals.size:
            summary.min_margins[name] = float(vals.min())
            summary.quantiles[name] = [float(q) for q in np.quantile(vals, QUANTILES)]
    # near-equality must come with a near-Wulff shape
    summary.equality_violations = [
        r["id"] for r in summary.rows if r["main_relative"] <= 1e-3 and r["gap"] > 5e-2]
    summary.failures += [(i, "equality_gap") for i in summary.equality_violations]
    return summary


__all__ = ["InequalityReport", "ChainReport", "BatchSummary", "PreconditionError",
           "main_inequality", "wulff_gage", "isoperimetric", "convex_chain",
           "equality_gap", "hausdorff", "batch_verify", "verify_curve", "curve_seed",
           "discretization_tolerance"]
