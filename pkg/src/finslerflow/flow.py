"""Anisotropic curvature flow ``u_t = -F(nu) kF nu`` and its monitors.

Two explicit schemes are provided:

* a Lagrangian polygon scheme for arbitrary Jordan curves, moving each
  vertex along its normal with speed ``F(nu) kF = psi(theta) k``;
* a support-function scheme for strictly convex curves,
  ``h_t = -psi(theta) / (h + h'')`` on a uniform normal-angle grid.

:func:`run_flow` starts in whichever representation it is given, switches
from polygon to support function once the curve has stayed convex for a
few samples, and stops when the enclosed area has dropped to a fixed
fraction of its initial value.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .curve import (ConvexSupportCurve, CurveError, PolylineCurve, geometry,
                    is_convex, is_simple, resample, signed_area, turning_data)
from .periodic import trapezoid_periodic
from .report import InequalityReport

log = logging.getLogger(__name__)


class FlowStepError(RuntimeError):
    """A single explicit step produced an invalid curve."""


@dataclass(frozen=True)
class FlowConfig:
    """Time stepping and stopping parameters for :func:`run_flow`.

    ``M`` resamples a polygon input to ``M`` vertices (``None`` keeps the
    input count); ``scheme`` is ``"auto"``, ``"polyline"`` or ``"support"``.
    """

    cfl: float = 0.2
    dt_max: float = 1e-2
    t_end: float | None = None
    area_stop_fraction: float = 0.02
    resample_threshold: float = 2.0
    snapshot_stride: int = 10
    M: int | None = None
    scheme: str = "auto"
    convex_samples: int = 5
    max_steps: int = 2_000_000
    max_halvings: int = 10
    resample_method: str = "spline"

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError("cfl must lie in (0, 1]")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")
        if self.t_end is not None and self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if not 0.0 < self.area_stop_fraction < 1.0:
            raise ValueError("area_stop_fraction must lie in (0, 1)")
        if not self.resample_threshold > 1.0:
            raise ValueError("resample_threshold must exceed 1")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")
        if self.M is not None and self.M < 8:
            raise ValueError("M must be >= 8")
        if self.scheme not in ("auto", "polyline", "support"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


@dataclass(frozen=True)
class FlowSample:
    t: float
    A: float
    P_F: float
    kF_max: float
    kF_min: float
    convex: bool
    f: float
    kF_U_max: float
    scheme: str
    step: int
    segment: int = 0


@dataclass
class FlowTrace:
    """Sampled diagnostics of one flow run.

    ``snapshots[i]`` is the curve at ``samples[i].t``. ``f`` is the factor
    that rescales the curve back to the initial area ``A0`` and
    ``kF_U_max = kF_max / f`` the maximal anisotropic curvature of the
    rescaled curve.
    """

    anisotropy: object
    A0: float
    samples: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    first_convex_time: float | None = None
    stop_reason: str = ""

    COLUMNS = ("t", "A", "P_F", "kF_max", "kF_min", "convex", "f", "kF_U_max")

    def column(self, name):
        return np.array([getattr(s, name) for s in self.samples], dtype=float)

    @property
    def t(self):
        return self.column("t")

    @property
    def A(self):
        return self.column("A")

    @property
    def kappa(self):
        return self.anisotropy.kappa

    def table(self):
        return np.array([[getattr(s, c) for c in self.COLUMNS] for s in self.samples], dtype=float)

    def normalized_snapshot(self, i):
        """Snapshot ``i`` scaled about the origin to the initial area."""
        t, c = self.snapshots[i]
        return c.scaled(self.samples[i].f)


# -- polygon scheme ---------------------------------------------------------

def polyline_velocity(c, a):
    """Vertex velocities ``-F(nu) kF nu`` of the polygon ``c``."""
    g = geometry(c, a)
    return -(g.F_nu * g.kF)[:, None] * g.nu


def polyline_dt(c, a, cfl):
    return cfl * float(c.edge_lengths.min()) ** 2 / a.max_psi


def _check_step(p, diameter):
    ell, _, turn, _, _ = turning_data(p)
    if not np.all(np.isfinite(p)):
        raise FlowStepError("non-finite vertex")
    if ell.min() <= 1e-12 * diameter:
        raise FlowStepError(f"degenerate edge at vertex {int(np.argmin(ell))}")
    if abs(turn.sum() - 2.0 * np.pi) > 1e-6:
        raise FlowStepError("rotation index changed (local fold)")
    if signed_area(p) <= 0.0:
        raise FlowStepError("orientation lost")


def _polyline_step(c, a, dt):
    p = c.vertices + dt * polyline_velocity(c, a)
    _check_step(p, c.diameter)
    return PolylineCurve(p, validate=False)


def step_polyline(c, a, dt):
    """One explicit Euler step of the polygon scheme; output fully validated."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt == 0:
        return c
    new = _polyline_step(c, a, dt)
    try:
        return PolylineCurve(new.vertices)
    except CurveError as exc:
        raise FlowStepError(str(exc)) from None


# -- support-function scheme ------------------------------------------------

def support_dt(h, a, cfl):
    dtheta = 2.0 * math.pi / h.field.size
    return cfl * dtheta ** 2 * float((h.radius ** 2 / a.on_grid(h.field.size)[2]).min())


def step_support(h, a, dt):
    """One explicit Euler step of ``h_t = -psi / (h + h'')``."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt == 0:
        return h
    new = h.h - dt * a.on_grid(h.field.size)[2] / h.radius
    try:
        return ConvexSupportCurve(new)
    except CurveError as exc:
        raise FlowStepError(f"convexity lost: {exc}") from None


def support_diagnostics(h, a):
    """``(A, P_F, kF)`` of a convex curve from its support function."""
    r = h.radius
    phi, hess, _ = a.on_grid(h.field.size)
    kF = hess / r
    return h.area, float(trapezoid_periodic(phi * r)), kF


# -- driver -----------------------------------------------------------------

class _State:
    def __init__(self, curve):
        self.curve = curve
        self.scheme = "support" if isinstance(curve, ConvexSupportCurve) else "polyline"
        self.segment = 0

    def polyline(self):
        if self.scheme == "support":
            return PolylineCurve(self.curve.points())
        return self.curve

    def area(self):
        return self.curve.area


def _record(trace, state, a, t, step):
    if state.scheme == "support":
        A, P_F, kF = support_diagnostics(state.curve, a)
        convex = True
        # strictly convex by construction (h + h'' > 0)
        snap = PolylineCurve(state.curve.points(), validate=False)
    else:
        snap = state.curve
        g = geometry(snap, a)
        A, P_F, kF = g.A, g.P_F, g.kF
        convex = is_convex(snap)
    kmax = float(np.abs(kF).max())
    f = math.sqrt(trace.A0 / A)
    trace.samples.append(FlowSample(
        t=t, A=A, P_F=P_F, kF_max=kmax, kF_min=float(kF.min()), convex=convex,
        f=f, kF_U_max=kmax / f, scheme=state.scheme, step=step,
        segment=state.segment))
    trace.snapshots.append((t, snap))


def run_flow(c0, a, cfg=None):
    """Evolve ``c0`` by anisotropic curvature flow and sample diagnostics.

    Parameters
    ----------
    c0 : PolylineCurve or ConvexSupportCurve
    a : Anisotropy
    cfg : FlowConfig, optional

    Returns
    -------
    FlowTrace
        ``stop_reason`` is one of ``"area_fraction"``, ``"t_end"``,
        ``"step_failure"``, ``"self_intersection"``, ``"max_steps"``.
    """
    cfg = cfg or FlowConfig()
    if isinstance(c0, PolylineCurve):
        c0 = PolylineCurve(c0.vertices)  # full validation of the initial curve
        if cfg.M is not None and cfg.M != len(c0):
            c0 = resample(c0, cfg.M, cfg.resample_method)
        if cfg.scheme == "support":
            c0 = ConvexSupportCurve.from_polyline(c0, preserve_area=True)
    elif not isinstance(c0, ConvexSupportCurve):
        raise TypeError("c0 must be a PolylineCurve or ConvexSupportCurve")
    elif cfg.scheme == "polyline":
        c0 = PolylineCurve(c0.points())

    state = _State(c0)
    trace = FlowTrace(anisotropy=a, A0=state.area())
    t, step = 0.0, 0
    convex_run = []
    _record(trace, state, a, t, step)

    def note_convexity():
        s = trace.samples[-1]
        if trace.first_convex_time is not None:
            return
        if s.convex:
            convex_run.append(s.t)
        else:
            convex_run.clear()
        if state.scheme == "support" or len(convex_run) >= cfg.convex_samples:
            trace.first_convex_time = convex_run[0] if convex_run else s.t

    note_convexity()
    stop_area = cfg.area_stop_fraction * trace.A0

    while True:
        if cfg.t_end is not None and t >= cfg.t_end:
            trace.stop_reason = "t_end"
            break
        if step >= cfg.max_steps:
            trace.stop_reason = "max_steps"
            break
        if state.scheme == "support":
            dt = support_dt(state.curve, a, cfg.cfl)
        else:
            dt = polyline_dt(state.curve, a, cfg.cfl)
        dt = min(dt, cfg.dt_max)
        if cfg.t_end is not None:
            dt = min(dt, cfg.t_end - t)
        new = None
        for _ in range(cfg.max_halvings + 1):
            try:
                if state.scheme == "support":
                    new = step_support(state.curve, a, dt)
                else:
                    new = _polyline_step(state.curve, a, dt)
                break
            except (FlowStepError, CurveError) as exc:
                log.debug("step rejected at t=%g (dt=%g): %s", t, dt, exc)
                dt *= 0.5
        if new is None:
            trace.stop_reason = "step_failure"
            break
        state.curve = new
        t += dt
        step += 1

        if state.scheme == "polyline":
            ell = new.edge_lengths
            if ell.max() > cfg.resample_threshold * ell.min():
                state.curve = resample(new, len(new), cfg.resample_method)
                state.segment += 1

        done = state.area() <= stop_area
        if step % cfg.snapshot_stride == 0 or done:
            if state.scheme == "polyline" and not is_simple(state.curve):
                trace.stop_reason = "self_intersection"
                break
            _record(trace, state, a, t, step)
            note_convexity()
            if (cfg.scheme == "auto" and state.scheme == "polyline"
                    and trace.first_convex_time is not None and not done):
                try:
                    segment = state.segment + 1
                    state = _State(ConvexSupportCurve.from_polyline(
                        state.curve, preserve_area=True))
                    state.segment = segment
                except CurveError as exc:
                    log.debug("support handoff postponed: %s", exc)
        if done:
            trace.stop_reason = "area_fraction"
            break
    if trace.samples[-1].t != t and trace.stop_reason in ("t_end", "max_steps"):
        _record(trace, state, a, t, step)
    return trace


# -- monitors ---------------------------------------------------------------

def _central_derivative(t, y):
    """Second-order centred derivative at interior points of a nonuniform series."""
    h1 = t[1:-1] - t[:-2]
    h2 = t[2:] - t[1:-1]
    return (h1 ** 2 * (y[2:] - y[1:-1]) + h2 ** 2 * (y[1:-1] - y[:-2])) / (h1 * h2 * (h1 + h2))


def _same_segment_interior(trace):
    # segments change at every resample or change of representation
    seg = [s.segment for s in trace.samples]
    return np.array([seg[i - 1] == seg[i] == seg[i + 1] for i in range(1, len(seg) - 1)],
                    dtype=bool)


def area_rate_quadrature(trace):
    """``-sum F(nu) kF ds`` on every snapshot."""
    a = trace.anisotropy
    out = []
    for _, c in trace.snapshots:
        g = geometry(c, a)
        out.append(-float((g.F_nu * g.kF * g.ds).sum()))
    return np.array(out)


def check_area_derivative(trace, tolerance=0.02):
    """Centred differences of ``A(t)`` against ``-int F(nu) kF ds``.

    Only stencils whose three samples share a segment are used, so a
    resample or a change of representation does not register as an area
    jump.
    """
    if len(trace.samples) < 3:
        raise ValueError("area-derivative check needs at least 3 samples")
    t, A = trace.t, trace.A
    fd = _central_derivative(t, A)
    quad = area_rate_quadrature(trace)[1:-1]
    keep = _same_segment_interior(trace)
    if not keep.any():
        raise ValueError("no interior samples within one segment")
    rel = np.abs(fd[keep] - quad[keep]) / np.abs(quad[keep])
    worst = int(np.argmax(rel))
    return InequalityReport.residual(
        "area_derivative", float(rel[worst]), tolerance,
        n_points=int(keep.sum()), worst_t=float(t[1:-1][keep][worst]),
        fd_rate=float(fd[keep][worst]), quadrature_rate=float(quad[keep][worst]),
    )


def max_curvature_ratios(trace):
    """``(t, d/dt kF_max^2 / (2 kF_max^4))`` at interior samples within one segment."""
    t = trace.t
    k = trace.column("kF_max")
    d = _central_derivative(t, k ** 2)
    ratio = d / (2.0 * k[1:-1] ** 4)
    keep = _same_segment_interior(trace)
    return t[1:-1][keep], ratio[keep]


def check_max_curvature_monitor(trace, tolerance=0.05):
    """At the curvature maximum the flow gives ``d/dt kF_max^2 <= 2 kF_max^4``.

    Reported as ``lhs = 1`` against the worst observed ratio, with the
    ratio allowed to exceed 1 by ``tolerance``.
    """
    if len(trace.samples) < 3:
        raise ValueError("max-curvature monitor needs at least 3 samples")
    t, ratio = max_curvature_ratios(trace)
    if ratio.size == 0:
        raise ValueError("no interior samples within one segment")
    worst = int(np.argmax(ratio))
    return InequalityReport.build(
        "max_curvature_monitor", 1.0, float(ratio[worst]), tolerance,
        worst_t=float(t[worst]), min_ratio=float(ratio.min()), n_points=int(ratio.size),
    )


def normalized_monitor(trace, rel_tol=1e-2):
    """Normalized maximal curvature at the first convex sample vs ``sqrt(kappa/A0)``."""
    if not trace.samples:
        raise ValueError("empty trace")
    rhs = math.sqrt(trace.kappa / trace.A0)
    kU = trace.column("kF_U_max")
    ctx = {"max_kF_U": float(kU.max()), "min_kF_U": float(kU.min())}
    if trace.first_convex_time is None:
        return InequalityReport(
            name="normalized_curvature", lhs=float("nan"), rhs=rhs, margin=float("nan"),
            relative_margin=float("nan"), tolerance=rel_tol * rhs, passed=False,
            context={**ctx, "reason": "no convex sample"})
    i = int(np.argmin(np.abs(trace.t - trace.first_convex_time)))
    return InequalityReport.build("normalized_curvature", float(kU[i]), rhs, rel_tol * rhs,
                                  t=float(trace.t[i]), **ctx)
