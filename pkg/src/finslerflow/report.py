"""Pass/fail records for a single inequality or identity instance."""

from __future__ import annotations

from dataclasses import dataclass, field

_EPS = 1e-300


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of checking ``lhs >= rhs`` up to ``tolerance``.

    ``margin`` is ``lhs - rhs`` and the check passes iff
    ``margin >= -tolerance``. Identity residuals are stored with
    ``lhs = 0`` and ``rhs = residual`` so the same rule applies.
    """

    name: str
    lhs: float
    rhs: float
    margin: float
    relative_margin: float
    tolerance: float
    passed: bool
    context: dict = field(default_factory=dict)

    @classmethod
    def build(cls, name, lhs, rhs, tolerance=0.0, **context):
        lhs = float(lhs)
        rhs = float(rhs)
        margin = lhs - rhs
        return cls(
            name=name,
            lhs=lhs,
            rhs=rhs,
            margin=margin,
            relative_margin=margin / max(abs(rhs), _EPS),
            tolerance=float(tolerance),
            passed=bool(margin >= -tolerance),
            context=context,
        )

    @classmethod
    def residual(cls, name, residual, tolerance, **context):
        return cls.build(name, 0.0, residual, tolerance, **context)

    def as_dict(self):
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "relative_margin": self.relative_margin,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "context": {k: v for k, v in self.context.items() if _jsonable(v)},
        }

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: lhs={self.lhs:.10g} rhs={self.rhs:.10g} "
                f"margin={self.margin:.3e} tol={self.tolerance:.3e}")


def _jsonable(v):
    return isinstance(v, (int, float, str, bool, type(None), list, tuple))
