"""Verdict record for checked inequalities."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class InequalityVerdict:
    """One checked inequality: lhs <= rhs up to a tolerance.

    ``slack = rhs - lhs`` and ``passed`` is equivalent to
    ``slack >= -tolerance``.  ``context`` carries the parameters the check
    was run with (epsilon, t, start, ...).
    """

    name: str
    lhs: float
    rhs: float
    tolerance: float
    context: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.slack >= -self.tolerance

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: lhs={self.lhs:.6g} rhs={self.rhs:.6g} "
                f"slack={self.slack:.3g}")


def make_verdict(name, lhs, rhs, tolerance, **context) -> InequalityVerdict:
    return InequalityVerdict(name=name, lhs=float(lhs), rhs=float(rhs),
                             tolerance=float(tolerance), context=context)
