"""Result containers shared by the sweep engine and the analysis helpers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["BoundaryPoint", "SweepResult", "DigitsStats"]


@dataclass(frozen=True, slots=True)
class BoundaryPoint:
    """One computed boundary point of the field of values.

    ``value`` is the quadratic form ``x* A x`` at angle ``t``; ``lam`` is the
    extreme eigenvalue estimate of the flow there; ``digits`` (when present)
    counts the accurate decimal digits against an oracle point.
    """

    t: float
    value: complex
    lam: float
    digits: float | None = None


@dataclass
class SweepResult:
    """Columnar record of one boundary sweep.

    Arrays are aligned with the angle grid ``t``; the first
    ``startup_count`` entries come from direct eigensolves, the rest from
    the predictive recurrence.  ``digits`` is filled by
    :func:`znnfov.analysis.compare_sweeps`.
    """

    t: np.ndarray
    values: np.ndarray
    lambdas: np.ndarray
    residuals: np.ndarray
    norm_defects: np.ndarray
    scheme_name: str
    params: "ZnnParams"  # noqa: F821 - engine import would be circular
    which: str
    startup_count: int
    step_failures: list = field(default_factory=list)
    suspect_steps: list = field(default_factory=list)
    wall_time: float = 0.0
    digits: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.t)

    @property
    def points(self) -> list:
        """Materialize the sweep as a list of :class:`BoundaryPoint`."""
        digits = self.digits if self.digits is not None else [None] * len(self.t)
        return [
            BoundaryPoint(t=float(t), value=complex(v), lam=float(l), digits=d)
            for t, v, l, d in zip(self.t, self.values, self.lambdas.real, digits)
        ]


@dataclass(frozen=True)
class DigitsStats:
    """Accurate-digit statistics of a sweep against an oracle, aggregated
    over the predictive (post-startup) points."""

    mean: float
    min: float
    max: float
    per_point: np.ndarray
