"""Time-dependent coefficients ``e^{phi_t}`` (kinetic) and ``e^{chi_t}`` (potential)."""

from __future__ import annotations

import bisect
from dataclasses import dataclass

__all__ = ["Schedule", "SmoothLog", "PiecewiseLinear", "ConstantSchedule"]


class Schedule:
    T: float

    def coefficients(self, t: float) -> tuple[float, float]:
        """Return ``(e^{phi_t}, e^{chi_t})``."""
        raise NotImplementedError

    def breakpoints(self, count: int = 11) -> list[tuple[float, float, float]]:
        """Sample the schedule as ``(t, kinetic, potential)`` triples."""
        ts = [self.T * k / (count - 1) for k in range(count)]
        return [(t, *self.coefficients(t)) for t in ts]

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class SmoothLog(Schedule):
    """``phi_t = -log(1 + gamma t^2)``, ``chi_t = log(1 + gamma t^2)``."""

    gamma: float = 1.0
    T: float = 10.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.T > 0:
            raise ValueError("total time must be positive")

    def coefficients(self, t: float) -> tuple[float, float]:
        s = 1.0 + self.gamma * t * t
        return 1.0 / s, s

    def to_dict(self) -> dict:
        return {"kind": "smooth-log", "gamma": self.gamma, "T": self.T}


@dataclass(frozen=True)
class PiecewiseLinear(Schedule):
    """Linear interpolation of ``(t, e^{phi}, e^{chi})`` breakpoints.

    The coefficient values themselves are interpolated, as annealer
    schedules are.
    """

    points: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        pts = tuple(tuple(float(v) for v in p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ValueError("need at least two breakpoints")
        if pts[0][0] != 0.0:
            raise ValueError("breakpoints must start at t = 0")
        ts = [p[0] for p in pts]
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise ValueError("breakpoint times must be nondecreasing")
        if any(p[1] <= 0 or p[2] <= 0 for p in pts):
            raise ValueError("schedule coefficients must be positive")

    @property
    def T(self) -> float:
        return self.points[-1][0]

    def coefficients(self, t: float) -> tuple[float, float]:
        pts = self.points
        if t <= pts[0][0]:
            return pts[0][1], pts[0][2]
        if t >= pts[-1][0]:
            return pts[-1][1], pts[-1][2]
        j = bisect.bisect_right([p[0] for p in pts], t)
        t0, a0, b0 = pts[j - 1]
        t1, a1, b1 = pts[j]
        w = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
        return a0 + w * (a1 - a0), b0 + w * (b1 - b0)

    def breakpoints(self, count: int = 0) -> list[tuple[float, float, float]]:
        return [tuple(p) for p in self.points]

    def to_dict(self) -> dict:
        return {"kind": "piecewise-linear", "points": [list(p) for p in self.points]}

    @classmethod
    def sampled(cls, schedule: Schedule, count: int = 11) -> "PiecewiseLinear":
        return cls(tuple(schedule.breakpoints(count)))


@dataclass(frozen=True)
class ConstantSchedule(Schedule):
    """Fixed coefficients; zero is allowed, which isolates one term group."""

    kinetic: float = 1.0
    potential: float = 1.0
    T: float = 1.0

    def coefficients(self, t: float) -> tuple[float, float]:
        return self.kinetic, self.potential

    def to_dict(self) -> dict:
        return {
            "kind": "constant",
            "kinetic": self.kinetic,
            "potential": self.potential,
            "T": self.T,
        }


def schedule_from_dict(doc: dict) -> Schedule:
    kind = doc["kind"]
    if kind == "smooth-log":
        return SmoothLog(doc["gamma"], doc["T"])
    if kind == "piecewise-linear":
        return PiecewiseLinear(tuple(tuple(p) for p in doc["points"]))
    if kind == "constant":
        return ConstantSchedule(doc["kinetic"], doc["potential"], doc["T"])
    raise ValueError(f"unknown schedule kind {kind!r}")
