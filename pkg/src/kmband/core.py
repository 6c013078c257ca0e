"""Core types for right-censored time-to-event samples.

An :class:`Observation` is one subject's record: the observed time and a
flag saying whether the event itself was seen (``event=False`` means the
subject left observation first, so the event time is only known to exceed
the observed time).  A :class:`RiskTable` aggregates a sample into the
distinct observed times with tie, event and at-risk counts, and a
:class:`StepFunction` is a right-continuous, nonincreasing survival curve
equal to 1 at time zero.

All types are immutable after construction and every operation here is
pure, so values can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = [
    "Observation",
    "RiskTable",
    "StepFunction",
    "build_risk_table",
    "eval_step",
    "step_lookup",
]

# Slack for float noise when validating monotonicity / unit-interval bounds.
_SHAPE_TOL = 1e-12


@dataclass(frozen=True)
class Observation:
    """One subject: observed time and whether the event was seen."""

    time: float
    event: bool

    def __post_init__(self):
        t = float(self.time)
        if not math.isfinite(t) or t <= 0.0:
            raise ValueError(f"invalid time: {self.time!r}")
        object.__setattr__(self, "time", t)
        object.__setattr__(self, "event", bool(self.event))


@dataclass(frozen=True, eq=False)
class RiskTable:
    """Distinct observed times with tie, event and at-risk counts.

    ``times`` lists every distinct observed time (event or censored),
    strictly increasing.  ``tie_count[k]`` is the number of subjects
    observed exactly at ``times[k]``, ``event_count[k]`` how many of those
    were events, and ``at_risk[k]`` the number of subjects still under
    observation at ``times[k]`` (observed time >= ``times[k]``).
    """

    times: np.ndarray
    tie_count: np.ndarray
    event_count: np.ndarray
    at_risk: np.ndarray
    total: int

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        tie = np.asarray(self.tie_count, dtype=np.int64)
        events = np.asarray(self.event_count, dtype=np.int64)
        at_risk = np.asarray(self.at_risk, dtype=np.int64)
        k = times.size
        if k == 0:
            raise ValueError("no observations")
        if not (tie.size == events.size == at_risk.size == k):
            raise ValueError("risk table columns must share one length")
        if np.any(times <= 0) or not np.all(np.isfinite(times)):
            raise ValueError("invalid time")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(tie < 1):
            raise ValueError("tie counts must be positive")
        if np.any(events < 0) or np.any(events > tie):
            raise ValueError("event counts must lie in [0, tie count]")
        if self.total != int(tie.sum()) or at_risk[0] != self.total:
            raise ValueError("at-risk head must equal the sample size")
        if np.any(at_risk[1:] != at_risk[:-1] - tie[:-1]):
            raise ValueError("at-risk counts must telescope by tie counts")
        for arr in (times, tie, events, at_risk):
            arr.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "tie_count", tie)
        object.__setattr__(self, "event_count", events)
        object.__setattr__(self, "at_risk", at_risk)
        object.__setattr__(self, "total", int(self.total))

    def __len__(self) -> int:
        return int(self.times.size)


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Right-continuous nonincreasing step curve, 1 left of its first knot.

    The value is 1 on ``[0, knots[0])``, ``values[k]`` on
    ``[knots[k], knots[k+1])`` and ``values[-1]`` from the last knot on.
    """

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if knots.size == 0 or knots.size != values.size:
            raise ValueError("knots and values must be nonempty and equal length")
        if np.any(knots <= 0) or not np.all(np.isfinite(knots)):
            raise ValueError("knots must be positive and finite")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        if np.any(values < -_SHAPE_TOL) or np.any(values > 1.0 + _SHAPE_TOL):
            raise ValueError("values must lie in [0, 1]")
        if np.any(np.diff(values) > _SHAPE_TOL):
            raise ValueError("values must be nonincreasing")
        values = np.clip(values, 0.0, 1.0)
        knots.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)

    def __call__(self, x):
        return eval_step(self, x)

    def __len__(self) -> int:
        return int(self.knots.size)


def build_risk_table(data: Iterable[Observation]) -> RiskTable:
    """Aggregate observations into a :class:`RiskTable`.

    Every distinct observed time contributes a row, whether the subjects
    there were events, censored, or a mixture.  Ties are grouped by exact
    float equality; timestamps are expected to arrive already discretized.
    """
    obs = list(data)
    if not obs:
        raise ValueError("no observations")
    t = np.array([o.time for o in obs], dtype=float)
    e = np.array([o.event for o in obs], dtype=bool)
    if np.any(t <= 0) or not np.all(np.isfinite(t)):
        raise ValueError("invalid time")
    times, inverse, tie = np.unique(t, return_inverse=True, return_counts=True)
    events = np.zeros(times.size, dtype=np.int64)
    np.add.at(events, inverse, e)
    at_risk = tie[::-1].cumsum()[::-1]
    return RiskTable(times, tie, events, at_risk, int(t.size))


def step_lookup(knots, values, x, before: float):
    """Value at ``x`` of the right-continuous step function given by
    parallel ``knots``/``values`` arrays; ``before`` applies left of the
    first knot.  Accepts a scalar or an array of evaluation points.
    """
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0):
        raise ValueError("evaluation point must be nonnegative")
    idx = np.searchsorted(knots, xs, side="right") - 1
    vals = np.asarray(values)
    out = np.where(idx < 0, before, vals[np.maximum(idx, 0)])
    if xs.ndim == 0:
        return float(out)
    return out


def eval_step(f: StepFunction, x):
    """Evaluate a survival step function; equals 1 before the first knot."""
    return step_lookup(f.knots, f.values, x, before=1.0)
