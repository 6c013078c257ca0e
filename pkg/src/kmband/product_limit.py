"""Product-limit estimation of the survival curve.

Alongside the curve itself this module computes, per knot, the estimated
variance of ``sqrt(n) * (log S_hat - log S0)`` as a cumulative sum over
event times, and its variance-stabilizing transform ``H = A / (1 + A)``
mapping the observation window into [0, 1).  Both feed the confidence
machinery in :mod:`kmband.inference`.

The variance sum uses ``n * events_k / (R_k * (R_k - ties_k))`` where
``R_k`` is the at-risk count.  The trailing factor subtracts *all* ties at
the knot, censored ones included; for tie-free data this coincides with
the classical Greenwood log-scale sum.  An event knot that exhausts the
remaining risk set makes the sum infinite from that knot on: ``+inf`` is a
propagated sentinel, not an error, and downstream intervals there are
undefined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import Observation, RiskTable, StepFunction, build_risk_table, step_lookup

__all__ = ["FitResult", "km_estimate", "log_variance_at", "h_hat_at", "fit"]


@dataclass(frozen=True, eq=False)
class FitResult:
    """Fitted curve plus per-knot log-scale variance and H values."""

    curve: StepFunction
    log_variance: np.ndarray
    h_hat: np.ndarray
    n: int

    def __post_init__(self):
        lv = np.asarray(self.log_variance, dtype=float)
        h = np.asarray(self.h_hat, dtype=float)
        if lv.size != len(self.curve) or h.size != len(self.curve):
            raise ValueError("per-knot columns must match the curve length")
        if np.any(lv < 0) or np.any(np.diff(lv) < 0):
            raise ValueError("log_variance must be nonnegative and nondecreasing")
        if np.any(h < 0) or np.any(h > 1):
            raise ValueError("h_hat must lie in [0, 1]")
        lv.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "log_variance", lv)
        object.__setattr__(self, "h_hat", h)
        object.__setattr__(self, "n", int(self.n))

    @property
    def knots(self) -> np.ndarray:
        return self.curve.knots

    def survival_at(self, x) -> float:
        return self.curve(x)

    def variance_at(self, x) -> float:
        """Cumulative log-scale variance at time ``x`` (0 before the first knot)."""
        return step_lookup(self.knots, self.log_variance, x, before=0.0)

    def h_at(self, x) -> float:
        """Variance-stabilizing transform at time ``x`` (0 before the first knot)."""
        return step_lookup(self.knots, self.h_hat, x, before=0.0)


def km_estimate(rt: RiskTable) -> StepFunction:
    """Product-limit curve on the table's distinct times.

    Each knot multiplies the running survival by ``1 - events/at_risk``;
    censored-only knots leave the value unchanged.
    """
    factors = 1.0 - rt.event_count / rt.at_risk
    return StepFunction(rt.times, np.cumprod(factors))


def _variance_terms(rt: RiskTable) -> np.ndarray:
    trailing = rt.at_risk - rt.tie_count
    terms = np.zeros(len(rt))
    ev = rt.event_count > 0
    ok = ev & (trailing > 0)
    terms[ok] = rt.total * rt.event_count[ok] / (rt.at_risk[ok] * trailing[ok])
    terms[ev & (trailing == 0)] = np.inf
    return terms


def log_variance_at(rt: RiskTable, k: int) -> float:
    """Estimated variance of ``sqrt(n)(log S_hat - log S0)`` through knot ``k``.

    Returns ``+inf`` when some event knot at or before ``k`` leaves an
    empty trailing risk set.
    """
    if not 0 <= k < len(rt):
        raise IndexError(f"knot index out of range: {k}")
    return float(np.sum(_variance_terms(rt)[: k + 1]))


def h_hat_at(rt: RiskTable, k: int) -> float:
    """Cumulative variance mapped onto [0, 1] via ``a / (1 + a)``; 1 at +inf."""
    a = log_variance_at(rt, k)
    if math.isinf(a):
        return 1.0
    return a / (1.0 + a)


def fit(data: Iterable[Observation]) -> FitResult:
    """Convenience composition: risk table, curve, variance and H per knot."""
    rt = build_risk_table(data)
    curve = km_estimate(rt)
    lv = np.cumsum(_variance_terms(rt))
    with np.errstate(invalid="ignore"):
        h = np.where(np.isinf(lv), 1.0, lv / (1.0 + lv))
    return FitResult(curve, lv, h, rt.total)
