"""Survival estimation as the fixed point of an expectation/maximization loop.

The estimator maximizes a quadratic score that rewards a candidate curve
for tracking each subject's indicator survival path, integrated against a
finite atomic measure.  A censored subject's score is truncated at its
exit time; the loop fills in the missing tail by redistributing that
subject's mass along the current curve's conditional tail ratios, then
takes the pointwise maximizer, which has the closed form

    new(x) = (1/n) * sum_k [ events_k * 1{t_k > x}
                             + censored_k * prev(max(x, t_k)) / prev(t_k) ]

over the distinct observed times ``t_k``.  Each pass can only raise the
observed-data score, and the iteration converges to the product-limit
curve; both facts are enforced as runtime-checkable invariants by the
test suite rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import Observation, RiskTable, StepFunction, build_risk_table, eval_step

__all__ = [
    "UNIFORM_ON_TIMES",
    "MeasureSpec",
    "EmTrace",
    "m_tilde",
    "em_update",
    "em_fit",
    "e_step_objective",
]

UNIFORM_ON_TIMES = "discrete-uniform-on-observed-times"


@dataclass(frozen=True, eq=False)
class MeasureSpec:
    """Finite atomic integration measure; every atom carries equal mass."""

    support: np.ndarray
    kind: str = UNIFORM_ON_TIMES

    def __post_init__(self):
        support = np.asarray(self.support, dtype=float)
        if support.size == 0:
            raise ValueError("measure support must be nonempty")
        if np.any(support <= 0) or not np.all(np.isfinite(support)):
            raise ValueError("measure atoms must be positive and finite")
        if np.any(np.diff(support) <= 0):
            raise ValueError("measure atoms must be strictly increasing")
        if self.kind != UNIFORM_ON_TIMES:
            raise ValueError(f"unknown measure kind: {self.kind!r}")
        support.setflags(write=False)
        object.__setattr__(self, "support", support)

    @classmethod
    def uniform_on(cls, times) -> "MeasureSpec":
        return cls(np.asarray(times, dtype=float))


@dataclass(frozen=True)
class EmTrace:
    """Iteration diagnostics: the score path and the stopping state."""

    iterations: int
    objective_path: np.ndarray
    final_sup_change: float
    converged: bool


def m_tilde(S: StepFunction, data: Iterable[Observation], mu: MeasureSpec) -> float:
    """Average quadratic score of curve ``S`` against the observed sample.

    An event record at time ``X`` scores ``-1{X>x} + 2 S(x) 1{X>x} - S(x)^2``
    over every atom ``x``; a censored record scores only atoms strictly
    before ``X`` (where its survival indicator is still 1).
    """
    obs = list(data)
    if not obs:
        raise ValueError("no observations")
    atoms = mu.support
    s = eval_step(S, atoms)
    a = 2.0 * s - 1.0
    prefix_a = np.concatenate(([0.0], np.cumsum(a)))
    prefix_ab = np.concatenate(([0.0], np.cumsum(a - s * s)))
    total_sq = float(np.sum(s * s))
    x = np.array([o.time for o in obs], dtype=float)
    e = np.array([o.event for o in obs], dtype=bool)
    below = np.searchsorted(atoms, x, side="left")  # atoms strictly < X
    contrib = np.where(e, prefix_a[below] - total_sq, prefix_ab[below])
    return float(contrib.sum() / (len(obs) * atoms.size))


def em_update(S_prev: StepFunction, rt: RiskTable) -> StepFunction:
    """One redistribution pass, evaluated on the table's distinct times.

    Raises when the current curve vanishes at a time that still carries
    censored mass, since the tail ratio there is undefined.  The pilot
    curve used by :func:`em_fit` keeps every iterate strictly positive at
    censored times, so the error is unreachable on that path.
    """
    v = eval_step(S_prev, rt.times)
    censored = rt.tie_count - rt.event_count
    if np.any((censored > 0) & (v <= 0.0)):
        raise ValueError("EM ratio undefined: curve vanishes at a censored time")
    ratio = np.where(censored > 0, censored / np.where(v > 0, v, 1.0), 0.0)
    prefix_ratio = np.cumsum(ratio)  # sum_{k<=j} censored_k / prev(t_k)
    ev_sum = np.cumsum(rt.event_count)
    suffix_events = rt.event_count.sum() - ev_sum  # sum_{k>j} events_k
    suffix_censored = censored.sum() - np.cumsum(censored)
    new = (suffix_events + v * prefix_ratio + suffix_censored) / rt.total
    return StepFunction(rt.times, np.clip(new, 0.0, 1.0))


def em_fit(
    data: Iterable[Observation],
    tol: float = 1e-10,
    max_iter: int = 10000,
    mu: MeasureSpec | None = None,
) -> tuple[StepFunction, EmTrace]:
    """Iterate :func:`em_update` from a strictly positive pilot curve.

    The pilot is ``(#{X_i > x} + 1) / (n + 1)``: nonincreasing,
    right-continuous, 1 at 0, flat beyond the last observed time, and
    positive everywhere, so no tail ratio can divide by zero.  Stops when
    the sup-norm change over the knots drops below ``tol`` or after
    ``max_iter`` passes (returning the best iterate, ``converged=False``).

    ``mu`` only weights the recorded score path; the update itself is a
    pointwise maximizer and does not depend on it.  Defaults to the
    uniform atomic measure on the distinct observed times.
    """
    obs = list(data)
    rt = build_risk_table(obs)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if mu is None:
        mu = MeasureSpec.uniform_on(rt.times)
    pilot = (rt.at_risk - rt.tie_count + 1) / (rt.total + 1)
    curve = StepFunction(rt.times, pilot)
    objectives = [m_tilde(curve, obs, mu)]
    sup_change = np.inf
    converged = False
    for _ in range(max_iter):
        new = em_update(curve, rt)
        sup_change = float(np.max(np.abs(new.values - curve.values)))
        objectives.append(m_tilde(new, obs, mu))
        curve = new
        if sup_change < tol:
            converged = True
            break
    trace = EmTrace(
        iterations=len(objectives) - 1,
        objective_path=np.array(objectives),
        final_sup_change=sup_change,
        converged=converged,
    )
    return curve, trace


def e_step_objective(
    S: StepFunction, S_g: StepFunction, rt: RiskTable, mu: MeasureSpec
) -> float:
    """Expected score of ``S`` with censored tails filled in from ``S_g``.

    Test-side companion to :func:`em_update`: maximizing this over ``S``
    must return the update's output, and its gap over the observed-data
    score must peak at ``S = S_g``.
    """
    atoms = mu.support
    s = eval_step(S, atoms)
    v_g = eval_step(S_g, rt.times)
    censored = rt.tie_count - rt.event_count
    if np.any((censored > 0) & (v_g <= 0.0)):
        raise ValueError("EM ratio undefined: curve vanishes at a censored time")
    total = 0.0
    for k in range(len(rt)):
        ind = (rt.times[k] > atoms).astype(float)
        if rt.event_count[k]:
            total += rt.event_count[k] * float(np.sum(-ind + 2.0 * s * ind - s * s))
        if censored[k]:
            r = eval_step(S_g, np.maximum(atoms, rt.times[k])) / v_g[k]
            total += censored[k] * float(np.sum(-r + 2.0 * s * r - s * s))
    return total / (rt.total * atoms.size)
