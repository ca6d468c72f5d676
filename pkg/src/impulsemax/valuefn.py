"""Value functions, the restart operator and their self-audits.

In the threshold regime the value is v(x) = g(x) + chat above the trigger
and the one-cycle expectation E_x[(f + chat)(M); M >= xstar] below it.  The
degenerate regime is the trigger-at-zero limit v = g - f(0+).  Audits
recompute everything from the law rather than trusting the solver output.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import AuditFailed, InfiniteValueRegime, InvalidParameter
from .maxlaw import (
    DiffusionFactorized,
    ExponentialTail,
    ReflectedBMMax,
    restricted_expectation,
    tail_prob,
)
from .represent import RepresentingFunction
from .solve import REGIME_DEGENERATE, REGIME_THRESHOLD

# drivers that cannot jump over a level: first passage lands exactly on it
_CREEPING = (ExponentialTail, ReflectedBMMax, DiffusionFactorized)


@dataclass(frozen=True)
class ValueFunction:
    """Optimal value v together with the data needed to evaluate it."""

    regime: str
    law: object
    f: RepresentingFunction
    g: Callable[[float], float]
    chat: Optional[float] = None
    xstar: Optional[float] = None

    def __post_init__(self):
        if self.regime == REGIME_THRESHOLD and (self.chat is None
                                                or self.xstar is None):
            raise InvalidParameter("threshold regime needs chat and xstar")
        if self.regime == REGIME_DEGENERATE:
            lim = self.f.limit_at_zero
            if lim is None or not math.isfinite(lim):
                raise InvalidParameter("degenerate regime needs finite f(0+)")

    @property
    def shift(self):
        """Additive constant carried across restarts: chat, or -f(0+)."""
        if self.regime == REGIME_THRESHOLD:
            return float(self.chat)
        if self.regime == REGIME_DEGENERATE:
            return -float(self.f.limit_at_zero)
        raise InfiniteValueRegime("the value is infinite; nothing to evaluate")

    @property
    def threshold(self):
        if self.regime == REGIME_THRESHOLD:
            return float(self.xstar)
        if self.regime == REGIME_DEGENERATE:
            return 0.0
        raise InfiniteValueRegime("the value is infinite; nothing to evaluate")

    def evaluate(self, x):
        x = float(x)
        t = self.threshold
        if x >= t:
            return float(self.g(x)) + self.shift
        return restricted_expectation(self.law, x, self.f.shifted(self.shift),
                                      t)

    def value_at_zero(self):
        # recomputed from the formula, not read off chat: audits stay honest
        cached = getattr(self, "_v0", None)
        if cached is None:
            cached = self.evaluate(0.0)
            object.__setattr__(self, "_v0", cached)
        return cached

    def intervention_operator(self, x):
        """Best immediate restart: Mv(x) = g(x) + v(0) for x >= 0.

        Restarting from below zero is inadmissible, so Mv = -inf there.
        """
        x = float(x)
        if x < 0.0:
            return -math.inf
        return float(self.g(x)) + self.value_at_zero()

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0:
            return self.evaluate(float(arr))
        flat = np.array([self.evaluate(float(t)) for t in arr.ravel()])
        return flat.reshape(arr.shape)


def value_with_threshold(vf, threshold, x):
    """One-cycle functional with the solved shift but a moved trigger.

    Keeps f + chat fixed and slides only the indicator, which is the object
    whose one-sided derivatives split apart away from the optimizer.
    """
    if vf.regime != REGIME_THRESHOLD:
        raise InvalidParameter("threshold probes need the threshold regime")
    t = float(threshold)
    if t < 0.0:
        raise InvalidParameter("threshold must be nonnegative")
    x = float(x)
    if x >= t:
        return float(vf.g(x)) + vf.chat
    return restricted_expectation(vf.law, x, vf.f.shifted(vf.chat), t)


def _one_sided_derivative(w, t, h, sign):
    # second-order stencil into the half-line, one Richardson round
    def d(step):
        return sign * (3.0 * w(t) - 4.0 * w(t - sign * step)
                       + w(t - 2.0 * sign * step)) / (2.0 * step)

    return (4.0 * d(h / 2.0) - d(h)) / 3.0


def smooth_fit_gap(vf, h=1e-4, threshold=None):
    """|d/dx from the left - d/dx from the right| at the trigger.

    Near zero at the solved threshold; of the order of the displacement at
    a perturbed one.
    """
    t = vf.threshold if threshold is None else float(threshold)
    if h <= 0.0 or t - 2.0 * h <= 0.0:
        raise InvalidParameter("need 0 < 2h < threshold")

    def w(x):
        return value_with_threshold(vf, t, x)

    left = _one_sided_derivative(w, t, h, +1.0)
    right = _one_sided_derivative(w, t, h, -1.0)
    return abs(left - right)


def verification_audit(vf, grid, tol=1e-8):
    """Grid audit of the optimality system; raises AuditFailed on violation.

    Checks v >= 0 and v >= Mv with equality on [threshold, inf).  For
    creeping drivers it also replays the first-passage identities: below the
    trigger v(x) = P-weighted v(threshold), above it the one-cycle formula
    must reproduce g + shift.  Returns the worst margins on success.
    """
    t = vf.threshold
    fhat = vf.f.shifted(vf.shift)
    pts = np.unique(np.asarray(grid, dtype=float))
    worst = {
        "min_value": math.inf,
        "min_gap_below": math.inf,
        "max_equality_error": 0.0,
        "max_tail_identity_error": 0.0,
        "max_cycle_identity_error": 0.0,
    }
    for x in pts:
        v = vf.evaluate(x)
        mv = vf.intervention_operator(x)
        if v < -tol:
            raise AuditFailed(f"v({x}) = {v} is negative")
        gap = v - mv
        if gap < -tol:
            raise AuditFailed(f"v < Mv at x = {x}: gap {gap:.3g}")
        worst["min_value"] = min(worst["min_value"], v)
        if x >= t:
            if abs(gap) > tol:
                raise AuditFailed(
                    f"restart equality fails at x = {x}: gap {gap:.3g}")
            worst["max_equality_error"] = max(worst["max_equality_error"],
                                              abs(gap))
        else:
            worst["min_gap_below"] = min(worst["min_gap_below"], gap)
    if isinstance(vf.law, _CREEPING):
        vt = vf.evaluate(t)
        for x in pts:
            if x <= t:
                err = abs(vf.evaluate(x) - tail_prob(vf.law, x, t) * vt)
                key = "max_tail_identity_error"
            else:
                err = abs(restricted_expectation(vf.law, float(x), fhat, t)
                          - vf.evaluate(x))
                key = "max_cycle_identity_error"
            if err > tol:
                raise AuditFailed(
                    f"first-passage identity fails at x = {x}: {err:.3g}")
            worst[key] = max(worst[key], err)
    return worst


def eps_value_at_zero(law, f, eps):
    """Value at the restart state of the stationary trigger-at-eps strategy.

    One-cycle renewal: E_0[f(M); M >= eps] / (1 - E_0 e^{-r tau_eps}).  Works
    for any positive trigger, not only small ones; at the optimal threshold
    it reproduces chat.
    """
    eps = float(eps)
    if eps <= 0.0:
        raise InvalidParameter("eps must be positive")
    escape = tail_prob(law, 0.0, eps)
    if escape >= 1.0:
        raise InvalidParameter("trigger is reached immediately; the cycle "
                               "value diverges")
    return restricted_expectation(law, 0.0, f, eps) / (1.0 - escape)


def eps_value(law, f, eps, x):
    """Value of the trigger-at-eps strategy started from x."""
    x = float(x)
    v0 = eps_value_at_zero(law, f, eps)
    if x >= eps:
        return restricted_expectation(law, x, f, -math.inf) + v0
    return restricted_expectation(law, x, f, eps) + tail_prob(law, x, eps) * v0
