"""End-to-end solver: spec -> law of the maximum -> representing function
-> regime -> fixed point -> audited value function."""

import json
import math
import time
from dataclasses import dataclass
from typing import Optional

from .errors import MalformedConfig, UnsupportedModel, UnsupportedVariant
from .maxlaw import (
    ExponentialTail,
    MixedExponential,
    ReflectedBMMax,
    TabulatedLaw,
    theta_from_model,
)
from .problem import (
    BrownianWithDrift,
    GeometricReward,
    MixedExpUpwardJumpDiffusion,
    PowerReward,
    ProblemSpec,
    ReflectedBrownianMotion,
    SpectrallyNegativeJumpDiffusion,
    TabulatedReward,
    parse_problem,
)
from .represent import (
    appell,
    geometric_representing,
    reflected_bm_representing,
    tabulated_representing,
)
from .solve import (
    REGIME_THRESHOLD,
    Assumption2Report,
    CurveSketch,
    check_assumption2,
    classify,
    fixed_point_chat,
    sketch,
)
from .valuefn import ValueFunction

_MAXLAW_FIELDS = {
    "mixed_exponential": ("atom0", "rates", "weights"),
    "tabulated": ("grid", "cdf", "translation_invariant"),
}


def maxlaw_from_dict(section):
    """Build a user-supplied law of the maximum from a config block."""
    if not isinstance(section, dict):
        raise MalformedConfig("maxlaw section must be an object")
    kind = section.get("kind")
    if kind not in _MAXLAW_FIELDS:
        raise MalformedConfig(f"unknown maxlaw kind {kind!r}")
    allowed = _MAXLAW_FIELDS[kind]
    kwargs = {}
    for key, val in section.items():
        if key == "kind":
            continue
        if key not in allowed:
            raise MalformedConfig(f"unknown maxlaw field {key!r}")
        kwargs[key] = tuple(val) if isinstance(val, list) else val
    if kind == "mixed_exponential":
        return MixedExponential(**kwargs)
    return TabulatedLaw(**kwargs)


def load_problem(text):
    """Parse a JSON config into (ProblemSpec, optional user-supplied law)."""
    spec = parse_problem(text)
    cfg = json.loads(text)
    block = cfg.get("maxlaw")
    return spec, (maxlaw_from_dict(block) if block is not None else None)


def build_law(spec, maxlaw=None):
    """Law of the overall maximum M under the killing rate of the problem.

    A user-supplied law wins.  Spectrally negative drivers get the
    exponential law with the positive root of Psi(theta) = rate; upward
    jumps have no such root, so those need the maxlaw block.
    """
    if maxlaw is not None:
        if isinstance(maxlaw, dict):
            return maxlaw_from_dict(maxlaw)
        return maxlaw
    proc = spec.process
    if isinstance(proc, (BrownianWithDrift, SpectrallyNegativeJumpDiffusion)):
        return ExponentialTail(theta_from_model(proc, spec.rate))
    if isinstance(proc, MixedExpUpwardJumpDiffusion):
        raise UnsupportedModel(
            "upward jumps: supply the factorized law of the maximum via the "
            "'maxlaw' block (kind 'mixed_exponential')")
    if isinstance(proc, ReflectedBrownianMotion):
        return ReflectedBMMax(spec.rate, proc.sigma)
    raise UnsupportedModel(f"no law builder for {type(proc).__name__}")


def build_representing(spec, law):
    """Representing function f with E_x[f(M)] equal to the reward."""
    reward = spec.reward
    if isinstance(reward, PowerReward):
        if isinstance(law, ReflectedBMMax):
            return reflected_bm_representing(spec.rate, reward.m,
                                             spec.process.sigma)
        if getattr(law, "translation_invariant", False):
            return appell(law, reward.m)
        raise UnsupportedModel("power rewards need a translation-invariant "
                               "law or a reflected driver")
    if isinstance(reward, GeometricReward):
        if not getattr(law, "translation_invariant", False):
            raise UnsupportedVariant(
                "geometric rewards are only represented under "
                "translation-invariant laws")
        return geometric_representing(law, reward.b, reward.k)
    if isinstance(reward, TabulatedReward):
        if reward.f_x is None:
            raise UnsupportedModel(
                "tabulated rewards need the representing function on a grid "
                "(f_x / f_values); inverting the reward is out of scope")
        return tabulated_representing(reward.f_x, reward.f_values)
    raise UnsupportedModel(f"no representation for {type(reward).__name__}")


def _default_cap(law, f):
    cap = 2.0 * float(law.quantile(0.0, 1.0 - 1e-10))
    terms = f.exp_terms
    if terms is not None:
        # positive exponential growth: make sure the sign flip is inside
        pos = [(w, b) for w, b in terms if w > 0 and b > 0]
        neg = sum(w for w, b in terms if b == 0)
        if len(pos) == 1 and neg < 0:
            w, b = pos[0]
            cap = max(cap, 2.0 * math.log(-neg / w) / b + 2.0 / b)
    return cap


@dataclass(frozen=True)
class Solution:
    """Everything the solver knows about one problem."""

    spec: ProblemSpec
    regime: str
    law: object
    f: object
    g: object
    curve: Optional[CurveSketch]
    cstar: Optional[float]
    chat: Optional[float]
    xstar: Optional[float]
    assumption2: Optional[Assumption2Report]
    value: ValueFunction
    diagnostics: dict


def solve_problem(spec, maxlaw=None, fixed_point_tol=1e-11, scan_points=512,
                  assumption2_grid=256, domain_cap=None):
    """Classify the problem and, in the threshold regime, solve it.

    Returns a Solution; its value function raises when the regime makes the
    value infinite.  The below-threshold negativity check is attached as a
    report rather than an exception so callers can decide how strict to be.
    """
    t0 = time.perf_counter()
    law = build_law(spec, maxlaw)
    f = build_representing(spec, law)
    g = spec.reward
    g0 = float(g.at_zero)
    regime = classify(f, g0)
    diagnostics = {"regime": regime}
    if isinstance(law, ExponentialTail):
        diagnostics["theta"] = law.theta

    if regime != REGIME_THRESHOLD:
        value = ValueFunction(regime=regime, law=law, f=f, g=g)
        diagnostics["elapsed_seconds"] = time.perf_counter() - t0
        return Solution(spec=spec, regime=regime, law=law, f=f, g=g,
                        curve=None, cstar=None, chat=None, xstar=None,
                        assumption2=None, value=value,
                        diagnostics=diagnostics)

    cap = float(domain_cap) if domain_cap is not None else _default_cap(law, f)
    curve = sketch(f, cap)
    chat, xstar, fp_diag = fixed_point_chat(f, law, curve,
                                            tol=fixed_point_tol,
                                            scan_points=scan_points)
    report = check_assumption2(f.shifted(chat), law, xstar, curve.xmin, g0,
                               grid_points=assumption2_grid)
    value = ValueFunction(regime=regime, law=law, f=f, g=g, chat=chat,
                          xstar=xstar)
    diagnostics.update(fp_diag)
    diagnostics["domain_cap"] = cap
    diagnostics["elapsed_seconds"] = time.perf_counter() - t0
    return Solution(spec=spec, regime=regime, law=law, f=f, g=g, curve=curve,
                    cstar=curve.cstar, chat=chat, xstar=xstar,
                    assumption2=report, value=value, diagnostics=diagnostics)
