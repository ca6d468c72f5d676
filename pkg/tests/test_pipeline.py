"""The problem-to-solution pipeline: law selection, dispatch, diagnostics."""

import json
import math

import numpy as np
import pytest

import _oracles
from impulsemax import (
    BrownianWithDrift,
    ExponentialTail,
    GeometricReward,
    MalformedConfig,
    MixedExponential,
    MixedExpUpwardJumpDiffusion,
    PowerReward,
    ProblemSpec,
    ReflectedBMMax,
    ReflectedBrownianMotion,
    SpectrallyNegativeJumpDiffusion,
    TabulatedReward,
    UnsupportedModel,
    UnsupportedVariant,
    build_law,
    build_representing,
    load_problem,
    solve_problem,
)
from impulsemax.pipeline import maxlaw_from_dict

# factorized law of the maximum for the jump diffusion below, computed
# independently in _oracles from the roots of the exponent equation
_ATOM0, _RATES, _WEIGHTS = _oracles.mixed_exp_factorization(
    mu=-0.5, sigma=1.0, r=1.0, jump_rate=1.0, eta=3.0)

MIXED_CONFIG = {
    "process": {"type": "mixed_exp_upward", "mu": -0.5, "sigma": 1.0,
                "up_rates": [3.0], "up_weights": [1.0], "jump_rate": 1.0},
    "reward": {"type": "power", "m": 2},
    "rate": 1.0,
    "maxlaw": {"kind": "mixed_exponential", "atom0": _ATOM0,
               "rates": list(_RATES), "weights": list(_WEIGHTS)},
}


def test_load_problem_returns_the_user_law():
    spec, law = load_problem(json.dumps(MIXED_CONFIG))
    assert isinstance(law, MixedExponential)
    assert law.rates == pytest.approx(_RATES)
    cfg = {k: v for k, v in MIXED_CONFIG.items() if k != "maxlaw"}
    cfg["process"] = {"type": "brownian", "mu": 0.0, "sigma": 1.0}
    cfg["rate"] = 0.5
    spec, law = load_problem(json.dumps(cfg))
    assert law is None


def test_maxlaw_from_dict_validation():
    with pytest.raises(MalformedConfig):
        maxlaw_from_dict({"kind": "zipf"})
    with pytest.raises(MalformedConfig):
        maxlaw_from_dict({"kind": "mixed_exponential", "atom0": 0.1,
                          "rates": [1.0], "weights": [0.9], "spam": 1})
    with pytest.raises(MalformedConfig):
        maxlaw_from_dict([1, 2])


def test_build_law_dispatch():
    bm = ProblemSpec(BrownianWithDrift(0.0, 1.0), PowerReward(2), 0.5)
    law = build_law(bm)
    assert isinstance(law, ExponentialTail)
    assert law.theta == pytest.approx(1.0, abs=1e-12)

    snjd = ProblemSpec(SpectrallyNegativeJumpDiffusion(0.0, 1.0, 1.0, 1.0),
                       PowerReward(2), 0.5)
    assert isinstance(build_law(snjd), ExponentialTail)

    refl = ProblemSpec(ReflectedBrownianMotion(sigma=2.0), PowerReward(2),
                       0.5)
    rlaw = build_law(refl)
    assert isinstance(rlaw, ReflectedBMMax)
    assert rlaw.sigma == 2.0

    mixed = ProblemSpec(
        MixedExpUpwardJumpDiffusion(-0.5, 1.0, (3.0,), (1.0,), 1.0),
        PowerReward(2), 1.0)
    with pytest.raises(UnsupportedModel):
        build_law(mixed)
    user = MixedExponential(0.1, (1.0, 3.0), (0.6, 0.3))
    assert build_law(mixed, maxlaw=user) is user
    # a dict block works too
    got = build_law(mixed, maxlaw=MIXED_CONFIG["maxlaw"])
    assert isinstance(got, MixedExponential)
    # the user law also wins over a derivable one
    assert build_law(bm, maxlaw=user) is user


def test_build_representing_dispatch():
    bm = ProblemSpec(BrownianWithDrift(0.0, 1.0), PowerReward(2), 0.5)
    f = build_representing(bm, build_law(bm))
    assert f.label == "appell_2"

    refl = ProblemSpec(ReflectedBrownianMotion(1.0), PowerReward(3), 0.5)
    f = build_representing(refl, build_law(refl))
    assert f.label == "reflected_power_3"

    geo_refl = ProblemSpec(ReflectedBrownianMotion(1.0),
                           GeometricReward(b=0.5, k=2.0), 0.5)
    with pytest.raises(UnsupportedVariant):
        build_representing(geo_refl, build_law(geo_refl))

    bare_table = ProblemSpec(
        BrownianWithDrift(0.0, 1.0),
        TabulatedReward(x=(0.0, 1.0), g=(0.0, 1.0)), 0.5)
    with pytest.raises(UnsupportedModel):
        build_representing(bare_table, build_law(bare_table))


def test_solution_fields_and_diagnostics(bm2_solution):
    sol = bm2_solution
    assert sol.regime == "threshold"
    assert sol.diagnostics["theta"] == pytest.approx(1.0, abs=1e-12)
    assert sol.cstar == pytest.approx(sol.curve.cstar)
    assert 0.0 < sol.chat <= sol.cstar
    assert sol.curve.xmin <= sol.xstar <= sol.curve.xbar
    assert sol.diagnostics["domain_cap"] > sol.curve.xbar
    assert sol.diagnostics["elapsed_seconds"] > 0.0
    assert sol.assumption2.passed


def test_non_threshold_solution_is_minimal():
    spec = ProblemSpec(ReflectedBrownianMotion(1.0), PowerReward(2), 0.5)
    sol = solve_problem(spec)
    assert sol.regime == "degenerate"
    assert sol.curve is None and sol.chat is None and sol.xstar is None
    assert sol.assumption2 is None
    assert sol.value.value_at_zero() == pytest.approx(2.0, abs=1e-12)


def test_solve_with_user_factorization_passes_audits():
    spec, law = load_problem(json.dumps(MIXED_CONFIG))
    sol = solve_problem(spec, maxlaw=law)
    assert sol.regime == "threshold"
    assert abs(sol.diagnostics["residual"]) < 1e-9
    assert sol.assumption2.passed
    # the fixed point reproduces itself through the value function
    assert sol.value.value_at_zero() == pytest.approx(sol.chat, abs=1e-10)


def test_tabulated_problem_end_to_end():
    # tables sampled from the geometric family; theta = 2 exponential law
    chat_true, xstar_true = _oracles.geometric_threshold()
    xs = np.linspace(0.0, 8.0, 4001)
    f_vals = 0.5 * np.exp(xs) - 2.0
    gx = np.linspace(-2.0, 8.0, 4001)
    g_vals = np.exp(gx) - 2.0
    spec = ProblemSpec(
        process=BrownianWithDrift(mu=-0.5, sigma=1.0),
        reward=TabulatedReward(x=tuple(gx), g=tuple(g_vals),
                               f_x=tuple(xs), f_values=tuple(f_vals)),
        rate=1.0)
    sol = solve_problem(spec, domain_cap=8.0)
    assert sol.regime == "threshold"
    assert sol.chat == pytest.approx(chat_true, abs=5e-3)
    assert sol.xstar == pytest.approx(xstar_true, abs=5e-3)
