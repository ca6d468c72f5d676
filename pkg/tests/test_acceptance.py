"""Acceptance gate: ten go/no-go checks over solver, audits and simulation.

Each test prints a single ``criterion NN PASS/FAIL`` line outside the
capture so the teed pytest log always shows the verdicts.  The two Monte
Carlo criteria run last; everything before them is deterministic.
"""

import math
import sys
import time

import numpy as np
import pytest

import _oracles
from impulsemax import (
    BrownianWithDrift,
    ExponentialTail,
    GeometricReward,
    InfiniteValueRegime,
    MixedExponential,
    MixedExpUpwardJumpDiffusion,
    PowerReward,
    ProblemSpec,
    ReflectedBMMax,
    ReflectedBrownianMotion,
    SimConfig,
    SpectrallyNegativeJumpDiffusion,
    ThresholdStrategy,
    appell,
    eps_value_at_zero,
    fluctuation_check,
    geometric_representing,
    reflected_bm_representing,
    simulate_value,
    smooth_fit_gap,
    solve_problem,
    verify_representation,
)


@pytest.fixture
def report(capsys):
    def emit(num, ok, detail):
        verdict = "PASS" if ok else "FAIL"
        with capsys.disabled():
            sys.stdout.write(f"\ncriterion {num:02d} {verdict}: {detail}\n")
    return emit


def _conclude(report, num, body):
    try:
        ok, detail = body()
    except Exception as exc:
        report(num, False, f"raised {type(exc).__name__}: {exc}")
        raise
    report(num, ok, detail)
    assert ok, f"criterion {num:02d}: {detail}"


# --------------------------------------------------------------------------
# deterministic criteria
# --------------------------------------------------------------------------

def test_criterion_01_quadratic_threshold_closed_form(report):
    def body():
        chat_true, xstar_true = _oracles.bm_power2_threshold()
        spec = ProblemSpec(BrownianWithDrift(0.0, 1.0), PowerReward(2), 0.5)
        t0 = time.perf_counter()
        sol = solve_problem(spec)
        elapsed = time.perf_counter() - t0
        err = abs(sol.xstar - xstar_true)
        ok = (abs(sol.xstar - 1.5937) < 1e-3 and err < 1e-8
              and abs(sol.diagnostics["residual"]) < 1e-10
              and elapsed < 1.0)
        return ok, (f"xstar={sol.xstar:.10f} |err|={err:.2e} "
                    f"elapsed={elapsed:.3f}s")
    _conclude(report, 1, body)


def test_criterion_02_fixed_point_identity_power_family(report):
    def body():
        t0 = time.perf_counter()
        worst = 0.0
        for m in (2, 3, 4):
            for theta in (0.5, 1.0, 2.0):
                spec = ProblemSpec(BrownianWithDrift(0.0, 1.0 / theta),
                                   PowerReward(m), 0.5)
                sol = solve_problem(spec)
                assert sol.regime == "threshold"
                assert sol.diagnostics["theta"] == pytest.approx(
                    theta, abs=1e-12)
                lhs = sol.chat
                rhs = (sol.xstar ** m + sol.chat) * math.exp(
                    -theta * sol.xstar)
                worst = max(worst, abs(lhs - rhs))
        elapsed = time.perf_counter() - t0
        ok = worst < 1e-9 and elapsed < 5.0
        return ok, (f"9 instances, worst identity residual {worst:.2e}, "
                    f"elapsed={elapsed:.2f}s")
    _conclude(report, 2, body)


def test_criterion_03_reflected_quadratic_value_is_exact(report):
    def body():
        spec = ProblemSpec(ReflectedBrownianMotion(1.0), PowerReward(2), 0.5)
        sol = solve_problem(spec)
        xs = np.linspace(0.0, 4.0, 100)
        err = float(np.max(np.abs(sol.value(xs) - (xs ** 2 + 2.0))))
        ok = sol.regime == "degenerate" and err <= 1e-8
        return ok, f"regime={sol.regime}, max|v-(x^2+2)|={err:.2e}"
    _conclude(report, 3, body)


def test_criterion_04_reflected_linear_blows_up(report):
    def body():
        spec = ProblemSpec(ReflectedBrownianMotion(1.0), PowerReward(1), 0.5)
        sol = solve_problem(spec)
        if sol.regime != "infinite":
            return False, f"regime={sol.regime}, expected infinite"
        with pytest.raises(InfiniteValueRegime):
            sol.value.value_at_zero()
        ladder = [eps_value_at_zero(sol.law, sol.f, eps)
                  for eps in (0.5, 0.1, 0.02)]
        increasing = ladder[0] < ladder[1] < ladder[2]
        ok = increasing and ladder[2] > 2.0 * ladder[0]
        return ok, ("v_eps(0) at eps 0.5/0.1/0.02 = "
                    + "/".join(f"{v:.3f}" for v in ladder))
    _conclude(report, 4, body)


def test_criterion_05_representations_verify_by_quadrature(report):
    def body():
        t0 = time.perf_counter()
        grid = np.linspace(0.1, 4.0, 40)
        cases = []
        for theta in (0.5, 1.0, 2.0):
            law = ExponentialTail(theta)
            for m in (1, 2, 3, 4):
                cases.append((appell(law, m), law, PowerReward(m),
                              f"appell m={m} theta={theta}"))
        geo_law = ExponentialTail(2.0)
        cases.append((geometric_representing(geo_law, 1.0, 2.0), geo_law,
                      GeometricReward(1.0, 2.0), "geometric"))
        rbm_law = ReflectedBMMax(0.5, 1.0)
        for m in (2, 3):
            cases.append((reflected_bm_representing(0.5, m), rbm_law,
                          PowerReward(m), f"reflected m={m}"))
        worst = 0.0
        failed = []
        for f, law, g, tag in cases:
            rep = verify_representation(f, law, g, grid, tol=1e-7)
            worst = max(worst, rep.max_abs_error)
            if not rep.passed:
                failed.append(tag)
        elapsed = time.perf_counter() - t0
        ok = not failed and elapsed < 10.0
        return ok, (f"{len(cases)} representations on [0.1,4], worst error "
                    f"{worst:.2e}, elapsed={elapsed:.2f}s"
                    + (f", failed: {failed}" if failed else ""))
    _conclude(report, 5, body)


FAMILIES = "bm2", "snjd2", "geometric", "mixed_exp", "reflected3", "reflected2"


def _solve_family(tag):
    if tag == "bm2":
        return solve_problem(ProblemSpec(BrownianWithDrift(0.0, 1.0),
                                         PowerReward(2), 0.5)), -0.5
    if tag == "snjd2":
        proc = SpectrallyNegativeJumpDiffusion(0.0, 1.0, 1.0, 1.0)
        return solve_problem(ProblemSpec(proc, PowerReward(2), 0.5)), -0.5
    if tag == "geometric":
        return solve_problem(ProblemSpec(BrownianWithDrift(-0.5, 1.0),
                                         GeometricReward(1.0, 2.0),
                                         1.0)), -0.5
    if tag == "mixed_exp":
        atom0, rates, weights = _oracles.mixed_exp_factorization(
            mu=-0.5, sigma=1.0, r=1.0, jump_rate=1.0, eta=3.0)
        proc = MixedExpUpwardJumpDiffusion(-0.5, 1.0, (3.0,), (1.0,), 1.0)
        law = MixedExponential(atom0, rates, weights)
        return solve_problem(ProblemSpec(proc, PowerReward(2), 1.0),
                             maxlaw=law), -0.5
    if tag == "reflected3":
        # start just above 0: at the restart state itself Mv(0) = v(0)
        # because g(0) = 0, so 0 is always an equality point
        return solve_problem(ProblemSpec(ReflectedBrownianMotion(1.0),
                                         PowerReward(3), 0.5)), 0.05
    return solve_problem(ProblemSpec(ReflectedBrownianMotion(1.0),
                                     PowerReward(2), 0.5)), 0.0


def test_criterion_08_value_dominates_the_operator(report):
    def body():
        details = []
        ok = True
        for tag in FAMILIES:
            sol, lo = _solve_family(tag)
            if sol.regime == "threshold":
                assert sol.xstar > 0.1
                below = np.linspace(lo, sol.xstar - 0.05, 128)
                above = np.linspace(sol.xstar, 2.0 * sol.xstar, 128)
                grid = np.concatenate([below, above])
            else:
                grid = np.linspace(0.0, 4.0, 256)
            v = np.array([sol.value.evaluate(x) for x in grid])
            mv = np.array([sol.value.intervention_operator(x) for x in grid])
            gap = v - mv
            dominates = bool(np.all(gap >= -1e-8))
            if sol.regime == "threshold":
                eq = float(np.max(np.abs(gap[128:])))
                strict = float(np.min(gap[:128]))
                good = dominates and eq <= 1e-8 and strict > 1e-8
                details.append(f"{tag}: eq={eq:.1e} below_min={strict:.1e}")
            else:
                eq = float(np.max(np.abs(gap)))
                good = dominates and eq <= 1e-8
                details.append(f"{tag}: eq={eq:.1e} (threshold at 0)")
            ok = ok and good
        return ok, "; ".join(details)
    _conclude(report, 8, body)


def test_criterion_09_geometric_closed_form(report, geometric_solution):
    def body():
        chat_true, xstar_true = _oracles.geometric_threshold()
        sol = geometric_solution
        e_c = abs(sol.chat - chat_true)
        e_x = abs(sol.xstar - xstar_true)
        ok = e_c <= 1e-9 and e_x <= 1e-9
        return ok, (f"|chat-(1-sqrt(3)/2)|={e_c:.2e}, "
                    f"|xstar-ln(2+sqrt(3))|={e_x:.2e}")
    _conclude(report, 9, body)


def test_criterion_10_smooth_fit_only_at_the_optimizer(
        report, bm2_solution, reflected3_solution):
    def body():
        details = []
        ok = True
        for tag, sol in (("bm2", bm2_solution),
                         ("reflected3", reflected3_solution)):
            at = smooth_fit_gap(sol.value)
            lo = smooth_fit_gap(sol.value, threshold=sol.xstar - 0.05)
            hi = smooth_fit_gap(sol.value, threshold=sol.xstar + 0.05)
            good = at < 1e-6 and lo > 1e-3 and hi > 1e-3
            ok = ok and good
            details.append(f"{tag}: gap(x*)={at:.1e}, "
                           f"gap(x*-.05)={lo:.1e}, gap(x*+.05)={hi:.1e}")
        return ok, "; ".join(details)
    _conclude(report, 10, body)


# --------------------------------------------------------------------------
# Monte Carlo criteria (minutes, not seconds; kept last)
# --------------------------------------------------------------------------

def test_criterion_06_fluctuation_identity_against_simulation(
        report, bm2_solution):
    def body():
        sol = bm2_solution
        t0 = time.perf_counter()
        zs = []
        for i, (x, y) in enumerate(((0.0, 1.0), (-0.5, 1.0), (0.5, 1.5))):
            cfg = SimConfig(dt=0.01, n_paths=1_000_000, seed=211 + i,
                            discount_floor=1e-5)
            res = fluctuation_check(sol.spec, sol.law, sol.f, x, y, cfg)
            zs.append(res["z"])
        elapsed = time.perf_counter() - t0
        ok = all(abs(z) <= 3.0 for z in zs) and elapsed < 120.0
        return ok, ("z per (x,y) pair: "
                    + ", ".join(f"{z:+.2f}" for z in zs)
                    + f"; elapsed={elapsed:.0f}s")
    _conclude(report, 6, body)


def test_criterion_07_simulated_policy_peaks_at_the_threshold(
        report, bm2_solution):
    def body():
        sol = bm2_solution
        t0 = time.perf_counter()
        runs = {}
        for i, mult in enumerate((0.8, 1.0, 1.2)):
            cfg = SimConfig(dt=0.01, n_paths=1_000_000, seed=307 + i,
                            discount_floor=1e-5)
            strat = ThresholdStrategy(mult * sol.xstar)
            runs[mult] = simulate_value(sol.spec, strat, cfg)
        elapsed = time.perf_counter() - t0
        star = runs[1.0]
        margins = {}
        for mult in (0.8, 1.2):
            se = math.hypot(star.stderr, runs[mult].stderr)
            margins[mult] = (star.mean - runs[mult].mean) / se
        z0 = star.z_score(sol.chat)
        ok = (margins[0.8] > 2.0 and margins[1.2] > 2.0
              and abs(z0) <= 3.0 and elapsed < 180.0)
        return ok, (f"margin vs 0.8x*: {margins[0.8]:.1f}se, vs 1.2x*: "
                    f"{margins[1.2]:.1f}se, z(chat)={z0:+.2f}, "
                    f"elapsed={elapsed:.0f}s")
    _conclude(report, 7, body)
