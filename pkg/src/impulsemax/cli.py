"""Command line front end: solve / curve / simulate over a JSON config.

Exit codes: 0 solved and verified, 2 solved but the below-threshold
negativity check did not certify, 1 on any typed error.
"""

import argparse
import json
import math
import sys

import numpy as np

from .errors import ImpulseError
from .mc import SimConfig, ThresholdStrategy, simulate_value
from .pipeline import load_problem, solve_problem
from .solve import REGIME_THRESHOLD
from .valuefn import verification_audit


def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True,
                        help="path to the JSON problem config")
    common.add_argument("--tol-fixed-point", type=float, default=1e-11,
                        help="bisection width for the scalar fixed point")
    common.add_argument("--scan-points", type=int, default=512,
                        help="scan resolution for bracketing the fixed point")
    common.add_argument("--grid-assumption2", type=int, default=256,
                        help="audit grid for the below-threshold check")
    common.add_argument("--domain-cap", type=float, default=None,
                        help="override the curve-sketch domain cap")
    common.add_argument("--out", default=None,
                        help="write the report here instead of stdout")
    return common


def _parser():
    p = argparse.ArgumentParser(
        prog="impulsemax",
        description="threshold restart policies for maximum-driven rewards",
        epilog="Reflected configs with sigma != 1 are handled by the "
               "rescaling x -> x/sigma, absorbed into sqrt(2*rate)/sigma "
               "inside the formulas; all reported quantities stay on the "
               "input scale.")
    sub = p.add_subparsers(dest="command", required=True)
    common = _common_parser()

    ps = sub.add_parser("solve", parents=[common],
                        help="classify, solve and audit; JSON report")
    ps.set_defaults(func=_cmd_solve)

    pc = sub.add_parser("curve", parents=[common],
                        help="tabulate x,v,Mv,g as CSV")
    pc.add_argument("--curve-range", default=None, metavar="A:B",
                    help="evaluation range, e.g. 0:4 (default spans the "
                         "threshold)")
    pc.add_argument("--curve-points", type=int, default=256)
    pc.set_defaults(func=_cmd_curve)

    pm = sub.add_parser("simulate", parents=[common],
                        help="Monte Carlo check of a threshold strategy")
    pm.add_argument("--paths", type=int, default=200_000)
    pm.add_argument("--dt", type=float, default=0.01)
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument("--floor", type=float, default=1e-5,
                    help="discount floor setting the simulated horizon")
    pm.add_argument("--threshold", type=float, default=None,
                    help="simulate this trigger instead of the solved one")
    pm.add_argument("--sweep", default=None, metavar="M1,M2,...",
                    help="multipliers of the solved threshold to sweep")
    pm.set_defaults(func=_cmd_simulate)
    return p


def _solve_from_args(args):
    with open(args.config, "r", encoding="utf-8") as fh:
        text = fh.read()
    spec, maxlaw = load_problem(text)
    sol = solve_problem(spec, maxlaw=maxlaw,
                        fixed_point_tol=args.tol_fixed_point,
                        scan_points=args.scan_points,
                        assumption2_grid=args.grid_assumption2,
                        domain_cap=args.domain_cap)
    return sol


def _emit(out, text):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _exit_code(sol):
    if sol.regime == REGIME_THRESHOLD and not sol.assumption2.passed:
        return 2
    return 0


def _audit_grid(sol):
    if sol.regime == REGIME_THRESHOLD:
        hi = 2.0 * sol.xstar
    else:
        hi = 2.0 * float(sol.law.quantile(0.0, 1.0 - 1e-6))
    grid = np.linspace(0.0, hi, 65)
    if getattr(sol.law, "translation_invariant", False):
        grid = np.concatenate([np.linspace(-0.5 * hi, 0.0, 9)[:-1], grid])
    return grid


def _assumption2_dict(report):
    return {
        "passed": report.passed,
        "condition": report.condition,
        "worst_margin": report.worst_margin,
        "worst_at": report.worst_at,
        "value_at_zero_gap": report.value_at_zero_gap,
    }


def _cmd_solve(args):
    sol = _solve_from_args(args)
    report = {"regime": sol.regime, "rate": sol.spec.rate}
    if "theta" in sol.diagnostics:
        report["theta"] = sol.diagnostics["theta"]
    if sol.regime == "infinite":
        report["note"] = ("restarts near the origin compound without bound; "
                          "the value is infinite")
    else:
        report["value_at_zero"] = sol.value.value_at_zero()
        report["verification"] = verification_audit(sol.value,
                                                    _audit_grid(sol))
    if sol.regime == REGIME_THRESHOLD:
        report.update({
            "cstar": sol.cstar,
            "chat": sol.chat,
            "xstar": sol.xstar,
            "curve": {
                "xmin": sol.curve.xmin,
                "fmin": sol.curve.fmin,
                "xbar": sol.curve.xbar,
                "domain_cap": sol.curve.domain_cap,
            },
            "fixed_point": {
                "residual": sol.diagnostics["residual"],
                "iterations": sol.diagnostics["iterations"],
                "scan_points": sol.diagnostics["scan_points"],
            },
            "assumption2": _assumption2_dict(sol.assumption2),
        })
    _emit(args.out, json.dumps(report, indent=2, sort_keys=True) + "\n")
    return _exit_code(sol)


def _parse_range(text, sol):
    if text is None:
        if sol.regime == REGIME_THRESHOLD:
            return 0.0, 2.0 * sol.xstar
        return 0.0, 2.0 * float(sol.law.quantile(0.0, 1.0 - 1e-6))
    parts = text.split(":")
    if len(parts) != 2:
        raise ImpulseError(f"bad --curve-range {text!r}; expected A:B")
    lo, hi = float(parts[0]), float(parts[1])
    if not hi > lo:
        raise ImpulseError("curve range must have A < B")
    return lo, hi


def _fmt(v):
    return "%.12g" % v


def _cmd_curve(args):
    sol = _solve_from_args(args)
    lo, hi = _parse_range(args.curve_range, sol)
    if args.curve_points < 2:
        raise ImpulseError("need at least two curve points")
    xs = np.linspace(lo, hi, args.curve_points)
    lines = ["x,v,Mv,g"]
    for x in xs:
        v = sol.value.evaluate(x)
        mv = sol.value.intervention_operator(x)
        lines.append(",".join(_fmt(t) for t in (x, v, mv, float(sol.g(x)))))
    _emit(args.out, "\n".join(lines) + "\n")
    return _exit_code(sol)


def _estimate_dict(est):
    # elapsed time is deliberately left out so reruns are byte-identical
    return {
        "mean": est.mean,
        "stderr": est.stderr,
        "n_paths": est.n_paths,
        "n_steps": est.n_steps,
        "truncation_bias_bound": est.truncation_bias_bound,
    }


def _cmd_simulate(args):
    sol = _solve_from_args(args)
    if sol.regime != REGIME_THRESHOLD and args.threshold is None:
        raise ImpulseError("no finite threshold to simulate; pass --threshold")
    cfg = SimConfig(dt=args.dt, n_paths=args.paths, seed=args.seed,
                    discount_floor=args.floor)
    report = {"dt": args.dt, "n_paths": args.paths, "seed": args.seed}
    if args.sweep is not None:
        if sol.regime != REGIME_THRESHOLD:
            raise ImpulseError("sweep scales the solved threshold; this "
                               "problem has none")
        mults = [float(t) for t in args.sweep.split(",") if t]
        rows = []
        for mult in mults:
            t = mult * sol.xstar
            est = simulate_value(sol.spec, ThresholdStrategy(t), cfg)
            rows.append({"multiplier": mult, "threshold": t,
                         "estimate": _estimate_dict(est),
                         "z_vs_chat": est.z_score(sol.chat)})
        report["sweep"] = rows
    else:
        t = args.threshold if args.threshold is not None else sol.xstar
        est = simulate_value(sol.spec, ThresholdStrategy(float(t)), cfg)
        report["threshold"] = float(t)
        report["estimate"] = _estimate_dict(est)
        if sol.regime == REGIME_THRESHOLD:
            report["chat"] = sol.chat
            report["z_vs_chat"] = est.z_score(sol.chat)
    _emit(args.out, json.dumps(report, indent=2, sort_keys=True) + "\n")
    return _exit_code(sol)


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except (ImpulseError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
