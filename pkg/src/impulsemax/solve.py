"""Regime classification and the scalar fixed point for the threshold.

The solvable shape is a single dip: f falls to a negative global minimum at
xmin and increases through zero at xbar.  Writing x_c for the unique point
in [xmin, xbar] with f(x_c) = -c, the candidate value at the restart state
is vhat_c(0) = E_0[(f+c)(M); M >= x_c]; the optimal threshold is x_chat for
the smallest fixed point chat of c = vhat_c(0) on (0, c*], c* = -f(xmin).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import (
    AuditFailed,
    InconsistentMetadata,
    InvalidParameter,
    NoSignChange,
    OutOfRange,
    RewardAtZeroPositive,
    ShapeViolation,
)
from .maxlaw import (
    DiffusionFactorized,
    ExponentialTail,
    MixedExponential,
    ReflectedBMMax,
    complement_expectation,
    restricted_expectation,
)

REGIME_INFINITE = "infinite"
REGIME_DEGENERATE = "degenerate"
REGIME_THRESHOLD = "threshold"


@dataclass(frozen=True)
class CurveSketch:
    """Landmarks of the one-dip shape of a representing function."""

    xmin: float
    fmin: float
    cstar: float
    xbar: float
    domain_cap: float


def sketch(f, domain_cap):
    """Locate the dip (xmin, fmin), the ceiling c* = -fmin and the zero xbar.

    Scans a dense grid on [0, domain_cap], refines the minimizer to 1e-12
    and audits the one-dip shape; any violation raises ShapeViolation with
    a hint.  The leftmost minimizer wins on ties.
    """
    cap = float(domain_cap)
    if cap <= 0:
        raise InvalidParameter("domain_cap must be positive")
    xs = np.linspace(0.0, cap, 10001)
    vals = np.asarray(f(xs), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ShapeViolation("f is not finite on [0, cap]; wrong regime?")
    i = int(np.argmin(vals))
    if i == len(xs) - 1:
        raise ShapeViolation("minimum sits at the domain cap; raise domain_cap")
    lo, hi = xs[max(i - 1, 0)], xs[i + 1]
    res = optimize.minimize_scalar(lambda t: float(f(t)), bounds=(lo, hi),
                                   method="bounded",
                                   options={"xatol": 1e-13})
    xmin, fmin = float(res.x), float(res.fun)
    f0 = float(f(0.0))
    if f0 <= fmin:
        xmin, fmin = 0.0, f0
    scale = max(1.0, float(np.max(np.abs(vals))))
    if fmin >= 0.0:
        raise ShapeViolation("f never dips below zero on [0, cap]")
    if vals[-1] <= 0.0:
        raise ShapeViolation("f is not positive by the cap; raise domain_cap")
    right = vals[xs >= xmin]
    if right.size > 1 and float(np.min(np.diff(right))) < -1e-9 * scale:
        raise ShapeViolation("f decreases again beyond its minimum")
    xbar = optimize.brentq(lambda t: float(f(t)), xmin, cap,
                           xtol=1e-15, rtol=8.9e-16)
    return CurveSketch(xmin=xmin, fmin=fmin, cstar=-fmin, xbar=float(xbar),
                       domain_cap=cap)


def classify(f, g0):
    """Map (f metadata, g(0)) to a regime tag.

    g(0) > 0 is ill-posed.  With g(0) = 0: divergence of f at zero means the
    value is infinite, a non-decreasing f with a finite limit means the
    degenerate continuous-restart regime, a dipping f means a threshold.
    With g(0) < 0 the threshold regime applies directly.
    """
    g0 = float(g0)
    if g0 > 1e-14:
        raise RewardAtZeroPositive(f"g(0) = {g0} > 0: restarts earn an "
                                   "infinite reward stream")
    if abs(g0) <= 1e-14:
        lim = f.limit_at_zero
        if lim is None:
            raise InconsistentMetadata(
                "g(0) = 0 needs the limit of f at zero; supply metadata")
        if math.isinf(lim) and lim < 0:
            return REGIME_INFINITE
        if math.isinf(lim):
            raise InconsistentMetadata("f cannot diverge to +inf at zero")
        if f.monotone_nondecreasing == "yes":
            return REGIME_DEGENERATE
        if f.monotone_nondecreasing == "no":
            return REGIME_THRESHOLD
        raise InconsistentMetadata(
            "g(0) = 0 needs the monotonicity of f; supply metadata")
    return REGIME_THRESHOLD


def root_xc(f, c, sk):
    """The unique x_c in [xmin, xbar] with f(x_c) = -c, for c in [0, c*]."""
    c = float(c)
    tol_hi = sk.cstar * (1.0 + 1e-12) + 1e-15
    if c < -1e-15 or c > tol_hi:
        raise OutOfRange(f"c = {c} outside [0, c* = {sk.cstar}]")
    c = min(max(c, 0.0), sk.cstar)
    if c == sk.cstar:
        return sk.xmin
    if c == 0.0:
        return sk.xbar

    def t(x):
        return float(f(x)) + c

    xc = optimize.brentq(t, sk.xmin, sk.xbar, xtol=1e-15, rtol=8.9e-16)
    scale = max(1.0, abs(c), sk.cstar)
    if abs(t(xc)) > 1e-12 * scale:
        raise AuditFailed(f"|f(x_c) + c| = {abs(t(xc)):.3g} at x_c = {xc}")
    return float(xc)


def fixed_point_chat(f, law, sk, tol=1e-11, scan_points=512):
    """Smallest fixed point of c = vhat_c(0) on (0, c*] and its threshold.

    z(c) = c - vhat_c(0) satisfies z(0) <= 0 <= z(c*); the first sign-change
    bracket on a scan grid is bisected to width ``tol`` and polished with a
    secant step.  Returns (chat, xstar, diagnostics).
    """
    if tol <= 0:
        raise InvalidParameter("tol must be positive")
    if scan_points < 8:
        raise InvalidParameter("scan_points must be at least 8")

    def z(c):
        xc = root_xc(f, c, sk)
        return c - restricted_expectation(law, 0.0, f.shifted(c), xc)

    slack = 1e-12 * max(1.0, sk.cstar)
    z_lo, z_hi = z(0.0), z(sk.cstar)
    if z_lo > slack or z_hi < -slack:
        raise NoSignChange(f"z(0) = {z_lo:.3g}, z(c*) = {z_hi:.3g}: "
                           "no root in (0, c*]")

    cs = np.linspace(0.0, sk.cstar, int(scan_points))
    zs = np.array([z_lo] + [z(c) for c in cs[1:-1]] + [z_hi])
    brackets = []
    exact = None
    for i in range(len(cs) - 1):
        if zs[i + 1] == 0.0 and cs[i + 1] > 0.0:
            exact = cs[i + 1]
            break
        if zs[i] < 0.0 <= zs[i + 1]:
            brackets.append((cs[i], cs[i + 1]))
    if exact is not None:
        chat, iterations = exact, 0
    else:
        if not brackets:
            raise NoSignChange("scan found no sign change of z on (0, c*]")
        lo, hi = brackets[0]
        zl, zh = z(lo), z(hi)
        iterations = 0
        while hi - lo > tol:
            iterations += 1
            if iterations > 60:
                raise AuditFailed("bisection did not converge in 60 iterations")
            mid = 0.5 * (lo + hi)
            zm = z(mid)
            if zm < 0.0:
                lo, zl = mid, zm
            else:
                hi, zh = mid, zm
        chat = 0.5 * (lo + hi)
        if zh != zl:
            secant = lo - zl * (hi - lo) / (zh - zl)
            if lo <= secant <= hi:
                chat = secant

    residual = z(chat)
    xstar = root_xc(f, chat, sk)
    if not (0.0 < chat <= sk.cstar * (1.0 + 1e-12)):
        raise AuditFailed(f"chat = {chat} escaped (0, c*]")
    if not (sk.xmin - 1e-12 <= xstar <= sk.xbar + 1e-12):
        raise AuditFailed(f"xstar = {xstar} escaped [xmin, xbar]")
    if abs(residual) > 1e-9:
        raise AuditFailed(f"fixed-point residual {residual:.3g} exceeds 1e-9")
    diagnostics = {
        "residual": float(residual),
        "iterations": int(iterations),
        "scan_points": int(scan_points),
        "brackets_found": len(brackets) if exact is None else 1,
        "z_at_zero": float(z_lo),
        "z_at_cstar": float(z_hi),
    }
    return float(chat), float(xstar), diagnostics


@dataclass(frozen=True)
class Assumption2Report:
    """Outcome of the below-threshold negativity check."""

    passed: bool
    condition: str
    worst_margin: float
    worst_at: float
    value_at_zero_gap: float


_FACTORIZED = (ExponentialTail, ReflectedBMMax, DiffusionFactorized)
_MONOTONE_DENSITY = (ExponentialTail, MixedExponential)


def check_assumption2(f_hat, law, xstar, xmin, g0, grid_points=256):
    """Certify E_x[f_hat(M); M <= xstar] <= 0 on (0, xmin).

    Tries the cheap sufficient conditions in order (f_hat nonpositive on the
    left, non-increasing density against a decreasing f_hat, factorized tail
    against a single + to - sign change) and falls back to a direct grid
    audit of the expectation.  Never raises: a failed audit comes back as
    ``passed=False`` and callers decide how loud to be.
    """
    zero_gap = complement_expectation(law, 0.0, f_hat, xstar) - float(g0)
    if xmin <= 1e-14:
        return Assumption2Report(True, "left_of_min_empty", 0.0, 0.0,
                                 float(zero_gap))

    grid = np.linspace(0.0, xmin, int(grid_points) + 2)
    interior = grid[1:-1]
    vals = np.asarray(f_hat(interior), dtype=float)
    scale = max(1.0, float(np.max(np.abs(vals))))

    if np.all(vals <= 1e-12 * scale):
        worst = float(np.max(vals))
        return Assumption2Report(True, "nonpositive_left", worst,
                                 float(interior[int(np.argmax(vals))]),
                                 float(zero_gap))

    if isinstance(law, _MONOTONE_DENSITY):
        edge_vals = np.asarray(f_hat(grid), dtype=float)
        diffs = np.diff(edge_vals)
        if np.all(diffs <= 1e-12 * scale):
            return Assumption2Report(True, "density_decreasing",
                                     float(np.max(diffs)),
                                     float(grid[int(np.argmax(diffs))]),
                                     float(zero_gap))

    if isinstance(law, _FACTORIZED):
        signs = np.sign(np.where(np.abs(vals) <= 1e-12 * scale, 0.0, vals))
        nz = signs[signs != 0]
        changes = int(np.count_nonzero(np.diff(nz) != 0))
        if nz.size and nz[0] > 0 and nz[-1] < 0 and changes == 1:
            return Assumption2Report(True, "single_sign_change", 0.0, 0.0,
                                     float(zero_gap))

    margins = np.array([complement_expectation(law, float(x), f_hat, xstar)
                        for x in interior])
    worst_i = int(np.argmax(margins))
    worst = float(margins[worst_i])
    return Assumption2Report(bool(worst <= 1e-9), "direct_audit", worst,
                             float(interior[worst_i]), float(zero_gap))


def harmonic_psi(law):
    """Increasing harmonic function of the tail factorization, if any."""
    if isinstance(law, ExponentialTail):
        theta = law.theta
        return lambda x: math.exp(theta * x)
    if isinstance(law, ReflectedBMMax):
        s = law.s
        return lambda x: math.cosh(s * x)
    if isinstance(law, DiffusionFactorized):
        return lambda x: float(law.psi(x))
    return None


@dataclass(frozen=True)
class DiffusionInequalityReport:
    ok: bool
    min_margin: float
    argmin: float
    gap_at_zero: float
    gap_at_xstar: float


def diffusion_inequality(psi, g, xstar, grid, tol=1e-9):
    """Chord bound for diffusions on [0, xstar].

    With slope = (g(x*)-g(0))/(psi(x*)-psi(0)) and intercept
    (psi(0)g(x*)-psi(x*)g(0))/(psi(x*)-psi(0)), checks
    psi(x)*slope >= intercept + g(x) with slack ``tol``; equality must hold
    at both endpoints.  Failure at an interior point flags a wrong threshold.
    """
    xstar = float(xstar)
    p0, ps = float(psi(0.0)), float(psi(xstar))
    g0, gs = float(g(0.0)), float(g(xstar))
    denom = ps - p0
    if denom <= 0:
        raise InvalidParameter("psi must increase over [0, xstar]")
    slope = (gs - g0) / denom
    intercept = (p0 * gs - ps * g0) / denom

    def margin(x):
        return float(psi(x)) * slope - intercept - float(g(x))

    pts = np.unique(np.clip(np.append(np.asarray(grid, dtype=float),
                                      [0.0, xstar]), 0.0, xstar))
    margins = np.array([margin(x) for x in pts])
    i = int(np.argmin(margins))
    gap0, gap_star = abs(margin(0.0)), abs(margin(xstar))
    ok = bool(margins[i] >= -tol and gap0 <= tol and gap_star <= tol)
    return DiffusionInequalityReport(ok=ok, min_margin=float(margins[i]),
                                     argmin=float(pts[i]),
                                     gap_at_zero=float(gap0),
                                     gap_at_xstar=float(gap_star))
