"""Path-level Monte Carlo oracle for threshold restart strategies.

Everything here works directly on simulated paths and never touches the
distribution of the running maximum, so agreement with the analytic side is
evidence and not circularity.

Engineering notes, since the budget is one CPU core:

* states are float32, payoffs are float64; one 2**17-path block at a time
* antithetic pairing: the second half of each block reuses negated normals
* crossings between grid points are caught with the exact Brownian bridge
  probability, evaluated as E * sigma^2 dt / 2 > d0 * d1 with E standard
  exponential, drawn only for candidates that have any realistic chance
* a path that creeps over the trigger records the reward at the barrier
  exactly; a jump over it records the overshot endpoint
* diffusive crossing times are sampled exactly: given the step endpoints,
  the crossing fraction is v = y/(1+y) with y inverse Gaussian, so no
  placement bias survives; the path restarts with a fresh normal over the
  remaining fraction of the step
"""

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidParameter,
    ResolutionTooCoarse,
    UnstableStep,
    UnsupportedModel,
)
from .maxlaw import restricted_expectation
from .problem import (
    BrownianWithDrift,
    MixedExpUpwardJumpDiffusion,
    ReflectedBrownianMotion,
    SpectrallyNegativeJumpDiffusion,
)


@dataclass(frozen=True)
class SimConfig:
    """Tuning knobs for the path engine.

    The horizon comes from the discount floor: stepping stops once
    exp(-rate * t) falls below ``discount_floor``, and the reported
    truncation bound is the crude remainder estimate at that point.
    """

    dt: float = 0.01
    n_paths: int = 100_000
    seed: int = 0
    discount_floor: float = 1e-5
    antithetic: bool = True
    bridge: bool = True
    block_size: int = 1 << 17

    def __post_init__(self):
        if self.dt <= 0.0:
            raise InvalidParameter("dt must be positive")
        if self.n_paths < 2:
            raise InvalidParameter("need at least two paths")
        if not 0.0 < self.discount_floor < 1.0:
            raise InvalidParameter("discount_floor must lie in (0, 1)")
        if self.block_size < 2 or self.block_size % 2:
            raise InvalidParameter("block_size must be even and at least 2")
        if self.seed < 0:
            raise InvalidParameter("seed must be nonnegative")


@dataclass(frozen=True)
class ThresholdStrategy:
    """Restart to the origin whenever the state reaches ``threshold``."""

    threshold: float
    restart_state: float = 0.0

    def __post_init__(self):
        if self.threshold <= 0.0:
            raise InvalidParameter("threshold must be positive")
        if self.restart_state != 0.0:
            raise InvalidParameter("restarts are pinned to the origin")


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n_paths: int
    n_steps: int
    elapsed_seconds: float
    truncation_bias_bound: float

    def z_score(self, reference):
        return (self.mean - float(reference)) / self.stderr


def _blocks(n_paths, block_size):
    n = int(n_paths)
    if n % 2:
        n += 1
    out = []
    while n > 0:
        b = min(block_size, n)
        out.append(b)
        n -= b
    return out


def _dynamics(process):
    if isinstance(process, BrownianWithDrift):
        return "levy", process.mu, process.sigma, None
    if isinstance(process, SpectrallyNegativeJumpDiffusion):
        return ("levy", process.mu, process.sigma,
                ("down", process.jump_rate, process.jump_mean))
    if isinstance(process, MixedExpUpwardJumpDiffusion):
        return ("levy", process.mu, process.sigma,
                ("up", process.jump_rate, process.up_rates, process.up_weights))
    if isinstance(process, ReflectedBrownianMotion):
        return "reflected", 0.0, process.sigma, None
    raise UnsupportedModel(f"cannot simulate {type(process).__name__}")


def _jump_sampler(jump, dt):
    if jump is None:
        return None
    if jump[0] == "down":
        lam, jmean = jump[1], jump[2]

        def draw(rng, n):
            counts = rng.poisson(lam * dt, n)
            # sum of k unit exponentials is Gamma(k); k = 0 gives 0 exactly
            return -jmean * rng.standard_gamma(counts)

        return draw

    lam, rates, weights = jump[1], np.asarray(jump[2]), np.asarray(jump[3])
    cumw = np.cumsum(weights)

    def draw(rng, n):
        counts = rng.poisson(lam * dt, n).copy()
        total = np.zeros(n)
        while True:
            idx = np.nonzero(counts > 0)[0]
            if idx.size == 0:
                break
            comp = np.minimum(np.searchsorted(cumw, rng.random(idx.size)),
                              len(rates) - 1)
            total[idx] += rng.standard_exponential(idx.size) / rates[comp]
            counts[idx] -= 1
        return total

    return draw


def _warn_if_coarse(rate, jump, dt):
    if rate * dt > 0.01:
        warnings.warn(UnstableStep(
            f"rate * dt = {rate * dt:.3g} > 0.01: discounting is coarse"))
    if jump is not None and jump[1] * dt > 0.05:
        warnings.warn(UnstableStep(
            f"jump_rate * dt = {jump[1] * dt:.3g} > 0.05: multiple jumps "
            "per step are likely"))


def _check_resolution(trigger, sigma, dt):
    floor_len = sigma * math.sqrt(10.0 * dt)
    if trigger < floor_len:
        raise ResolutionTooCoarse(
            f"trigger {trigger:.4g} sits below the step resolution "
            f"{floor_len:.4g}; shrink dt to at most "
            f"{(trigger / sigma) ** 2 / 10.0:.3g}")


def _draw_normals(rng, n, antithetic):
    if antithetic:
        zh = rng.standard_normal(n // 2, dtype=np.float32)
        return np.concatenate([zh, -zh])
    return rng.standard_normal(n, dtype=np.float32)


def _crossing_fraction(rng, d0, dist_past, inv_var):
    """Exact crossing fraction of a Brownian segment given its endpoints.

    Conditioned on starting d0 below the barrier and ending |dist_past|
    away from it (either side), the first-passage time, as a fraction v of
    the step, is v = y/(1+y) with y inverse Gaussian(d0/dist, d0^2/var).
    Sampled with one normal and one uniform per crossing.
    """
    d0 = np.maximum(d0.astype(np.float64), 1e-9)
    dist = np.maximum(dist_past.astype(np.float64), 1e-9)
    lam = d0 * d0 * inv_var
    mu = d0 / dist
    w = rng.standard_normal(d0.size) ** 2
    c = mu / (2.0 * lam)
    x = np.maximum(mu + c * mu * w - c * np.sqrt(mu * w * (4.0 * lam + mu * w)),
                   1e-300)
    pick = rng.random(d0.size) * (mu + x) <= mu
    with np.errstate(over="ignore"):
        y = np.where(pick, x, mu * mu / x)
        v = y / (1.0 + y)
    # y overflowing to inf means the crossing hugs the end of the step
    return np.clip(np.where(np.isfinite(v), v, 1.0), 0.0, 1.0)


def _levy_block(mu, sigma, jump, g, rate, trigger, start, cfg, absorb,
                n_block, n_steps, rng):
    dt = cfg.dt
    up = jump is not None and jump[0] == "up"
    draw_jumps = _jump_sampler(jump, dt)
    t32 = np.float32(trigger)
    drift32 = np.float32(mu * dt)
    sig32 = np.float32(sigma * math.sqrt(dt))
    dt32 = np.float32(dt)
    qcut = np.float32(10.0 * sigma * sigma * dt)
    ehalf = np.float32(0.5 * sigma * sigma * dt)
    inv_var = 1.0 / (sigma * sigma * dt)
    mu32 = np.float32(mu)
    sigma32 = np.float32(sigma)
    gbar = float(g(trigger))
    rdt = rate * dt
    disc = np.exp(-rate * dt * np.arange(n_steps))

    x = np.full(n_block, start, dtype=np.float32)
    pay = np.zeros(n_block, dtype=np.float64)
    u_all = np.zeros(n_block, dtype=np.float32)
    alive = np.ones(n_block, dtype=bool) if absorb else None

    for k in range(n_steps):
        z = _draw_normals(rng, n_block, cfg.antithetic)
        xd = x + drift32 + sig32 * z
        if draw_jumps is not None:
            x1 = xd + draw_jumps(rng, n_block).astype(np.float32)
        else:
            x1 = xd

        creep = xd >= t32
        if up:
            over = ~creep & (x1 >= t32)
            live = ~creep & ~over
        else:
            over = None
            live = ~creep
        if absorb:
            creep = creep & alive
            live = live & alive
            if over is not None:
                over = over & alive

        d0 = t32 - x
        d1 = t32 - xd
        if cfg.bridge:
            q = d0 * d1
            ci = np.nonzero(live & (q < qcut))[0]
            e = rng.standard_exponential(ci.size, dtype=np.float32)
            bhit = ci[e * ehalf > q[ci]]
        else:
            bhit = np.empty(0, dtype=np.intp)

        cri = np.nonzero(creep)[0]
        if cri.size:
            ucr = _crossing_fraction(rng, d0[cri], -d1[cri], inv_var)
            u_all[cri] = ucr
            pay[cri] += disc[k] * np.exp(-rdt * ucr) * gbar
        if over is not None:
            ovi = np.nonzero(over)[0]
            if ovi.size:
                u_all[ovi] = 0.5
                gj = np.asarray(g(x1[ovi].astype(np.float64)), dtype=np.float64)
                pay[ovi] += disc[k] * math.exp(-0.5 * rdt) * gj
        else:
            ovi = np.empty(0, dtype=np.intp)
        if bhit.size:
            ub = _crossing_fraction(rng, d0[bhit], d1[bhit], inv_var)
            u_all[bhit] = ub
            pay[bhit] += disc[k] * np.exp(-rdt * ub) * gbar

        x = x1
        crossed = np.concatenate([cri, ovi, bhit])
        if crossed.size:
            if absorb:
                alive[crossed] = False
            else:
                rem = (np.float32(1.0) - u_all[crossed]) * dt32
                z2 = rng.standard_normal(crossed.size, dtype=np.float32)
                x[crossed] = mu32 * rem + sigma32 * np.sqrt(rem) * z2
    return pay, gbar


def _reflected_block(sigma, g, rate, trigger, start, cfg, absorb,
                     n_block, n_steps, rng):
    dt = cfg.dt
    t32 = np.float32(trigger)
    sig32 = np.float32(sigma * math.sqrt(dt))
    dt32 = np.float32(dt)
    qcut = np.float32(10.0 * sigma * sigma * dt)
    ehalf = np.float32(0.5 * sigma * sigma * dt)
    inv_var = 1.0 / (sigma * sigma * dt)
    sigma32 = np.float32(sigma)
    gbar = float(g(trigger))
    rdt = rate * dt
    disc = np.exp(-rate * dt * np.arange(n_steps))

    # the reflected path is |w| for a signed Brownian path w, so "reach the
    # trigger" means w exits (-trigger, trigger); both barriers get a bridge
    w = np.full(n_block, start, dtype=np.float32)
    pay = np.zeros(n_block, dtype=np.float64)
    u_all = np.zeros(n_block, dtype=np.float32)
    alive = np.ones(n_block, dtype=bool) if absorb else None

    for k in range(n_steps):
        z = _draw_normals(rng, n_block, cfg.antithetic)
        wd = w + sig32 * z
        creep = np.abs(wd) >= t32
        live = ~creep
        if absorb:
            creep = creep & alive
            live = live & alive

        if cfg.bridge:
            d0u = t32 - w
            d1u = t32 - wd
            qup = d0u * d1u
            d0d = t32 + w
            d1d = t32 + wd
            qdn = d0d * d1d
            ciu = np.nonzero(live & (qup < qcut))[0]
            e1 = rng.standard_exponential(ciu.size, dtype=np.float32)
            hu = ciu[e1 * ehalf > qup[ciu]]
            cid = np.nonzero(live & (qdn < qcut))[0]
            e2 = rng.standard_exponential(cid.size, dtype=np.float32)
            hd = np.setdiff1d(cid[e2 * ehalf > qdn[cid]], hu)
        else:
            hu = hd = np.empty(0, dtype=np.intp)

        cri = np.nonzero(creep)[0]
        if cri.size:
            seg_up = wd[cri] > 0
            dist0 = np.where(seg_up, t32 - w[cri], t32 + w[cri])
            past = np.abs(wd[cri]) - t32
            ucr = _crossing_fraction(rng, dist0, past, inv_var)
            u_all[cri] = ucr
            pay[cri] += disc[k] * np.exp(-rdt * ucr) * gbar
        if hu.size:
            uu = _crossing_fraction(rng, d0u[hu], d1u[hu], inv_var)
            u_all[hu] = uu
            pay[hu] += disc[k] * np.exp(-rdt * uu) * gbar
        if hd.size:
            ud = _crossing_fraction(rng, d0d[hd], d1d[hd], inv_var)
            u_all[hd] = ud
            pay[hd] += disc[k] * np.exp(-rdt * ud) * gbar

        w = wd
        crossed = np.concatenate([cri, hu, hd])
        if crossed.size:
            if absorb:
                alive[crossed] = False
            else:
                rem = (np.float32(1.0) - u_all[crossed]) * dt32
                z2 = rng.standard_normal(crossed.size, dtype=np.float32)
                w[crossed] = sigma32 * np.sqrt(rem) * z2
    return pay, gbar


def _run(spec, trigger, start, cfg, absorb):
    kind, mu, sigma, jump = _dynamics(spec.process)
    if kind == "reflected" and start < 0.0:
        raise InvalidParameter("reflected paths start at nonnegative states")
    if trigger <= start:
        raise InvalidParameter("trigger must exceed the starting state")
    _warn_if_coarse(spec.rate, jump, cfg.dt)
    n_steps = int(math.ceil(-math.log(cfg.discount_floor)
                            / (spec.rate * cfg.dt)))
    g = spec.reward
    t0 = time.perf_counter()
    units = []
    n_done = 0
    for bi, nb in enumerate(_blocks(cfg.n_paths, cfg.block_size)):
        rng = np.random.Generator(np.random.Philox(cfg.seed).jumped(bi))
        if kind == "reflected":
            pay, gbar = _reflected_block(sigma, g, spec.rate, trigger, start,
                                         cfg, absorb, nb, n_steps, rng)
        else:
            pay, gbar = _levy_block(mu, sigma, jump, g, spec.rate, trigger,
                                    start, cfg, absorb, nb, n_steps, rng)
        if cfg.antithetic:
            half = nb // 2
            units.append(0.5 * (pay[:half] + pay[half:]))
        else:
            units.append(pay)
        n_done += nb
    u = np.concatenate(units)
    mean = float(np.mean(u))
    stderr = float(np.std(u, ddof=1) / math.sqrt(u.size))
    tail_disc = math.exp(-spec.rate * n_steps * cfg.dt)
    bound = tail_disc * (abs(gbar) + abs(mean))
    return Estimate(mean=mean, stderr=stderr, n_paths=n_done, n_steps=n_steps,
                    elapsed_seconds=time.perf_counter() - t0,
                    truncation_bias_bound=bound)


def simulate_value(spec, strategy, config):
    """Estimate the value of a threshold restart strategy from the origin.

    Each crossing pays the discounted reward at the recorded crossing state
    and the path restarts at the origin within the same step.
    """
    if not isinstance(strategy, ThresholdStrategy):
        raise InvalidParameter("strategy must be a ThresholdStrategy")
    _, _, sigma, _ = _dynamics(spec.process)
    _check_resolution(strategy.threshold, sigma, config.dt)
    return _run(spec, strategy.threshold, 0.0, config, absorb=False)


def first_passage_value(spec, start, barrier, config):
    """Estimate E_start[exp(-rate * tau) g(X_tau)] for the level ``barrier``.

    Paths are absorbed at the first crossing; anything still running at the
    horizon contributes zero, which is covered by the truncation bound.
    """
    return _run(spec, float(barrier), float(start), config, absorb=True)


def fluctuation_check(spec, law, f, start, barrier, config):
    """Path estimate of the passage value against the max-law expectation.

    The analytic side is E_start[f(M); M >= barrier] under the law of the
    overall maximum; the path side never sees that law.  Returns the two
    numbers and the z-score of their difference.
    """
    est = first_passage_value(spec, start, barrier, config)
    analytic = restricted_expectation(law, float(start), f, float(barrier))
    return {
        "start": float(start),
        "barrier": float(barrier),
        "estimate": est,
        "analytic": float(analytic),
        "z": est.z_score(analytic),
    }


def simulate_eps_convergence(spec, eps_grid, config, analytic=None):
    """Estimate stationary trigger values along a ladder of small triggers.

    ``analytic``, if given, maps a trigger to its exact value; each row then
    carries the z-score of the path estimate against it.
    """
    rows = []
    for eps in eps_grid:
        est = simulate_value(spec, ThresholdStrategy(float(eps)), config)
        row = {"eps": float(eps), "estimate": est}
        if analytic is not None:
            ref = float(analytic(float(eps)))
            row["analytic"] = ref
            row["z"] = est.z_score(ref)
        rows.append(row)
    return rows
