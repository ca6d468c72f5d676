"""Problem descriptors: driving process, reward family, discount rate.

A problem is the triple (process, reward, rate) with restarts pinned to the
origin.  Process descriptors are declarative; the only computation they carry
is the Levy exponent Psi with Psi(lambda) = log E_0 exp(lambda X_1) for the
Levy models.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DomainError,
    IntegrabilityViolation,
    InvalidParameter,
    MalformedConfig,
    UnsupportedModel,
)


def _require(cond, msg):
    if not cond:
        raise InvalidParameter(msg)


# ---------------------------------------------------------------------------
# process descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BrownianWithDrift:
    """X_t = mu*t + sigma*B_t."""

    mu: float
    sigma: float = 1.0

    def __post_init__(self):
        _require(self.sigma > 0, "sigma must be positive")


@dataclass(frozen=True)
class SpectrallyNegativeJumpDiffusion:
    """Brownian part plus compound-Poisson exponential downward jumps.

    Jumps arrive at rate ``jump_rate`` and have size -J with
    J ~ Exp(1/jump_mean), so E J = jump_mean.
    """

    mu: float
    sigma: float
    jump_rate: float
    jump_mean: float

    def __post_init__(self):
        _require(self.sigma > 0, "sigma must be positive")
        _require(self.jump_rate >= 0, "jump_rate must be nonnegative")
        _require(self.jump_mean > 0, "jump_mean must be positive")


@dataclass(frozen=True)
class MixedExpUpwardJumpDiffusion:
    """Brownian part plus upward jumps drawn from a mixture of exponentials.

    A jump has density sum_k w_k * eta_k * exp(-eta_k u) on u > 0, with
    rates ``up_rates`` and weights ``up_weights`` (summing to one).
    """

    mu: float
    sigma: float
    up_rates: tuple
    up_weights: tuple
    jump_rate: float

    def __post_init__(self):
        object.__setattr__(self, "up_rates", tuple(float(r) for r in self.up_rates))
        object.__setattr__(self, "up_weights", tuple(float(w) for w in self.up_weights))
        _require(self.sigma > 0, "sigma must be positive")
        _require(self.jump_rate >= 0, "jump_rate must be nonnegative")
        _require(len(self.up_rates) == len(self.up_weights) > 0,
                 "up_rates and up_weights must be nonempty and of equal length")
        _require(all(r > 0 for r in self.up_rates), "up_rates must be positive")
        _require(all(w > 0 for w in self.up_weights), "up_weights must be positive")
        _require(abs(sum(self.up_weights) - 1.0) < 1e-12,
                 "up_weights must sum to one")


@dataclass(frozen=True)
class ReflectedBrownianMotion:
    """|sigma * B_t|, reflected at the origin.  Not a Levy process."""

    sigma: float = 1.0

    def __post_init__(self):
        _require(self.sigma > 0, "sigma must be positive")


LEVY_MODELS = (BrownianWithDrift, SpectrallyNegativeJumpDiffusion,
               MixedExpUpwardJumpDiffusion)


def levy_exponent(process, lam):
    """Psi(lam) = log E_0 exp(lam X_1) for the Levy models.

    Raises
    ------
    UnsupportedModel
        For non-Levy processes (reflected Brownian motion).
    DomainError
        Outside the strip where the exponent is finite.
    """
    lam = float(lam)
    if isinstance(process, BrownianWithDrift):
        return process.mu * lam + 0.5 * process.sigma ** 2 * lam ** 2
    if isinstance(process, SpectrallyNegativeJumpDiffusion):
        if 1.0 + lam * process.jump_mean <= 0.0:
            raise DomainError("lambda must exceed -1/jump_mean")
        diff = process.mu * lam + 0.5 * process.sigma ** 2 * lam ** 2
        return diff + process.jump_rate * (1.0 / (1.0 + lam * process.jump_mean) - 1.0)
    if isinstance(process, MixedExpUpwardJumpDiffusion):
        if lam >= min(process.up_rates):
            raise DomainError("lambda must stay below the smallest upward jump rate")
        diff = process.mu * lam + 0.5 * process.sigma ** 2 * lam ** 2
        mgf = sum(w * eta / (eta - lam)
                  for w, eta in zip(process.up_weights, process.up_rates))
        return diff + process.jump_rate * (mgf - 1.0)
    if isinstance(process, ReflectedBrownianMotion):
        raise UnsupportedModel("reflected Brownian motion is not a Levy process")
    raise UnsupportedModel(f"unknown process {type(process).__name__}")


def levy_exponent_prime(process, lam):
    """d/dlam of the Levy exponent (used to polish root finding)."""
    lam = float(lam)
    if isinstance(process, BrownianWithDrift):
        return process.mu + process.sigma ** 2 * lam
    if isinstance(process, SpectrallyNegativeJumpDiffusion):
        if 1.0 + lam * process.jump_mean <= 0.0:
            raise DomainError("lambda must exceed -1/jump_mean")
        return (process.mu + process.sigma ** 2 * lam
                - process.jump_rate * process.jump_mean
                / (1.0 + lam * process.jump_mean) ** 2)
    if isinstance(process, MixedExpUpwardJumpDiffusion):
        if lam >= min(process.up_rates):
            raise DomainError("lambda must stay below the smallest upward jump rate")
        dm = sum(w * eta / (eta - lam) ** 2
                 for w, eta in zip(process.up_weights, process.up_rates))
        return process.mu + process.sigma ** 2 * lam + process.jump_rate * dm
    raise UnsupportedModel(f"no Levy exponent for {type(process).__name__}")


# ---------------------------------------------------------------------------
# reward families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerReward:
    """g(x) = x**m, integer m >= 1."""

    m: int

    def __post_init__(self):
        m = self.m
        if isinstance(m, float) and m.is_integer():
            m = int(m)
            object.__setattr__(self, "m", m)
        _require(isinstance(m, int) and not isinstance(m, bool) and m >= 1,
                 "m must be an integer >= 1")

    def __call__(self, x):
        return np.asarray(x, dtype=float) ** self.m if np.ndim(x) else float(x) ** self.m

    @property
    def at_zero(self):
        return 0.0


@dataclass(frozen=True)
class GeometricReward:
    """g(x) = exp(b*x) - k with b > 0, k > 1."""

    b: float
    k: float

    def __post_init__(self):
        _require(self.b > 0, "b must be positive")
        _require(self.k > 1, "k must exceed one")

    def __call__(self, x):
        return np.exp(self.b * np.asarray(x, dtype=float)) - self.k if np.ndim(x) \
            else math.exp(self.b * float(x)) - self.k

    @property
    def at_zero(self):
        return 1.0 - self.k


@dataclass(frozen=True)
class TabulatedReward:
    """Reward sampled on a grid; linear interpolation between nodes.

    Solving additionally needs the representing function on a grid
    (``f_x``/``f_values``); inverting the reward for it is out of scope.
    """

    x: tuple
    g: tuple
    f_x: tuple = field(default=None)
    f_values: tuple = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "g", tuple(float(v) for v in self.g))
        if (self.f_x is None) != (self.f_values is None):
            raise InvalidParameter("f_x and f_values must be supplied together")
        if self.f_x is not None:
            object.__setattr__(self, "f_x", tuple(float(v) for v in self.f_x))
            object.__setattr__(self, "f_values", tuple(float(v) for v in self.f_values))
        _require(len(self.x) == len(self.g) >= 2, "need at least two grid nodes")
        _require(all(b > a for a, b in zip(self.x, self.x[1:])),
                 "grid must be strictly increasing")
        if self.f_x is not None:
            _require(len(self.f_x) == len(self.f_values) >= 2,
                     "need at least two representing-function nodes")

    def __call__(self, x):
        xv = np.asarray(x, dtype=float)
        if np.any(xv < self.x[0] - 1e-12) or np.any(xv > self.x[-1] + 1e-12):
            raise DomainError("evaluation outside the tabulated grid")
        out = np.interp(xv, self.x, self.g)
        return out if np.ndim(x) else float(out)

    @property
    def at_zero(self):
        return self(0.0)


# ---------------------------------------------------------------------------
# the problem triple
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProblemSpec:
    """(process, reward, rate) with restarts pinned to the origin."""

    process: object
    reward: object
    rate: float
    restart_state: float = 0.0

    def __post_init__(self):
        _require(self.rate > 0, "rate must be positive")
        if self.restart_state != 0.0:
            raise InvalidParameter("restart_state must be 0")
        if isinstance(self.reward, GeometricReward):
            b = self.reward.b
            if isinstance(self.process, LEVY_MODELS):
                try:
                    psi_b = levy_exponent(self.process, b)
                except DomainError as exc:
                    raise IntegrabilityViolation(
                        f"exp({b}*x) reward is not integrable for this process"
                    ) from exc
                if psi_b >= self.rate:
                    raise IntegrabilityViolation(
                        f"need Psi(b) < rate, got Psi({b}) = {psi_b} >= {self.rate}"
                    )
            elif isinstance(self.process, ReflectedBrownianMotion):
                if b >= math.sqrt(2.0 * self.rate) / self.process.sigma:
                    raise IntegrabilityViolation(
                        "need b < sqrt(2*rate)/sigma for a reflected driver"
                    )


# ---------------------------------------------------------------------------
# JSON config parsing / serialization
# ---------------------------------------------------------------------------

_PROCESS_TAGS = {
    "brownian": BrownianWithDrift,
    "brownian_with_drift": BrownianWithDrift,
    "spectrally_negative_jump_diffusion": SpectrallyNegativeJumpDiffusion,
    "snjd": SpectrallyNegativeJumpDiffusion,
    "mixed_exp_upward_jump_diffusion": MixedExpUpwardJumpDiffusion,
    "mixed_exp_upward": MixedExpUpwardJumpDiffusion,
    "reflected_brownian": ReflectedBrownianMotion,
    "reflected_bm": ReflectedBrownianMotion,
}

_CANONICAL_PROCESS_TAG = {
    BrownianWithDrift: "brownian",
    SpectrallyNegativeJumpDiffusion: "spectrally_negative_jump_diffusion",
    MixedExpUpwardJumpDiffusion: "mixed_exp_upward_jump_diffusion",
    ReflectedBrownianMotion: "reflected_brownian",
}

_REWARD_TAGS = {
    "power": PowerReward,
    "geometric": GeometricReward,
    "tabulated": TabulatedReward,
}

_CANONICAL_REWARD_TAG = {v: k for k, v in _REWARD_TAGS.items()}

_PROCESS_FIELDS = {
    BrownianWithDrift: ("mu", "sigma"),
    SpectrallyNegativeJumpDiffusion: ("mu", "sigma", "jump_rate", "jump_mean"),
    MixedExpUpwardJumpDiffusion: ("mu", "sigma", "up_rates", "up_weights", "jump_rate"),
    ReflectedBrownianMotion: ("sigma",),
}

_REWARD_FIELDS = {
    PowerReward: ("m",),
    GeometricReward: ("b", "k"),
    TabulatedReward: ("x", "g", "f_x", "f_values"),
}


def _build_from_dict(section, tags, fields, what):
    if not isinstance(section, dict):
        raise MalformedConfig(f"{what} section must be an object")
    if "type" not in section:
        raise MalformedConfig(f"{what} section needs a 'type' key")
    tag = section["type"]
    if tag not in tags:
        raise MalformedConfig(f"unknown {what} type {tag!r}")
    cls = tags[tag]
    allowed = fields[cls]
    kwargs = {}
    for key, val in section.items():
        if key == "type":
            continue
        if key not in allowed:
            raise MalformedConfig(f"unknown {what} field {key!r} for type {tag!r}")
        kwargs[key] = tuple(val) if isinstance(val, list) else val
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise MalformedConfig(f"missing {what} fields for type {tag!r}: {exc}") from exc


def process_from_dict(section):
    return _build_from_dict(section, _PROCESS_TAGS, _PROCESS_FIELDS, "process")


def reward_from_dict(section):
    return _build_from_dict(section, _REWARD_TAGS, _REWARD_FIELDS, "reward")


def parse_problem(text):
    """Parse a JSON config with top-level keys process, reward, rate.

    An optional ``maxlaw`` block (running-maximum factorization supplied by
    the user) is tolerated here and consumed by the pipeline.
    """
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedConfig(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise MalformedConfig("config must be a JSON object")
    allowed = {"process", "reward", "rate", "restart_state", "maxlaw"}
    unknown = set(cfg) - allowed
    if unknown:
        raise MalformedConfig(f"unknown top-level keys: {sorted(unknown)}")
    for key in ("process", "reward", "rate"):
        if key not in cfg:
            raise MalformedConfig(f"missing top-level key {key!r}")
    if not isinstance(cfg["rate"], (int, float)) or isinstance(cfg["rate"], bool):
        raise MalformedConfig("rate must be a number")
    return ProblemSpec(
        process=process_from_dict(cfg["process"]),
        reward=reward_from_dict(cfg["reward"]),
        rate=float(cfg["rate"]),
        restart_state=float(cfg.get("restart_state", 0.0)),
    )


def serialize_problem(spec):
    """ProblemSpec -> JSON-ready dict; parse_problem inverts it exactly."""
    proc = {"type": _CANONICAL_PROCESS_TAG[type(spec.process)]}
    for name in _PROCESS_FIELDS[type(spec.process)]:
        val = getattr(spec.process, name)
        proc[name] = list(val) if isinstance(val, tuple) else val
    rew = {"type": _CANONICAL_REWARD_TAG[type(spec.reward)]}
    for name in _REWARD_FIELDS[type(spec.reward)]:
        val = getattr(spec.reward, name)
        if val is None:
            continue
        rew[name] = list(val) if isinstance(val, tuple) else val
    return {"process": proc, "reward": rew, "rate": spec.rate,
            "restart_state": spec.restart_state}
