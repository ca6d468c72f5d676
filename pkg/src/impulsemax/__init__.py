"""Optimal restart thresholds for maximum-driven impulse rewards.

The library solves one-dimensional restart control problems in which every
intervention collects a reward tied to the running maximum seen so far.  The
reward g is represented as g(x) = E_x[f(M)] for the all-time maximum M of
the killed driver; the optimal policy is a threshold, found as the smallest
fixed point of a scalar map; an independent path simulator cross-checks the
analytic answers.
"""

from .errors import (
    AuditFailed,
    Assumption2Violated,
    Divergent,
    DomainError,
    ImpulseError,
    InconsistentMetadata,
    InfiniteValueRegime,
    IntegrabilityViolation,
    InvalidParameter,
    MalformedConfig,
    NoRoot,
    NoSignChange,
    OutOfRange,
    ResolutionTooCoarse,
    RewardAtZeroPositive,
    ShapeViolation,
    UnstableStep,
    UnsupportedModel,
    UnsupportedVariant,
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
    levy_exponent,
    parse_problem,
    serialize_problem,
)
from .maxlaw import (
    DiffusionFactorized,
    ExponentialTail,
    MixedExponential,
    ReflectedBMMax,
    TabulatedLaw,
    complement_expectation,
    moment,
    restricted_expectation,
    sample_max,
    tail_prob,
    theta_from_model,
)
from .represent import (
    RepresentingFunction,
    appell,
    geometric_representing,
    reflected_bm_representing,
    tabulated_representing,
    verify_representation,
)
from .solve import (
    Assumption2Report,
    CurveSketch,
    check_assumption2,
    classify,
    diffusion_inequality,
    fixed_point_chat,
    harmonic_psi,
    root_xc,
    sketch,
)
from .valuefn import (
    ValueFunction,
    eps_value,
    eps_value_at_zero,
    smooth_fit_gap,
    value_with_threshold,
    verification_audit,
)
from .mc import (
    Estimate,
    SimConfig,
    ThresholdStrategy,
    first_passage_value,
    fluctuation_check,
    simulate_eps_convergence,
    simulate_value,
)
from .pipeline import Solution, build_law, build_representing, load_problem, solve_problem
from .estimator import ImpulseControlModel

__version__ = "0.1.0"

__all__ = [
    "AuditFailed", "Assumption2Violated", "Divergent", "DomainError",
    "ImpulseError", "InconsistentMetadata", "InfiniteValueRegime",
    "IntegrabilityViolation", "InvalidParameter", "MalformedConfig",
    "NoRoot", "NoSignChange", "OutOfRange", "ResolutionTooCoarse",
    "RewardAtZeroPositive", "ShapeViolation", "UnstableStep",
    "UnsupportedModel", "UnsupportedVariant",
    "BrownianWithDrift", "GeometricReward", "MixedExpUpwardJumpDiffusion",
    "PowerReward", "ProblemSpec", "ReflectedBrownianMotion",
    "SpectrallyNegativeJumpDiffusion", "TabulatedReward",
    "levy_exponent", "parse_problem", "serialize_problem",
    "DiffusionFactorized", "ExponentialTail", "MixedExponential",
    "ReflectedBMMax", "TabulatedLaw", "complement_expectation", "moment",
    "restricted_expectation", "sample_max", "tail_prob", "theta_from_model",
    "RepresentingFunction", "appell", "geometric_representing",
    "reflected_bm_representing", "tabulated_representing",
    "verify_representation",
    "Assumption2Report", "CurveSketch", "check_assumption2", "classify",
    "diffusion_inequality", "fixed_point_chat", "harmonic_psi", "root_xc",
    "sketch",
    "ValueFunction", "eps_value", "eps_value_at_zero", "smooth_fit_gap",
    "value_with_threshold", "verification_audit",
    "Estimate", "SimConfig", "ThresholdStrategy", "first_passage_value",
    "fluctuation_check", "simulate_eps_convergence", "simulate_value",
    "Solution", "build_law", "build_representing", "load_problem",
    "solve_problem",
    "ImpulseControlModel",
]
