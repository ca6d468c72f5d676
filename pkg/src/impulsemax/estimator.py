"""Estimator facade over the solver, in the scikit-learn idiom.

There is no training data: fit() solves the configured control problem and
exposes the solved quantities as trailing-underscore attributes.  predict()
evaluates the value function at states, transform() tabulates the columns a
report needs.  Flat constructor parameters keep get_params / set_params /
clone working.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import MalformedConfig
from .pipeline import solve_problem
from .problem import (
    BrownianWithDrift,
    GeometricReward,
    MixedExpUpwardJumpDiffusion,
    PowerReward,
    ProblemSpec,
    ReflectedBrownianMotion,
    SpectrallyNegativeJumpDiffusion,
    TabulatedReward,
)
from .validation import as_state_array


class ImpulseControlModel(BaseEstimator):
    """Solve a restart control problem and evaluate its value function.

    Parameters mirror the JSON config, flattened: ``process`` and ``reward``
    select the families, the remaining fields feed whichever family is
    selected and are ignored otherwise.
    """

    def __init__(self, process="brownian", mu=0.0, sigma=1.0, jump_rate=1.0,
                 jump_mean=1.0, up_rates=None, up_weights=None,
                 reward="power", m=2, b=1.0, k=2.0,
                 reward_x=None, reward_g=None, f_x=None, f_values=None,
                 rate=0.5, maxlaw=None, fixed_point_tol=1e-11,
                 scan_points=512, assumption2_grid=256, domain_cap=None):
        self.process = process
        self.mu = mu
        self.sigma = sigma
        self.jump_rate = jump_rate
        self.jump_mean = jump_mean
        self.up_rates = up_rates
        self.up_weights = up_weights
        self.reward = reward
        self.m = m
        self.b = b
        self.k = k
        self.reward_x = reward_x
        self.reward_g = reward_g
        self.f_x = f_x
        self.f_values = f_values
        self.rate = rate
        self.maxlaw = maxlaw
        self.fixed_point_tol = fixed_point_tol
        self.scan_points = scan_points
        self.assumption2_grid = assumption2_grid
        self.domain_cap = domain_cap

    def _build_process(self):
        tag = self.process
        if tag in ("brownian", "brownian_with_drift"):
            return BrownianWithDrift(mu=self.mu, sigma=self.sigma)
        if tag in ("spectrally_negative_jump_diffusion", "snjd"):
            return SpectrallyNegativeJumpDiffusion(
                mu=self.mu, sigma=self.sigma, jump_rate=self.jump_rate,
                jump_mean=self.jump_mean)
        if tag in ("mixed_exp_upward_jump_diffusion", "mixed_exp_upward"):
            if self.up_rates is None or self.up_weights is None:
                raise MalformedConfig("upward jumps need up_rates/up_weights")
            return MixedExpUpwardJumpDiffusion(
                mu=self.mu, sigma=self.sigma, up_rates=tuple(self.up_rates),
                up_weights=tuple(self.up_weights), jump_rate=self.jump_rate)
        if tag in ("reflected_brownian", "reflected_bm"):
            return ReflectedBrownianMotion(sigma=self.sigma)
        raise MalformedConfig(f"unknown process {tag!r}")

    def _build_reward(self):
        tag = self.reward
        if tag == "power":
            return PowerReward(m=self.m)
        if tag == "geometric":
            return GeometricReward(b=self.b, k=self.k)
        if tag == "tabulated":
            if self.reward_x is None or self.reward_g is None:
                raise MalformedConfig("tabulated rewards need reward_x/reward_g")
            return TabulatedReward(
                x=tuple(self.reward_x), g=tuple(self.reward_g),
                f_x=None if self.f_x is None else tuple(self.f_x),
                f_values=None if self.f_values is None
                else tuple(self.f_values))
        raise MalformedConfig(f"unknown reward {tag!r}")

    def fit(self, X=None, y=None):
        """Solve the configured problem; X and y are accepted and ignored."""
        spec = ProblemSpec(process=self._build_process(),
                           reward=self._build_reward(), rate=self.rate)
        sol = solve_problem(spec, maxlaw=self.maxlaw,
                            fixed_point_tol=self.fixed_point_tol,
                            scan_points=self.scan_points,
                            assumption2_grid=self.assumption2_grid,
                            domain_cap=self.domain_cap)
        self.solution_ = sol
        self.regime_ = sol.regime
        self.cstar_ = sol.cstar
        self.chat_ = sol.chat
        self.xstar_ = sol.xstar
        self.value_ = sol.value
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        """Value function at the given states."""
        check_is_fitted(self, "solution_")
        xs = as_state_array(X)
        return np.array([self.value_.evaluate(x) for x in xs])

    def transform(self, X):
        """Columns (v, Mv, g) at the given states."""
        check_is_fitted(self, "solution_")
        xs = as_state_array(X)
        rows = [(self.value_.evaluate(x),
                 self.value_.intervention_operator(x),
                 float(self.solution_.g(x))) for x in xs]
        return np.asarray(rows, dtype=float)

    def fit_predict(self, X, y=None):
        return self.fit().predict(X)
