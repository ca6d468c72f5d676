"""Shared solved instances.  Session scope: solutions are immutable."""

import pytest

from impulsemax import (
    BrownianWithDrift,
    GeometricReward,
    PowerReward,
    ProblemSpec,
    ReflectedBrownianMotion,
    solve_problem,
)


@pytest.fixture(scope="session")
def bm2_solution():
    # driftless unit Brownian motion, quadratic reward, rate 1/2: theta = 1
    spec = ProblemSpec(process=BrownianWithDrift(mu=0.0, sigma=1.0),
                       reward=PowerReward(2), rate=0.5)
    return solve_problem(spec)


@pytest.fixture(scope="session")
def geometric_solution():
    # mu = -1/2, rate 1 puts the tail exponent at theta = 2
    spec = ProblemSpec(process=BrownianWithDrift(mu=-0.5, sigma=1.0),
                       reward=GeometricReward(b=1.0, k=2.0), rate=1.0)
    return solve_problem(spec)


@pytest.fixture(scope="session")
def reflected3_solution():
    spec = ProblemSpec(process=ReflectedBrownianMotion(sigma=1.0),
                       reward=PowerReward(3), rate=0.5)
    return solve_problem(spec)
