"""Representing functions: construction, metadata, identity checks."""

import dataclasses
import math

import numpy as np
import pytest

import _oracles
from impulsemax import (
    Divergent,
    ExponentialTail,
    InconsistentMetadata,
    MixedExponential,
    ReflectedBMMax,
    UnsupportedModel,
    appell,
    geometric_representing,
    reflected_bm_representing,
    restricted_expectation,
    tabulated_representing,
    verify_representation,
)
from impulsemax.represent import _coth, _pow_coth, audit_metadata


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_appell_matches_exponential_closed_form(theta, m):
    law = ExponentialTail(theta=theta)
    f = appell(law, m)
    want = _oracles.appell_exp_tail(m, theta)
    xs = np.linspace(0.0, 5.0, 21)
    np.testing.assert_allclose(f(xs), [want(x) for x in xs],
                               rtol=0, atol=1e-12)


@pytest.mark.parametrize("law", [
    ExponentialTail(theta=1.0),
    MixedExponential(atom0=0.1, rates=(1.0, 3.0), weights=(0.6, 0.3)),
])
@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6])
def test_appell_is_mean_zero(law, m):
    f = appell(law, m)
    val = restricted_expectation(law, 0.0, f, method="quadrature")
    assert abs(val) < 1e-8


def test_appell_represents_powers_away_from_zero():
    law = MixedExponential(atom0=0.1, rates=(1.0, 3.0), weights=(0.6, 0.3))
    f = appell(law, 3)
    for x in (-1.0, 0.4, 1.7):
        val = restricted_expectation(law, x, f, method="quadrature")
        assert val == pytest.approx(x ** 3, abs=1e-8)


def test_appell_metadata_and_shape():
    law = ExponentialTail(theta=1.0)
    f1 = appell(law, 1)
    assert f1.monotone_nondecreasing == "yes"
    assert f1.limit_at_zero == pytest.approx(-1.0)
    f2 = appell(law, 2)
    assert f2.monotone_nondecreasing == "no"
    assert f2.single_sign_change_left_of_min == "yes"
    assert f2.poly_coeffs == pytest.approx((0.0, -2.0, 1.0))
    with pytest.raises(UnsupportedModel):
        appell(law, 0)


def test_shift_carries_structure_and_metadata():
    law = ExponentialTail(theta=1.0)
    f = appell(law, 2).shifted(0.25)
    assert f(1.0) == pytest.approx(-0.75)
    assert f.poly_coeffs == pytest.approx((0.25, -2.0, 1.0))
    assert f.limit_at_zero == pytest.approx(0.25)
    g = geometric_representing(MixedExponential(0.2, (1.0, 3.0), (0.5, 0.3)),
                               b=0.6, k=2.0).shifted(0.5)
    assert (0.5, 0.0) in g.exp_terms
    r = reflected_bm_representing(0.5, 3).shifted(-0.1)
    assert r.rbm_tag[2] == pytest.approx(-0.1)
    assert r.rbm_tag[0] == 3


def test_geometric_weight_for_exponential_tail():
    # E_0 exp(b M) = theta/(theta-b), so the leading weight is (theta-b)/theta
    law = ExponentialTail(theta=2.0)
    f = geometric_representing(law, b=1.0, k=2.0)
    a = f(0.0) + 2.0
    assert a == pytest.approx(0.5, abs=1e-12)
    assert f.monotone_nondecreasing == "yes"
    report = verify_representation(f, law, lambda x: math.exp(x) - 2.0,
                                   np.linspace(-1.0, 3.0, 9), tol=1e-7)
    assert report.passed, report


def test_geometric_divergence_is_flagged():
    with pytest.raises(Divergent):
        geometric_representing(ExponentialTail(theta=1.0), b=1.0, k=2.0)


@pytest.mark.parametrize("m,limit", [(2, -2.0), (3, 0.0), (4, 0.0)])
def test_reflected_representing_limits(m, limit):
    f = reflected_bm_representing(0.5, m, sigma=1.0)
    assert f.limit_at_zero == pytest.approx(limit)
    assert float(f(1e-9)) == pytest.approx(limit, abs=1e-6)


def test_reflected_representing_m1_diverges_at_zero():
    f = reflected_bm_representing(0.5, 1, sigma=1.0)
    assert f.limit_at_zero == -math.inf
    assert f(1e-8) < -1e6
    assert f(np.array([0.0]))[0] == -math.inf


@pytest.mark.parametrize("m", [1, 2, 3])
def test_reflected_representation_identity_against_oracle(m):
    # E_x f(M) = x^m checked with the oracle density, not the package quadrature
    f = reflected_bm_representing(0.5, m, sigma=1.0)
    for x in (0.3, 1.0, 2.5):
        val = _oracles.reflected_restricted(x, lambda y: float(f(y)), 0.0,
                                            s=1.0)
        assert val == pytest.approx(x ** m, abs=1e-7)


def test_pow_coth_series_joins_the_direct_branch():
    # the series kicks in below z = 1e-2; both sides must agree at the seam
    for z in (9.9e-3, 1.01e-2):
        direct = z ** 2 / math.tanh(z)
        assert _pow_coth(z, 2, 1.0) == pytest.approx(direct, rel=1e-10)
        assert _coth(z) == pytest.approx(1.0 / math.tanh(z), rel=1e-10)
    assert _coth(0.0) == math.inf


def test_metadata_audit_catches_lies():
    law = ExponentialTail(theta=1.0)
    dipper = appell(law, 2)
    hi = law.quantile(0.0, 1.0 - 1e-10)
    with pytest.raises(InconsistentMetadata):
        audit_metadata(dataclasses.replace(dipper,
                                           monotone_nondecreasing="yes"), hi)
    with pytest.raises(InconsistentMetadata):
        audit_metadata(dataclasses.replace(dipper, limit_at_zero=5.0), hi)
    riser = appell(law, 1)
    with pytest.raises(InconsistentMetadata):
        audit_metadata(dataclasses.replace(riser,
                                           monotone_nondecreasing="no"), hi)
    with pytest.raises(InconsistentMetadata):
        audit_metadata(dataclasses.replace(dipper,
                                           base_poly=(1.0, -2.0, 1.0)), hi)


def test_verify_representation_reports_failure():
    law = ExponentialTail(theta=1.0)
    f = appell(law, 2)
    bad = verify_representation(f, law, lambda x: x ** 2 + 1e-3,
                                np.linspace(0.0, 3.0, 7), tol=1e-7)
    assert not bad.passed
    assert bad.max_abs_error == pytest.approx(1e-3, rel=1e-4)


def test_tabulated_representing_metadata():
    xs = np.linspace(0.0, 4.0, 200)
    f = tabulated_representing(xs, xs ** 2 - 2.0 * xs)
    assert f.monotone_nondecreasing == "no"
    assert f(1.0) == pytest.approx(-1.0, abs=1e-3)
    rising = tabulated_representing((0.0, 1.0), (0.0, 1.0))
    assert rising.monotone_nondecreasing == "yes"
    with pytest.raises(UnsupportedModel):
        tabulated_representing((1.0, 0.0), (0.0, 1.0))
