"""Adaptive quadrature helpers shared by the max-law and verification code."""

import warnings

import numpy as np
from scipy import integrate

#: absolute tolerance for expectation integrals
QUAD_ABS_TOL = 1e-10
#: tails are cut at the 1 - TAIL_MASS quantile before integrating
TAIL_MASS = 1e-12


def integrate_density(fn, lo, hi, singular_points=()):
    """Integrate ``fn`` over [lo, hi] to absolute tolerance QUAD_ABS_TOL.

    Parameters
    ----------
    fn : callable
        Scalar integrand.
    lo, hi : float
        Finite integration bounds (callers truncate tails beforehand).
    singular_points : sequence of float, optional
        Interior points where the integrand is awkward (kinks, near-poles).

    Returns
    -------
    float
    """
    if hi <= lo:
        return 0.0
    pts = [p for p in singular_points if lo < p < hi] or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            fn, lo, hi, points=pts, epsabs=QUAD_ABS_TOL / 10, epsrel=1e-11, limit=400
        )
    if not np.isfinite(val):
        raise FloatingPointError("integral did not converge to a finite value")
    return val
