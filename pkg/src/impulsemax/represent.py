"""Representing functions: f with E_x f(M) = g(x).

A representing function turns the reward into an expectation of the running
maximum at the exponential clock.  Alongside the callable it carries shape
metadata (monotonicity, limit at zero, one-dip structure) that drives regime
classification, plus structural descriptors (polynomial coefficients, sums
of exponentials, reflected family tag) that unlock exact expectations in the
max-law module.
"""

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import Divergent, InconsistentMetadata, UnsupportedModel
from .maxlaw import moment, restricted_expectation, tail_prob


def _coth(z):
    """coth(z) for z > 0, Laurent expansion below 1e-2 to dodge cancellation."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-2
    safe = np.where(small, 1.0, z)
    direct = 1.0 / np.tanh(safe)
    zs = np.where(small, z, 1.0)
    inv = np.where(zs == 0.0, np.inf, 1.0 / np.where(zs == 0.0, 1.0, zs))
    series = inv + zs / 3.0 - zs ** 3 / 45.0
    out = np.where(small, series, direct)
    return out if out.ndim else float(out)


def _pow_coth(x, n, s):
    """x**n * coth(x*s) for x >= 0, series form near zero (n >= 1)."""
    x = np.asarray(x, dtype=float)
    z = x * s
    small = np.abs(z) < 1e-2
    safe = np.where(small, 1.0, z)
    direct = x ** n / np.tanh(safe)
    xs = np.where(small, x, 1.0)
    series = xs ** (n - 1) / s + xs ** (n + 1) * s / 3.0 - xs ** (n + 3) * s ** 3 / 45.0
    out = np.where(small, series, direct)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RepresentingFunction:
    """Callable f plus shape metadata and structure for exact integration.

    ``shift`` realizes f + c without wrapping: calls return fn(x) + shift and
    all structural descriptors merge the shift in.  Metadata fields describe
    the shifted function; tri-state fields take "yes" / "no" / "unknown".
    """

    fn: object
    shift: float = 0.0
    monotone_nondecreasing: str = "unknown"
    limit_at_zero: object = None
    decreasing_on_left_of_min: str = "unknown"
    single_sign_change_left_of_min: str = "unknown"
    base_poly: tuple = None
    base_exp_terms: tuple = None
    base_rbm: tuple = None
    label: str = ""

    def __call__(self, x):
        out = self.fn(x)
        if np.ndim(out):
            return np.asarray(out, dtype=float) + self.shift
        return float(out) + self.shift

    def shifted(self, c):
        """f + c as a new object; metadata and structure follow the shift."""
        lim = self.limit_at_zero
        if lim is not None and math.isfinite(lim):
            lim = lim + c
        return dataclasses.replace(self, shift=self.shift + float(c),
                                   limit_at_zero=lim)

    @property
    def poly_coeffs(self):
        if self.base_poly is None:
            return None
        merged = list(self.base_poly)
        merged[0] += self.shift
        return tuple(merged)

    @property
    def exp_terms(self):
        if self.base_exp_terms is None:
            return None
        terms = list(self.base_exp_terms)
        if self.shift != 0.0:
            terms.append((self.shift, 0.0))
        return tuple(terms)

    @property
    def rbm_tag(self):
        if self.base_rbm is None:
            return None
        m, s = self.base_rbm
        return (m, s, self.shift)


def audit_metadata(f, hi, n=1000):
    """Spot-check declared metadata on a grid; raise InconsistentMetadata."""
    xs = np.linspace(0.0, hi, n)
    probe_lo = 1e-7
    vals = np.asarray(f(np.maximum(xs, probe_lo)), dtype=float)
    scale = max(1.0, float(np.max(np.abs(vals))))
    diffs = np.diff(vals)
    if f.monotone_nondecreasing == "yes" and np.min(diffs) < -1e-9 * scale:
        raise InconsistentMetadata(
            f"{f.label or 'f'} declared non-decreasing but dips by "
            f"{-np.min(diffs):.3g}")
    if f.monotone_nondecreasing == "no" and np.min(diffs) > -1e-12 * scale:
        raise InconsistentMetadata(
            f"{f.label or 'f'} declared non-monotone but never decreases")
    lim = f.limit_at_zero
    if lim is not None:
        v = float(f(probe_lo))
        if math.isinf(lim):
            if v > -1e3:
                raise InconsistentMetadata(
                    f"{f.label or 'f'} declared to diverge at zero but "
                    f"f(1e-7) = {v:.3g}")
        elif abs(v - lim) > 1e-5 * (1.0 + abs(lim)):
            raise InconsistentMetadata(
                f"{f.label or 'f'} limit at zero declared {lim:.6g} but "
                f"f(1e-7) = {v:.6g}")
    coeffs = f.poly_coeffs
    if coeffs is not None:
        poly_vals = np.polynomial.polynomial.polyval(np.maximum(xs, probe_lo),
                                                     coeffs)
        if np.max(np.abs(poly_vals - vals)) > 1e-10 * scale:
            raise InconsistentMetadata(
                f"{f.label or 'f'} polynomial coefficients disagree with values")
    return True


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def appell(law, m):
    """Degree-m Appell polynomial of the law: Q_0 = 1, Q_m' = m Q_{m-1},
    constant pinned by E_0[Q_m(M)] = 0.

    For translation-invariant laws E_x[Q_m(M)] = x**m, and for m >= 2 the
    polynomial dips below zero on the left of a unique interior minimum and
    then increases; that shape is recorded in the metadata.
    """
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise UnsupportedModel("m must be an integer >= 1")
    coeffs = [1.0]
    for k in range(1, m + 1):
        new = [0.0] * (k + 1)
        for j, c in enumerate(coeffs):
            new[j + 1] = k * c / (j + 1)
        new[0] = -sum(new[j] * moment(law, j) for j in range(1, k + 1))
        coeffs = new
    coeffs = tuple(coeffs)

    def fn(x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coeffs)

    shaped = law.translation_invariant
    rf = RepresentingFunction(
        fn=fn,
        monotone_nondecreasing="yes" if m == 1 else ("no" if shaped else "unknown"),
        limit_at_zero=coeffs[0],
        decreasing_on_left_of_min="yes" if (m >= 2 and shaped) else "unknown",
        single_sign_change_left_of_min="yes" if (m >= 2 and shaped) else "unknown",
        base_poly=coeffs,
        label=f"appell_{m}",
    )
    audit_metadata(rf, hi=law.quantile(0.0, 1.0 - 1e-10))
    return rf


def geometric_representing(law, b, k):
    """f(x) = a*exp(b*x) - k with a = 1/E_0[exp(b*M)], for g(x) = exp(b*x) - k.

    Requires a translation-invariant law; raises Divergent when the
    exponential moment blows up.
    """
    if not law.translation_invariant:
        raise UnsupportedModel(
            "geometric rewards need a translation-invariant maximum law")

    class _Exp:
        exp_terms = ((1.0, float(b)),)

        def __call__(self, y):
            return math.exp(b * y)

    denom = restricted_expectation(law, 0.0, _Exp(), -math.inf)
    if not np.isfinite(denom) or denom <= 0:
        raise Divergent("E_0[exp(b*M)] did not evaluate to a positive number")
    a = 1.0 / denom

    def fn(x):
        return a * np.exp(b * np.asarray(x, dtype=float)) - k

    rf = RepresentingFunction(
        fn=fn,
        monotone_nondecreasing="yes",
        limit_at_zero=a - k,
        base_exp_terms=((a, float(b)), (-float(k), 0.0)),
        label=f"geometric_b{b}_k{k}",
    )
    # audit window: past the sign change of f, well inside integrability
    hi = math.log(k / a) / b + 2.0
    audit_metadata(rf, hi=hi)
    return rf


def reflected_bm_representing(rate, m, sigma=1.0):
    """f_m(x) = x**(m-1) * (x - (m/s) coth(x s)), s = sqrt(2 rate)/sigma.

    Represents g(x) = x**m for the reflected driver.  m = 1 diverges to
    -infinity at zero, m = 2 tends to -sigma^2/rate, m >= 3 tends to zero
    with an interior dip.
    """
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise UnsupportedModel("m must be an integer >= 1")
    if rate <= 0 or sigma <= 0:
        raise UnsupportedModel("rate and sigma must be positive")
    s = math.sqrt(2.0 * rate) / sigma

    if m == 1:
        def fn(x):
            xv = np.asarray(x, dtype=float)
            out = np.where(xv > 0.0, xv - _coth(np.where(xv > 0, xv, 1.0) * s) / s,
                           -np.inf)
            return out if out.ndim else float(out)
        lim = -math.inf
        mono = "yes"
    else:
        def fn(x):
            xv = np.asarray(x, dtype=float)
            out = xv ** m - (m / s) * _pow_coth(xv, m - 1, s)
            return out if np.ndim(out) else float(out)
        lim = -2.0 / s ** 2 if m == 2 else 0.0
        mono = "yes" if m == 2 else "no"

    rf = RepresentingFunction(
        fn=fn,
        monotone_nondecreasing=mono,
        limit_at_zero=lim,
        single_sign_change_left_of_min="yes" if m >= 3 else "unknown",
        base_rbm=(int(m), s),
        label=f"reflected_power_{m}",
    )
    audit_metadata(rf, hi=2.0 * float(np.arccosh(1e10)) / s)
    return rf


def tabulated_representing(xs, values):
    """Interpolated representing function from a user-supplied table.

    Shape metadata is inferred from the table itself (monotone scan, left
    edge value); accuracy is whatever the table resolution supports.
    """
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.ndim != 1 or xs.shape != values.shape or len(xs) < 2:
        raise UnsupportedModel("need matching one-dimensional tables")
    if np.any(np.diff(xs) <= 0):
        raise UnsupportedModel("table grid must be strictly increasing")

    def fn(x):
        out = np.interp(np.asarray(x, dtype=float), xs, values)
        return out if np.ndim(x) else float(out)

    diffs = np.diff(values)
    mono = "yes" if np.all(diffs >= 0) else "no"
    left = float(values[xs.searchsorted(0.0)]) if xs[0] <= 0.0 <= xs[-1] \
        else float(values[0])
    return RepresentingFunction(
        fn=fn, monotone_nondecreasing=mono, limit_at_zero=left,
        label="tabulated")


@dataclass(frozen=True)
class RepresentationReport:
    max_abs_error: float
    argmax: float
    tol: float
    passed: bool
    errors: tuple


def verify_representation(f, law, g, grid, tol, method="quadrature"):
    """Check max_x |E_x f(M) - g(x)| on a grid.

    The default quadrature route keeps this check independent of the closed
    forms the solver itself uses.
    """
    errs = []
    for x in np.asarray(grid, dtype=float):
        ef = restricted_expectation(law, float(x), f, -math.inf, method=method)
        errs.append(ef - float(g(x)))
    errs = np.asarray(errs)
    i = int(np.argmax(np.abs(errs)))
    worst = float(np.abs(errs[i]))
    return RepresentationReport(
        max_abs_error=worst,
        argmax=float(np.asarray(grid, dtype=float)[i]),
        tol=float(tol),
        passed=bool(worst <= tol),
        errors=tuple(float(e) for e in errs),
    )


__all__ = [
    "RepresentingFunction",
    "RepresentationReport",
    "appell",
    "audit_metadata",
    "geometric_representing",
    "reflected_bm_representing",
    "tabulated_representing",
    "verify_representation",
    "tail_prob",
]
