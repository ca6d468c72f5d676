"""Laws of the running maximum at an independent exponential time.

Every law object describes the distribution of M = sup of the process up to
an Exp(rate) clock, started at x, through a small common surface:

- ``tail(x, y)``      P_x(M >= y), equal to one for y <= x
- ``atom(x)``         point mass at the starting state
- ``density_at(x,y)`` Lebesgue density above the start (vectorized in y)
- ``quantile(x, p)``  generalized inverse of the distribution function
- ``closed_restricted(x, h, lower)``
                      exact E_x[h(M); M >= lower] when the structure of h
                      (polynomial, sum of exponentials, reflected family)
                      is recognized, else None
- ``sample(x, size, rng)``  exact draws where available

Expectations restrict or complement over half-lines with closed endpoints:
``{M >= y}`` and ``{M <= y}`` both include the boundary, so the two pieces
add up to the full expectation plus the atom counted once more.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ._quad import QUAD_ABS_TOL, TAIL_MASS, integrate_density
from .errors import (
    Divergent,
    DomainError,
    InvalidParameter,
    NoRoot,
    UnsupportedModel,
    UnsupportedVariant,
)
from .problem import (
    BrownianWithDrift,
    MixedExpUpwardJumpDiffusion,
    ReflectedBrownianMotion,
    SpectrallyNegativeJumpDiffusion,
    levy_exponent,
    levy_exponent_prime,
)


def _require(cond, msg):
    if not cond:
        raise InvalidParameter(msg)


# ---------------------------------------------------------------------------
# structure probes for integrands
# ---------------------------------------------------------------------------

def _poly_of(h):
    coeffs = getattr(h, "poly_coeffs", None)
    return None if coeffs is None else tuple(float(c) for c in coeffs)


def _exp_terms_of(h):
    terms = getattr(h, "exp_terms", None)
    return None if terms is None else tuple((float(a), float(b)) for a, b in terms)


def _rbm_tag_of(h):
    # (power m, space scale s, additive shift)
    return getattr(h, "rbm_tag", None)


def _exp_weighted_poly_tail(coeffs, eta, s):
    """int_s^inf (sum_n c_n y^n) eta exp(-eta (y-s)) dy, exact."""
    total = 0.0
    for n, c in enumerate(coeffs):
        if c == 0.0:
            continue
        fact = math.factorial(n)
        inner = sum(s ** j / (math.factorial(j) * eta ** (n - j)) for j in range(n + 1))
        total += c * fact * inner
    return total


# ---------------------------------------------------------------------------
# law variants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentialTail:
    """M - x ~ Exp(theta) under P_x (spectrally negative driver)."""

    theta: float

    translation_invariant = True

    def __post_init__(self):
        _require(self.theta > 0, "theta must be positive")

    def tail(self, x, y):
        if y <= x:
            return 1.0
        return math.exp(-self.theta * (y - x))

    def atom(self, x):
        return 0.0

    def density_at(self, x, y):
        y = np.asarray(y, dtype=float)
        return np.where(y >= x, self.theta * np.exp(-self.theta * (y - x)), 0.0)

    def quantile(self, x, p):
        if not 0.0 <= p < 1.0:
            raise DomainError("p must lie in [0, 1)")
        return x - math.log1p(-p) / self.theta

    def closed_restricted(self, x, h, lower):
        s = max(lower, x)
        damp = math.exp(-self.theta * (s - x))
        coeffs = _poly_of(h)
        if coeffs is not None:
            return damp * _exp_weighted_poly_tail(coeffs, self.theta, s)
        terms = _exp_terms_of(h)
        if terms is not None:
            total = 0.0
            for a, b in terms:
                if a == 0.0:
                    continue
                if b >= self.theta:
                    raise Divergent(
                        f"exp({b}*y) term is not integrable against an "
                        f"Exp({self.theta}) tail")
                total += a * self.theta / (self.theta - b) * math.exp(b * s)
            return damp * total
        return None

    def sample(self, x, size, rng):
        return x + rng.standard_exponential(size) / self.theta


@dataclass(frozen=True)
class MixedExponential:
    """Atom at the start plus a mixture of exponential overshoots.

    P_x(M = x) = atom0 and, above x, density sum_k w_k r_k exp(-r_k (y-x)).
    The factorization (atom0, rates, weights) is a user input; deriving it
    from a jump model is out of scope here.
    """

    atom0: float
    rates: tuple
    weights: tuple

    translation_invariant = True

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        _require(0.0 <= self.atom0 < 1.0, "atom0 must lie in [0, 1)")
        _require(len(self.rates) == len(self.weights) > 0,
                 "rates and weights must be nonempty and of equal length")
        _require(all(r > 0 for r in self.rates), "rates must be positive")
        _require(all(w > 0 for w in self.weights), "weights must be positive")
        _require(abs(self.atom0 + sum(self.weights) - 1.0) < 1e-10,
                 "atom0 + sum(weights) must equal one")

    def tail(self, x, y):
        if y <= x:
            return 1.0
        return sum(w * math.exp(-r * (y - x))
                   for w, r in zip(self.weights, self.rates))

    def atom(self, x):
        return self.atom0

    def density_at(self, x, y):
        y = np.asarray(y, dtype=float)
        dens = np.zeros_like(y)
        for w, r in zip(self.weights, self.rates):
            dens = dens + w * r * np.exp(-r * (y - x))
        return np.where(y >= x, dens, 0.0)

    def quantile(self, x, p):
        if not 0.0 <= p < 1.0:
            raise DomainError("p must lie in [0, 1)")
        if p <= self.atom0:
            return x
        target = 1.0 - p
        hi = x - math.log(target / sum(self.weights)) / min(self.rates)
        return optimize.brentq(lambda y: self.tail(x, y) - target, x, hi,
                               xtol=1e-14, rtol=8.9e-16)

    def closed_restricted(self, x, h, lower):
        s = max(lower, x)
        coeffs = _poly_of(h)
        terms = _exp_terms_of(h)
        if coeffs is None and terms is None:
            return None
        total = self.atom0 * _eval_h(h, x) if lower <= x else 0.0
        for w, r in zip(self.weights, self.rates):
            damp = math.exp(-r * (s - x))
            if coeffs is not None:
                total += w * damp * _exp_weighted_poly_tail(coeffs, r, s)
            else:
                part = 0.0
                for a, b in terms:
                    if a == 0.0:
                        continue
                    if b >= r:
                        raise Divergent(
                            f"exp({b}*y) term is not integrable against a "
                            f"rate-{r} component")
                    part += a * r / (r - b) * math.exp(b * s)
                total += w * damp * part
        return total

    def sample(self, x, size, rng):
        u = rng.random(size)
        on_atom = u < self.atom0
        # map the remaining uniform mass onto component choice
        v = (u - self.atom0) / (1.0 - self.atom0)
        cum = np.cumsum(self.weights) / sum(self.weights)
        comp = np.searchsorted(cum, np.clip(v, 0.0, 1.0 - 1e-16), side="right")
        rates = np.asarray(self.rates)[comp]
        out = x + rng.standard_exponential(size) / rates
        out[on_atom] = x
        return out


@dataclass(frozen=True)
class ReflectedBMMax:
    """Running maximum of |sigma B| up to an Exp(rate) clock.

    With s = sqrt(2*rate)/sigma the tail is cosh(x*s)/cosh(y*s) and the
    density on y >= x >= 0 is s * tanh(y*s) * cosh(x*s)/cosh(y*s).
    """

    rate: float
    sigma: float = 1.0

    translation_invariant = False

    def __post_init__(self):
        _require(self.rate > 0, "rate must be positive")
        _require(self.sigma > 0, "sigma must be positive")

    @property
    def s(self):
        return math.sqrt(2.0 * self.rate) / self.sigma

    def _check_state(self, x):
        if x < 0:
            raise DomainError("reflected states live on [0, inf)")

    def tail(self, x, y):
        self._check_state(x)
        if y <= x:
            return 1.0
        s = self.s
        # cosh ratio in overflow-safe form
        return math.exp(s * (x - y)) * (1.0 + math.exp(-2.0 * s * x)) \
            / (1.0 + math.exp(-2.0 * s * y))

    def atom(self, x):
        return 0.0

    def density_at(self, x, y):
        self._check_state(x)
        y = np.asarray(y, dtype=float)
        s = self.s
        tail = np.exp(s * (x - y)) * (1.0 + math.exp(-2.0 * s * x)) \
            / (1.0 + np.exp(-2.0 * s * y))
        return np.where(y >= x, s * np.tanh(s * y) * tail, 0.0)

    def quantile(self, x, p):
        self._check_state(x)
        if not 0.0 <= p < 1.0:
            raise DomainError("p must lie in [0, 1)")
        if p == 0.0:
            return x
        s = self.s
        return float(np.arccosh(np.cosh(s * x) / (1.0 - p)) / s)

    def closed_restricted(self, x, h, lower):
        self._check_state(x)
        tag = _rbm_tag_of(h)
        if tag is None:
            return None
        m, s_param, shift = tag
        if abs(s_param - self.s) > 1e-12 * self.s:
            return None
        stop = max(lower, x, 0.0)
        return (shift + stop ** m) * self.tail(x, stop)

    def sample(self, x, size, rng):
        self._check_state(x)
        s = self.s
        u = rng.random(size)
        return np.arccosh(np.cosh(s * x) / (1.0 - u)) / s


@dataclass(frozen=True)
class DiffusionFactorized:
    """Escape hatch for a regular diffusion given its increasing r-harmonic psi.

    The tail factorizes as P_x(M >= y) = psi(x)/psi(y) for y >= x.  The
    associated measure normalization sigma([y, inf)) = 1/(rate*psi(y)) is
    exposed as metadata only; expectations use the tail directly.  Without
    ``dpsi`` the density falls back to a central difference and the
    advertised quadrature accuracy degrades.
    """

    psi: object
    rate: float
    dpsi: object = None
    support_left: float = 0.0

    translation_invariant = False

    def __post_init__(self):
        _require(self.rate > 0, "rate must be positive")
        _require(callable(self.psi), "psi must be callable")

    def _check_state(self, x):
        if x < self.support_left:
            raise DomainError("state below the left edge of the diffusion domain")

    def sigma_tail(self, y):
        return 1.0 / (self.rate * float(self.psi(y)))

    def tail(self, x, y):
        self._check_state(x)
        if y <= x:
            return 1.0
        px, py = float(self.psi(x)), float(self.psi(y))
        if py <= 0 or px <= 0:
            raise DomainError("psi must be positive")
        if px > py * (1.0 + 1e-12):
            raise InvalidParameter("psi must be non-decreasing")
        return min(px / py, 1.0)

    def atom(self, x):
        return 0.0

    def _dpsi(self, y):
        if self.dpsi is not None:
            return float(self.dpsi(y))
        h = 1e-6 * max(1.0, abs(y))
        return (float(self.psi(y + h)) - float(self.psi(y - h))) / (2.0 * h)

    def density_at(self, x, y):
        self._check_state(x)
        y = np.asarray(y, dtype=float)
        px = float(self.psi(x))
        vals = np.array([px * self._dpsi(v) / float(self.psi(v)) ** 2
                         for v in np.atleast_1d(y)])
        vals = np.where(np.atleast_1d(y) >= x, vals, 0.0)
        return vals if y.ndim else float(vals[0])

    def quantile(self, x, p):
        self._check_state(x)
        if not 0.0 <= p < 1.0:
            raise DomainError("p must lie in [0, 1)")
        if p == 0.0:
            return x
        target = float(self.psi(x)) / (1.0 - p)
        hi = max(x, self.support_left) + 1.0
        for _ in range(200):
            if float(self.psi(hi)) >= target:
                break
            hi = x + 2.0 * (hi - x)
        else:
            raise NoRoot("psi grows too slowly to reach the requested quantile")
        return optimize.brentq(lambda y: float(self.psi(y)) - target, x, hi,
                               xtol=1e-13, rtol=8.9e-16)

    def closed_restricted(self, x, h, lower):
        return None

    def sample(self, x, size, rng):
        raise UnsupportedVariant("sampling is not available for a bare factorization")


@dataclass
class TabulatedLaw:
    """Distribution of M under P_0 given on a grid (linear interpolation).

    ``cdf[0]`` is the point mass at the start; the grid must begin at zero.
    Translation-invariant by default, in which case P_x shifts the grid by x.
    """

    grid: tuple
    cdf: tuple
    translation_invariant: bool = True
    _warned: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        self.grid = tuple(float(v) for v in self.grid)
        self.cdf = tuple(float(v) for v in self.cdf)
        _require(len(self.grid) == len(self.cdf) >= 2,
                 "grid and cdf must be of equal length >= 2")
        _require(self.grid[0] == 0.0, "grid must start at zero")
        _require(all(b > a for a, b in zip(self.grid, self.grid[1:])),
                 "grid must be strictly increasing")
        _require(all(b >= a for a, b in zip(self.cdf, self.cdf[1:])),
                 "cdf must be non-decreasing")
        _require(0.0 <= self.cdf[0] <= 1.0 and abs(self.cdf[-1] - 1.0) < 1e-9,
                 "cdf must start in [0,1] and end at one")

    def _shift(self, x):
        if self.translation_invariant:
            return x
        if x != 0.0:
            raise DomainError("law tabulated under P_0 only")
        return 0.0

    def _warn_once(self):
        if not self._warned:
            warnings.warn("evaluation beyond the tabulated grid clamps to the edge")
            self._warned = True

    def tail(self, x, y):
        x0 = self._shift(x)
        if y <= x0:
            return 1.0
        u = y - x0
        if u > self.grid[-1]:
            self._warn_once()
            return 0.0
        return 1.0 - float(np.interp(u, self.grid, self.cdf))

    def atom(self, x):
        return self.cdf[0]

    def density_at(self, x, y):
        x0 = self._shift(x)
        y = np.asarray(y, dtype=float)
        slopes = np.diff(self.cdf) / np.diff(self.grid)
        idx = np.clip(np.searchsorted(self.grid, y - x0, side="right") - 1,
                      0, len(slopes) - 1)
        inside = (y - x0 >= self.grid[0]) & (y - x0 <= self.grid[-1])
        return np.where(inside, slopes[idx], 0.0)

    def quantile(self, x, p):
        x0 = self._shift(x)
        if not 0.0 <= p < 1.0:
            raise DomainError("p must lie in [0, 1)")
        return x0 + float(np.interp(p, self.cdf, self.grid))

    def closed_restricted(self, x, h, lower):
        # five-point Gauss per linear segment is exact enough for smooth h
        x0 = self._shift(x)
        total = self.atom(x) * _eval_h(h, x0) if lower <= x0 else 0.0
        nodes, wts = np.polynomial.legendre.leggauss(5)
        grid = np.asarray(self.grid) + x0
        dens = np.diff(self.cdf) / np.diff(self.grid)
        for a, b, d in zip(grid[:-1], grid[1:], dens):
            lo = max(a, lower)
            if lo >= b or d == 0.0:
                continue
            mid, half = 0.5 * (lo + b), 0.5 * (b - lo)
            ys = mid + half * nodes
            total += d * half * float(np.sum(wts * np.asarray(
                [_eval_h(h, float(v)) for v in ys])))
        return total

    def sample(self, x, size, rng):
        raise UnsupportedVariant("sampling is not available for a tabulated law")


def _eval_h(h, y):
    return float(h(y))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def theta_from_model(process, rate):
    """Positive root of Psi(theta) = rate for a spectrally negative driver.

    Convexity of Psi with Psi(0) = 0 makes the root unique; it is bracketed
    by doubling and polished with Newton steps until the residual drops
    below 1e-12.
    """
    if isinstance(process, ReflectedBrownianMotion):
        raise UnsupportedModel("reflected Brownian motion has no Levy exponent")
    if isinstance(process, MixedExpUpwardJumpDiffusion):
        raise NoRoot("upward jumps: the running maximum is not exponential; "
                     "supply a mixed-exponential factorization instead")
    if not isinstance(process, (BrownianWithDrift, SpectrallyNegativeJumpDiffusion)):
        raise UnsupportedModel(f"unknown process {type(process).__name__}")
    if rate <= 0:
        raise InvalidParameter("rate must be positive")

    def f(lam):
        return levy_exponent(process, lam) - rate

    hi = max(1.0, 2.0 * math.sqrt(2.0 * rate) / process.sigma)
    for _ in range(200):
        if f(hi) > 0:
            break
        hi *= 2.0
    else:
        raise NoRoot("could not bracket Psi(theta) = rate")
    theta = optimize.brentq(f, 0.0, hi, xtol=1e-14, rtol=8.9e-16)
    for _ in range(8):
        resid = f(theta)
        if abs(resid) < 1e-13:
            break
        theta -= resid / levy_exponent_prime(process, theta)
    if abs(f(theta)) >= 1e-12:
        raise NoRoot("Newton polish failed to reach residual 1e-12")
    return theta


def tail_prob(law, x, y):
    """P_x(M >= y); equal to one for y <= x."""
    return law.tail(float(x), float(y))


def _quad_restricted(law, x, h, lower):
    atom_part = law.atom(x) * _eval_h(h, x) if lower <= x else 0.0
    lo = max(lower, x)
    if isinstance(law, ReflectedBMMax):
        lo = max(lo, 0.0)
    hi = max(law.quantile(x, 1.0 - TAIL_MASS), lo)

    def integrand(y):
        return _eval_h(h, y) * float(law.density_at(x, np.asarray(y)))

    total = integrate_density(integrand, lo, hi)
    # geometric tail extension: polynomial growth converges, divergence shows
    span = max(hi - lo, 1.0)
    prev_chunk = None
    a = hi
    for _ in range(60):
        b = a + span
        chunk = integrate_density(integrand, a, b)
        total += chunk
        if abs(chunk) < QUAD_ABS_TOL / 10:
            break
        if prev_chunk is not None and abs(chunk) > abs(prev_chunk) \
                and abs(chunk) > QUAD_ABS_TOL:
            raise Divergent("integrand keeps growing past the tail cut")
        prev_chunk = chunk
        a, span = b, span * 2.0
    else:
        raise Divergent("tail extension did not converge")
    return atom_part + total


def restricted_expectation(law, x, h, lower=-math.inf, method="auto"):
    """E_x[h(M); M >= lower] with the boundary included.

    ``method`` selects the evaluation route: "auto" prefers an exact closed
    form keyed to the structure of h and falls back to adaptive quadrature,
    "closed" insists on the closed form, "quadrature" forces the numeric
    route (used by verification code so the check stays independent).
    """
    x = float(x)
    lower = float(lower)
    if method not in ("auto", "closed", "quadrature"):
        raise InvalidParameter(f"unknown method {method!r}")
    if method != "quadrature":
        val = law.closed_restricted(x, h, lower)
        if val is not None:
            return val
        if method == "closed":
            raise UnsupportedVariant(
                "no closed form for this law/integrand combination")
    return _quad_restricted(law, x, h, lower)


def complement_expectation(law, x, h, upper, method="auto"):
    """E_x[h(M); M <= upper] with the boundary included.

    Computed as full minus restricted plus the atom at the shared boundary,
    so the two half-line pieces always add to the full expectation plus one
    extra copy of any atom sitting exactly at the cut.
    """
    x = float(x)
    upper = float(upper)
    if upper < x:
        return 0.0
    full = restricted_expectation(law, x, h, -math.inf, method)
    above = restricted_expectation(law, x, h, upper, method)
    boundary = law.atom(x) * _eval_h(h, x) if upper == x else 0.0
    return full - above + boundary


def moment(law, m):
    """E_0[M^m] for integer m >= 0."""
    if not isinstance(m, (int, np.integer)) or m < 0:
        raise InvalidParameter("m must be a nonnegative integer")
    if m == 0:
        return 1.0
    if isinstance(law, ExponentialTail):
        return math.factorial(m) / law.theta ** m
    if isinstance(law, MixedExponential):
        return sum(w * math.factorial(m) / r ** m
                   for w, r in zip(law.weights, law.rates))

    class _Mono:
        poly_coeffs = (0.0,) * m + (1.0,)

        def __call__(self, y):
            return float(y) ** m

    return restricted_expectation(law, 0.0, _Mono(), -math.inf)


def sample_max(law, x, size, rng):
    """Exact draws of M under P_x (inverse transform / mixture sampling)."""
    if not isinstance(law, (ExponentialTail, MixedExponential, ReflectedBMMax)):
        raise UnsupportedVariant(
            f"sampling is not available for {type(law).__name__}")
    return law.sample(float(x), int(size), rng)
