"""Stable laws with exponent in (0, 2): Levy measure, characteristic functions, sampling.

Characteristic functions are evaluated by quadrature of the Levy integral.
The integrand is split at the truncation level and at the oscillation scale
1/|theta|; the (possibly compensated) singularity at the origin is summed as
a power series, and the oscillatory tail is handled by QUADPACK's Fourier
integrator.  Absolute target accuracy is ~1e-10.

Closed-form Gamma-function expressions for the same integrals exist; they are
kept private (`_strict_exponent_closed`) and are used only to convert
``(c_plus, c_minus)`` into the skewness/scale parameters of the
Chambers-Mallows-Stuck sampler.  The public CF surface is quadrature-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as _gamma_fn

from .errors import InvalidParameterError

__all__ = [
    "StableParams",
    "SymmetricStableScale",
    "levy_density",
    "strictly_stable_cf",
    "truncated_cf",
    "truncated_levy_exponent",
    "sample_stable",
    "cms_parameters",
    "symmetric_scale_to_levy",
    "strictly_stable_exponent",
]

_QUAD_TOL = 1e-12
_QUAD_LIMIT = 400


@dataclass(frozen=True)
class StableParams:
    """Parameters of a truncated-compensation stable law.

    alpha: tail exponent in (0, 2); c_plus/c_minus: one-sided Levy constants
    (at least one positive); h: truncation level of the linear compensation;
    a_h: deterministic shift.
    """

    alpha: float
    c_plus: float
    c_minus: float
    h: float = 1.0
    a_h: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise InvalidParameterError(f"alpha must be in (0,2), got {self.alpha}")
        if self.c_plus < 0.0 or self.c_minus < 0.0 or self.c_plus + self.c_minus <= 0.0:
            raise InvalidParameterError("need c_plus, c_minus >= 0 with c_plus + c_minus > 0")
        if self.h <= 0.0:
            raise InvalidParameterError(f"truncation level h must be positive, got {self.h}")


@dataclass(frozen=True)
class SymmetricStableScale:
    """Symmetric stable law parameterized by (alpha, tau).

    Its CF equals the strictly stable CF with c_plus = c_minus = tau.
    """

    alpha: float
    tau: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise InvalidParameterError(f"alpha must be in (0,2), got {self.alpha}")
        if self.tau <= 0.0:
            raise InvalidParameterError(f"tau must be positive, got {self.tau}")


def levy_density(x, p: StableParams):
    """Density of the Levy measure at x != 0 (vectorized in x)."""
    x = np.asarray(x, dtype=float)
    if np.any(x == 0.0):
        raise InvalidParameterError("Levy density is singular at x = 0")
    a = p.alpha
    pos = p.c_plus * np.where(x > 0, np.abs(x) ** (-a - 1.0), 0.0)
    neg = p.c_minus * np.where(x < 0, np.abs(x) ** (-a - 1.0), 0.0)
    out = a * (pos + neg)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# quadrature engine for one-sided Levy integrals
#
#   I(theta, alpha, hc) = int_0^inf (e^{i theta x} - 1 - i theta x 1{x<=hc})
#                                     alpha x^{-alpha-1} dx
#
# hc = 0 means no compensation (needs alpha < 1), hc = inf full compensation
# (needs alpha > 1), finite hc works for every alpha in (0, 2).
# ---------------------------------------------------------------------------


def _series_origin(theta: float, alpha: float, eps: float, compensated: bool) -> complex:
    # int_0^eps of the expanded integrand; requires |theta * eps| <= ~0.5
    k0 = 2 if compensated else 1
    acc = 0.0 + 0.0j
    it_eps = 1j * theta * eps
    fac = 1.0
    power = 1.0 + 0.0j
    for k in range(1, 60):
        fac *= k
        power *= it_eps
        if k >= k0:
            term = power / (fac * (k - alpha))
            acc += term
            if abs(term) < 1e-18 * max(abs(acc), 1.0):
                break
    return alpha * acc * eps ** (-alpha)


def _quad_complex(f_re, f_im, a: float, b: float, pts=None) -> complex:
    kw = dict(limit=_QUAD_LIMIT, epsabs=_QUAD_TOL, epsrel=1e-11)
    if pts:
        kw["points"] = pts
    re, _ = quad(f_re, a, b, **kw)
    im, _ = quad(f_im, a, b, **kw)
    return re + 1j * im


def _fourier_tail(theta: float, alpha: float, a: float) -> complex:
    # int_a^inf e^{i theta x} alpha x^{-alpha-1} dx, theta > 0
    env = lambda x: alpha * x ** (-alpha - 1.0)
    re, _ = quad(env, a, np.inf, weight="cos", wvar=theta, limit=_QUAD_LIMIT)
    im, _ = quad(env, a, np.inf, weight="sin", wvar=theta, limit=_QUAD_LIMIT)
    return re + 1j * im


def _one_sided_exponent(theta: float, alpha: float, hc: float) -> complex:
    """One-sided Levy integral I(theta, alpha, hc); see module docstring."""
    if theta == 0.0:
        return 0.0 + 0.0j
    if theta < 0.0:
        return np.conj(_one_sided_exponent(-theta, alpha, hc))
    if hc == 0.0 and alpha >= 1.0:
        raise InvalidParameterError("uncompensated integral diverges for alpha >= 1")
    if not np.isfinite(hc) and alpha <= 1.0:
        raise InvalidParameterError("fully compensated integral diverges for alpha <= 1")

    eps = min(1.0, 0.1 / theta)
    if hc > 0.0:
        eps = min(eps, hc)
    total = _series_origin(theta, alpha, eps, compensated=hc > 0.0)

    comp_re = lambda x: (np.cos(theta * x) - 1.0) * alpha * x ** (-alpha - 1.0)
    comp_im = lambda x: (np.sin(theta * x) - theta * x) * alpha * x ** (-alpha - 1.0)

    if np.isfinite(hc):
        if hc > eps:
            pts = [p for p in (1.0 / theta,) if eps < p < hc]
            total += _quad_complex(comp_re, comp_im, eps, hc, pts)
        start = max(eps, hc)
        # uncompensated remainder: (e^{i t x} - 1) = e^{i t x} minus the constant
        total += _fourier_tail(theta, alpha, start) - start ** (-alpha)
    else:
        start = max(eps, 1.0, 1.0 / theta)
        if start > eps:
            pts = [p for p in (1.0 / theta,) if eps < p < start]
            total += _quad_complex(comp_re, comp_im, eps, start, pts)
        total += (
            _fourier_tail(theta, alpha, start)
            - start ** (-alpha)
            - 1j * theta * alpha * start ** (1.0 - alpha) / (alpha - 1.0)
        )
    return total


def _symmetric_exponent(theta: float, alpha: float, c: float) -> complex:
    """Both sides combined for c_plus = c_minus = c: 2c int_0^inf (cos - 1)."""
    if theta == 0.0 or c == 0.0:
        return 0.0 + 0.0j
    theta = abs(theta)
    eps = min(1.0, 0.1 / theta)
    # series for the cosine pair
    acc = 0.0
    fac = 1.0
    power = 1.0
    te = theta * eps
    for m in range(1, 40):
        fac *= (2 * m - 1) * (2 * m)
        power *= te * te
        term = (-1.0) ** m * power / (fac * (2 * m - alpha))
        acc += term
        if abs(term) < 1e-18:
            break
    total = alpha * acc * eps ** (-alpha)
    start = max(eps, 1.0, 1.0 / theta)
    if start > eps:
        f = lambda x: (np.cos(theta * x) - 1.0) * alpha * x ** (-alpha - 1.0)
        pts = [p for p in (1.0 / theta,) if eps < p < start]
        kw = dict(limit=_QUAD_LIMIT, epsabs=_QUAD_TOL, epsrel=1e-11)
        if pts:
            kw["points"] = pts
        re, _ = quad(f, eps, start, **kw)
        total += re
    env = lambda x: alpha * x ** (-alpha - 1.0)
    re, _ = quad(env, start, np.inf, weight="cos", wvar=theta, limit=_QUAD_LIMIT)
    total += re - start ** (-alpha)
    return complex(2.0 * c * total)


def strictly_stable_exponent(theta: float, alpha: float, c_plus: float, c_minus: float) -> complex:
    """Levy exponent of the strictly stable CF (case split on alpha)."""
    _validate_levy(alpha, c_plus, c_minus)
    if alpha == 1.0:
        if c_plus != c_minus:
            raise InvalidParameterError("alpha = 1 is supported only with c_plus == c_minus")
        return _symmetric_exponent(theta, alpha, c_plus)
    if c_plus == c_minus:
        return _symmetric_exponent(theta, alpha, c_plus)
    hc = 0.0 if alpha < 1.0 else np.inf
    return c_plus * _one_sided_exponent(theta, alpha, hc) + c_minus * _one_sided_exponent(
        -theta, alpha, hc
    )


def strictly_stable_cf(theta, alpha: float, c_plus: float, c_minus: float):
    """CF of the strictly stable law mu_alpha (vectorized in theta).

    For alpha < 1 the Levy integrand carries no compensation, for alpha = 1
    only the symmetric case is defined, and for alpha > 1 the integrand is
    fully compensated.
    """
    thetas = np.atleast_1d(np.asarray(theta, dtype=float))
    out = np.array(
        [np.exp(strictly_stable_exponent(t, alpha, c_plus, c_minus)) for t in thetas]
    )
    return complex(out[0]) if np.isscalar(theta) or np.ndim(theta) == 0 else out


def truncated_levy_exponent(theta, p: StableParams):
    """Levy exponent with compensation truncated at |x| <= h (no shift, no exp)."""
    thetas = np.atleast_1d(np.asarray(theta, dtype=float))
    vals = []
    for t in thetas:
        # the negative half-line maps to a positive-side integral with the
        # sign of theta (and of the compensation) flipped
        vals.append(
            p.c_plus * _one_sided_exponent(t, p.alpha, p.h)
            + p.c_minus * _one_sided_exponent(-t, p.alpha, p.h)
        )
    out = np.array(vals)
    return complex(out[0]) if np.isscalar(theta) or np.ndim(theta) == 0 else out


def truncated_cf(theta, p: StableParams):
    """CF exp(i theta a_h + truncated Levy exponent) (vectorized in theta)."""
    thetas = np.atleast_1d(np.asarray(theta, dtype=float))
    expo = np.atleast_1d(truncated_levy_exponent(thetas, p))
    out = np.exp(1j * thetas * p.a_h + expo)
    return complex(out[0]) if np.isscalar(theta) or np.ndim(theta) == 0 else out


def _validate_levy(alpha: float, c_plus: float, c_minus: float) -> None:
    if not 0.0 < alpha < 2.0:
        raise InvalidParameterError(f"alpha must be in (0,2), got {alpha}")
    if c_plus < 0.0 or c_minus < 0.0 or c_plus + c_minus <= 0.0:
        raise InvalidParameterError("need c_plus, c_minus >= 0 with c_plus + c_minus > 0")


# ---------------------------------------------------------------------------
# closed forms and sampling
# ---------------------------------------------------------------------------


def _strict_exponent_closed(theta: float, alpha: float, c_plus: float, c_minus: float) -> complex:
    """Gamma-function form of the strictly stable exponent (alpha != 1).

    One-sided integral (no compensation for alpha < 1, full for alpha > 1):
        -Gamma(1 - alpha) |theta|^alpha exp(-i pi alpha/2 sign(theta)).
    Used for the sampler parameter conversion and as an analytic cross-check.
    """
    if alpha == 1.0:
        if c_plus != c_minus:
            raise InvalidParameterError("alpha = 1 closed form requires symmetry")
        return complex(-np.pi * c_plus * abs(theta))
    s = np.sign(theta)
    mag = -_gamma_fn(1.0 - alpha) * abs(theta) ** alpha
    return mag * (
        c_plus * np.exp(-1j * np.pi * alpha / 2.0 * s)
        + c_minus * np.exp(1j * np.pi * alpha / 2.0 * s)
    )


def symmetric_scale_to_levy(alpha: float, sigma: float) -> float:
    """Per-side Levy constant c with strictly stable CF exp(-(sigma |theta|)^alpha).

    Inverse of the symmetric case of `cms_parameters`: alpha != 1 gives
    c = sigma^alpha / (2 Gamma(1-alpha) cos(pi alpha/2)); alpha = 1 gives
    c = sigma / pi.
    """
    if not 0.0 < alpha < 2.0:
        raise InvalidParameterError(f"alpha must be in (0,2), got {alpha}")
    if sigma <= 0.0:
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    if alpha == 1.0:
        return sigma / np.pi
    return sigma**alpha / (2.0 * _gamma_fn(1.0 - alpha) * np.cos(np.pi * alpha / 2.0))


def cms_parameters(alpha: float, c_plus: float, c_minus: float) -> tuple[float, float]:
    """Convert Levy constants to (skewness, scale) of the CMS sampler.

    Matching exponents gives, for alpha != 1,
        scale^alpha = Gamma(1 - alpha) cos(pi alpha / 2) (c_plus + c_minus),
        skewness    = (c_plus - c_minus) / (c_plus + c_minus),
    and for the symmetric alpha = 1 case scale = pi * c.
    """
    _validate_levy(alpha, c_plus, c_minus)
    if alpha == 1.0:
        if c_plus != c_minus:
            raise InvalidParameterError("alpha = 1 sampling requires c_plus == c_minus")
        return 0.0, np.pi * c_plus
    beta = (c_plus - c_minus) / (c_plus + c_minus)
    factor = _gamma_fn(1.0 - alpha) * np.cos(np.pi * alpha / 2.0) * (c_plus + c_minus)
    if factor <= 0.0:
        raise InvalidParameterError("parameter conversion failed: nonpositive scale factor")
    return beta, factor ** (1.0 / alpha)


def _cms_standard(alpha: float, beta: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Chambers-Mallows-Stuck draw with CF exp(-|t|^a (1 - i b tan(pi a/2) sgn t))."""
    u = (rng.random(n) - 0.5) * np.pi
    if alpha == 1.0 and beta == 0.0:
        return np.tan(u)
    w = -np.log(rng.random(n))
    if beta == 0.0:
        return (
            np.sin(alpha * u)
            / np.cos(u) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * u) / w) ** ((1.0 - alpha) / alpha)
        )
    tb = beta * np.tan(np.pi * alpha / 2.0)
    b0 = np.arctan(tb) / alpha
    s0 = (1.0 + tb * tb) ** (1.0 / (2.0 * alpha))
    return (
        s0
        * np.sin(alpha * (u + b0))
        / np.cos(u) ** (1.0 / alpha)
        * (np.cos(u - alpha * (u + b0)) / w) ** ((1.0 - alpha) / alpha)
    )


def sample_stable(p, n: int, seed) -> np.ndarray:
    """Draw n i.i.d. strictly stable variates (deterministic per seed).

    ``p`` is a StableParams (its h, a_h are ignored: sampling targets the
    strictly stable law) or a SymmetricStableScale.
    """
    if n < 1:
        raise InvalidParameterError(f"need n >= 1, got {n}")
    if isinstance(p, SymmetricStableScale):
        alpha, cp, cm = p.alpha, p.tau, p.tau
    elif isinstance(p, StableParams):
        alpha, cp, cm = p.alpha, p.c_plus, p.c_minus
    else:
        raise InvalidParameterError(f"unsupported parameter object {type(p)!r}")
    beta, scale = cms_parameters(alpha, cp, cm)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return scale * _cms_standard(alpha, beta, n, rng)
