"""Heavy-tail models, normalizing sequences, and observable construction.

A TailModel describes P(|Psi| > t) = t^{-alpha} ell(t) together with the
one-sided balance constants.  The normalizing sequence B_n solves
n ell(B_n) / B_n^alpha = c_plus + c_minus.

TwoSidedPareto is the canonical member of the domain of attraction: its tail
is exactly (c_plus + c_minus) t^{-alpha} above an onset t0 (chosen so the two
tails carry half the mass; the center is filled uniformly), so ell is the
constant c_plus + c_minus and every truncated moment has a closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr, ndtri

from .errors import InvalidParameterError, NumericError
from .stable_laws import _fourier_tail

__all__ = [
    "TailModel",
    "ObservableSpec",
    "TwoSidedPareto",
    "two_sided_pareto",
    "solve_bn",
    "quantile_observable",
    "hill_estimate",
    "STANDARD_NORMAL",
]

_TINY = 1e-320
_LOG_CAP = 440.0  # exp cap keeping theta' * psi finite in double precision


@dataclass(frozen=True)
class TailModel:
    """Regularly varying two-sided tail t^{-alpha} ell(t) with balance c+/c-.

    ``ell`` is an optional slowly varying factor handle; when None the factor
    is the constant ``ell_const`` and B_n has the closed form
    (n ell_const / (c_plus + c_minus))^(1/alpha).
    """

    alpha: float
    c_plus: float
    c_minus: float
    ell: Optional[Callable[[float], float]] = None
    ell_const: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise InvalidParameterError(f"alpha must be in (0,2), got {self.alpha}")
        if self.c_plus < 0 or self.c_minus < 0 or self.c_plus + self.c_minus <= 0:
            raise InvalidParameterError("need c_plus, c_minus >= 0 with positive sum")

    @property
    def total(self) -> float:
        return self.c_plus + self.c_minus


def solve_bn(n: int, tm: TailModel) -> float:
    """Normalizing constant B_n with n ell(B_n) / B_n^alpha = c_plus + c_minus.

    Constant ell uses the closed form; otherwise the monotone residual is
    bracketed on [1, n^(2/alpha)] and bisected to 1e-12 relative tolerance.
    """
    if n < 1:
        raise InvalidParameterError(f"need n >= 1, got {n}")
    if tm.ell is None:
        return (n * tm.ell_const / tm.total) ** (1.0 / tm.alpha)
    resid = lambda b: np.log(n * tm.ell(b) / (tm.total * b ** tm.alpha))
    lo, hi = 1.0, float(n) ** (2.0 / tm.alpha)
    rlo, rhi = resid(lo), resid(hi)
    if rlo < 0.0 and n > 1:
        lo = 1e-6
        rlo = resid(lo)
    if rlo * rhi > 0.0:
        raise NumericError(
            f"B_n bracket failed on [{lo}, {hi}]: residuals ({rlo:.3g}, {rhi:.3g}); "
            "is ell slowly varying?"
        )
    return brentq(resid, lo, hi, rtol=1e-12, maxiter=200)


@dataclass(frozen=True)
class TwoSidedPareto:
    """Exact power tail (c_plus + c_minus) t^{-alpha} above t0, uniform center."""

    alpha: float
    c_plus: float
    c_minus: float
    t0: float = field(init=False)
    q_lo: float = field(init=False)  # CDF mass below -t0
    q_hi: float = field(init=False)  # SF mass above +t0

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise InvalidParameterError(f"alpha must be in (0,2), got {self.alpha}")
        if self.c_plus < 0 or self.c_minus < 0 or self.c_plus + self.c_minus <= 0:
            raise InvalidParameterError("need c_plus, c_minus >= 0 with positive sum")
        total = self.c_plus + self.c_minus
        t0 = (2.0 * total) ** (1.0 / self.alpha)  # tails carry mass 1/2 at onset
        object.__setattr__(self, "t0", t0)
        object.__setattr__(self, "q_lo", self.c_minus * t0 ** -self.alpha)
        object.__setattr__(self, "q_hi", self.c_plus * t0 ** -self.alpha)

    @property
    def tail_model(self) -> TailModel:
        return TailModel(
            self.alpha, self.c_plus, self.c_minus, ell_const=self.c_plus + self.c_minus
        )

    def tail(self, t):
        """P(|X| > t) for t >= t0 (exact power region)."""
        t = np.asarray(t, dtype=float)
        out = np.where(
            t >= self.t0,
            (self.c_plus + self.c_minus) * t ** -self.alpha,
            np.nan,
        )
        return float(out) if out.ndim == 0 else out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        center = self.q_lo + (x + self.t0) * (1.0 - self.q_lo - self.q_hi) / (2.0 * self.t0)
        with np.errstate(divide="ignore"):
            lo = self.c_minus * np.abs(np.minimum(x, -self.t0)) ** -self.alpha
            hi = 1.0 - self.c_plus * np.maximum(x, self.t0) ** -self.alpha
        out = np.where(x < -self.t0, lo, np.where(x > self.t0, hi, center))
        return float(out) if out.ndim == 0 else out

    def quantile(self, u):
        """Exact inverse of the CDF on (0, 1) (vectorized)."""
        u = np.asarray(u, dtype=float)
        mid = -self.t0 + (u - self.q_lo) * 2.0 * self.t0 / (1.0 - self.q_lo - self.q_hi)
        with np.errstate(divide="ignore", over="ignore"):
            lo = -np.exp(
                np.minimum(
                    (np.log(self.c_minus) - np.log(np.maximum(u, _TINY))) / self.alpha,
                    _LOG_CAP,
                )
            ) if self.c_minus > 0 else np.full_like(u, -self.t0)
            hi = np.exp(
                np.minimum(
                    (np.log(self.c_plus) - np.log(np.maximum(1.0 - u, _TINY))) / self.alpha,
                    _LOG_CAP,
                )
            ) if self.c_plus > 0 else np.full_like(u, self.t0)
        out = np.where(u < self.q_lo, lo, np.where(u > 1.0 - self.q_hi, hi, mid))
        return float(out) if out.ndim == 0 else out

    def quantile_sf(self, s):
        """Upper quantile as a function of the survival mass s = 1 - u."""
        s = np.asarray(s, dtype=float)
        out = np.exp(
            np.minimum((np.log(self.c_plus) - np.log(np.maximum(s, _TINY))) / self.alpha, _LOG_CAP)
        )
        return float(out) if out.ndim == 0 else out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.quantile(rng.random(n))

    @property
    def mean(self) -> float:
        if self.alpha <= 1.0:
            raise InvalidParameterError("mean undefined for alpha <= 1")
        tail_part = self.alpha * self.t0 ** (1.0 - self.alpha) / (self.alpha - 1.0)
        return (self.c_plus - self.c_minus) * tail_part

    def trunc_mean(self, c: float) -> float:
        """E[X 1{|X| <= c}] (closed form; the uniform center is symmetric)."""
        if c <= self.t0:
            return 0.0
        if self.alpha == 1.0:
            tail_part = np.log(c / self.t0)
        else:
            tail_part = self.alpha * (c ** (1 - self.alpha) - self.t0 ** (1 - self.alpha)) / (
                1 - self.alpha
            )
        return (self.c_plus - self.c_minus) * tail_part

    def trunc_second(self, c: float) -> float:
        """E[X^2 1{|X| <= c}] (closed form)."""
        dens = (1.0 - self.q_lo - self.q_hi) / (2.0 * self.t0)
        if c <= self.t0:
            return 2.0 * dens * c ** 3 / 3.0
        center = 2.0 * dens * self.t0 ** 3 / 3.0
        tail_part = self.alpha * (c ** (2 - self.alpha) - self.t0 ** (2 - self.alpha)) / (
            2 - self.alpha
        )
        return center + (self.c_plus + self.c_minus) * tail_part

    def tail_prob(self, c: float) -> float:
        """P(|X| > c) (closed form)."""
        if c <= self.t0:
            return 1.0 - (1.0 - self.q_lo - self.q_hi) * c / self.t0
        return (self.c_plus + self.c_minus) * c ** -self.alpha

    def cf(self, theta):
        """Characteristic function (uniform center closed form + tail quadrature).

        The tails start at t0 > 0, so the oscillatory integrals
        int_{t0}^inf e^{i theta x} alpha c x^{-alpha-1} dx carry no
        singularity and QUADPACK's Fourier rule applies for every alpha.
        """
        thetas = np.atleast_1d(np.asarray(theta, dtype=float))
        out = np.empty(len(thetas), dtype=complex)
        center_mass = 1.0 - self.q_lo - self.q_hi
        for i, t in enumerate(thetas):
            if t == 0.0:
                out[i] = 1.0
                continue
            center = center_mass * np.sinc(t * self.t0 / np.pi)
            ft = _fourier_tail(abs(t), self.alpha, self.t0)
            if t < 0:
                ft = np.conj(ft)
            out[i] = center + self.c_plus * ft + self.c_minus * np.conj(ft)
        return complex(out[0]) if np.isscalar(theta) or np.ndim(theta) == 0 else out


def two_sided_pareto(alpha: float, c_plus: float, c_minus: float) -> TwoSidedPareto:
    """Distribution handle with exact Pareto tails balanced c_plus : c_minus."""
    return TwoSidedPareto(alpha, c_plus, c_minus)


@dataclass(frozen=True)
class _NormalBase:
    """Standard normal marginal adapter (CDF / SF / quantile)."""

    def cdf(self, y):
        return ndtr(y)

    def sf(self, y):
        return ndtr(-np.asarray(y, dtype=float))

    def quantile(self, u):
        return ndtri(u)


STANDARD_NORMAL = _NormalBase()


@dataclass(frozen=True)
class ObservableSpec:
    """A state observable together with its declared stationary tail.

    ``psi`` maps states to reals (vectorized).  ``mean`` is the declared
    stationary mean pi(psi) (0 for symmetric constructions).  When the
    observable is a quantile transform with an exactly known image law,
    ``target`` and ``base`` carry the pieces needed for exact conditional
    moments; ``inverse`` is the monotone inverse of psi.
    """

    psi: Callable[[np.ndarray], np.ndarray]
    tail_model: TailModel
    mean: float = 0.0
    target: Optional[TwoSidedPareto] = None
    base: object = None
    inverse: Optional[Callable[[np.ndarray], np.ndarray]] = None
    beta_moment: Optional[float] = None  # declared finite-moment order (weak-LLN use)


def quantile_observable(base_cdf, target: TwoSidedPareto, base=None) -> ObservableSpec:
    """Observable psi(x) = target.quantile(base_cdf(x)).

    The stationary image law is then exactly ``target`` provided the base
    marginal is continuous and strictly increasing.  When ``base`` is the
    standard-normal adapter a survival-function branch keeps the upper tail
    accurate far beyond CDF saturation.
    """
    if base is None and base_cdf is ndtr:
        base = STANDARD_NORMAL
    if isinstance(base, _NormalBase):
        alpha = target.alpha
        lcp = np.log(target.c_plus) if target.c_plus > 0 else -np.inf
        lcm = np.log(target.c_minus) if target.c_minus > 0 else -np.inf

        def psi(y):
            y = np.asarray(y, dtype=float)
            a = ndtr(-np.abs(y))
            u = np.where(y < 0, a, 1.0 - a)
            s = np.where(y < 0, 1.0 - a, a)
            out = -target.t0 + (u - target.q_lo) * 2.0 * target.t0 / (
                1.0 - target.q_lo - target.q_hi
            )
            with np.errstate(divide="ignore"):
                log_s = np.log(np.maximum(s, _TINY))
                log_u = np.log(np.maximum(u, _TINY))
            hi = s < target.q_hi
            lo = u < target.q_lo
            out = np.where(hi, np.exp(np.minimum((lcp - log_s) / alpha, _LOG_CAP)), out)
            out = np.where(lo, -np.exp(np.minimum((lcm - log_u) / alpha, _LOG_CAP)), out)
            return out

        inverse = lambda v: ndtri(target.cdf(v))
    else:
        psi = lambda x: target.quantile(base_cdf(np.asarray(x, dtype=float)))
        inverse = None
    mean = target.mean if target.alpha > 1.0 else 0.0
    return ObservableSpec(
        psi=psi,
        tail_model=target.tail_model,
        mean=mean,
        target=target,
        base=base,
        inverse=inverse,
    )


def hill_estimate(samples, k: int) -> float:
    """Hill tail-index estimator on the top-k order statistics of |samples|."""
    x = np.abs(np.asarray(samples, dtype=float))
    if k < 1 or k >= len(x):
        raise InvalidParameterError(f"need 1 <= k < len(samples), got k={k}, n={len(x)}")
    x = np.sort(x)
    top = x[-k:]
    pivot = x[-k - 1]
    if pivot <= 0.0:
        raise NumericError("Hill estimator undefined: non-positive order statistic")
    return float(k / np.sum(np.log(top) - np.log(pivot)))
