"""Executable Markov kernels and trajectory simulation.

Five chains: the backward-recurrence countable chain (reset-or-increment),
the Gaussian AR(1) chain, the ARCH(1) recursion, the 3-periodic skeleton
chain on [0,3), and an i.i.d. reference kernel.  Each chain exposes
vectorized stationary initialization and stepping (one driving variate per
step per replicate), plus conditional-expectation machinery where the
conditional law is computable (exact row sums for countable chains, shared-
node quadrature for AR(1), closed branches for the skeleton, marginal
quantities for the i.i.d. kernel).

Tail masses of the backward-recurrence chain are handled in log space: with
P(T >= j) = gamma^(j(j+1)/2) the probabilities underflow past j ~ 25 for
small gamma, and every formula here goes through logs first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln, ndtr, ndtri, roots_legendre

from .errors import ConfigError, InvalidParameterError, NumericError
from .stable_laws import strictly_stable_cf, symmetric_scale_to_levy
from .tails import STANDARD_NORMAL, ObservableSpec, TailModel, TwoSidedPareto

__all__ = [
    "BackwardRecurrenceSpec",
    "CountableKernel",
    "backward_recurrence_kernel",
    "CountableChain",
    "AR1Spec",
    "ar1_step",
    "ar1_density",
    "AR1Chain",
    "ArchSpec",
    "arch_kappa",
    "arch_step",
    "arch_s_infinity",
    "arch_tau",
    "ArchTauEstimate",
    "ArchChain",
    "SkeletonSpec",
    "skeleton_step",
    "SkeletonChain",
    "IidChain",
    "iid_kernel",
    "Trajectory",
    "simulate_trajectory",
]

EULER_GAMMA = 0.5772156649015329
_SERIES_TAIL_TOL = 1e-8


# ---------------------------------------------------------------------------
# backward recurrence time chain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BackwardRecurrenceSpec:
    """Reset-or-increment chain driven by P(T >= j) = gamma^(j(j+1)/2)."""

    gamma: float

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise InvalidParameterError(f"gamma must be in (0,1), got {self.gamma}")

    def log_tail(self, j):
        """log P(T >= j), exact in log space."""
        j = np.asarray(j, dtype=float)
        out = j * (j + 1.0) / 2.0 * np.log(self.gamma)
        return float(out) if out.ndim == 0 else out

    def tail(self, j):
        out = np.exp(self.log_tail(j))
        return float(out) if np.ndim(out) == 0 else out

    def expected_t(self) -> float:
        """E T = sum_{j>=1} gamma^(j(j+1)/2), summed to machine precision."""
        total = 0.0
        for j in range(1, 200):
            term = self.tail(j)
            total += term
            if term < 1e-300:
                break
        return total

    def gap_assumptions_hold(self) -> bool:
        """3 E T < P(T=0) and P(T>=1) >= sup_k P(T>=k+1)/P(T>=k)."""
        et = self.expected_t()
        # sup_k gamma^(k+1) over k >= 1 is gamma^2 <= gamma
        return 3.0 * et < 1.0 - self.gamma


@dataclass
class CountableKernel:
    """Row-stochastic kernel on a truncated countable state space.

    ``P[j, k]`` are the (renormalized) transition probabilities on states
    0..K, ``pi`` the stationary vector restricted to the truncation, and the
    mass deficit records the stationary probability lost to truncation (also
    as log10, since the linear value may underflow).
    """

    P: np.ndarray
    pi: np.ndarray
    mass_deficit: float = 0.0
    log10_mass_deficit: float = -np.inf
    gamma: Optional[float] = None

    @property
    def size(self) -> int:
        return self.P.shape[0]

    def validate(self, row_tol=1e-12, pi_tol=1e-12, stat_tol=1e-10) -> None:
        rows = self.P.sum(axis=1)
        if np.abs(rows - 1.0).max() > row_tol:
            raise NumericError(f"row sums off by {np.abs(rows - 1.0).max():.2e}")
        if self.pi.min() < 0 or abs(self.pi.sum() - 1.0) > pi_tol:
            raise NumericError("stationary vector not a probability vector")
        err = np.abs(self.pi @ self.P - self.pi).sum()
        if err > stat_tol:
            raise NumericError(f"stationarity residual {err:.2e} exceeds {stat_tol:.1e}")


def backward_recurrence_kernel(
    spec: BackwardRecurrenceSpec, K: int, max_deficit: Optional[float] = None
) -> CountableKernel:
    """Truncated kernel of the backward-recurrence chain on states 0..K.

    Row j sends mass P(T>=j+1)/P(T>=j) = gamma^(j+1) up and the rest to 0;
    the last row is renormalized onto the reset move.  pi(j) is proportional
    to P(T >= j).
    """
    if K < 2:
        raise ConfigError(f"need K >= 2, got {K}")
    g = spec.gamma
    n = K + 1
    P = np.zeros((n, n))
    up = g ** (np.arange(1, K + 1, dtype=float))  # gamma^(j+1) for j = 0..K-1
    for j in range(K):
        P[j, j + 1] = up[j]
        P[j, 0] = 1.0 - up[j]
    P[K, 0] = 1.0

    et = spec.expected_t()
    pi = spec.tail(np.arange(n)) / (1.0 + et)
    log10_deficit = (spec.log_tail(K + 1) - np.log(1.0 + et)) / np.log(10.0)
    deficit = 10.0 ** log10_deficit if log10_deficit > -300 else 0.0
    if max_deficit is not None and deficit > max_deficit:
        raise ConfigError(
            f"K={K} leaves stationary mass deficit {deficit:.3e} > {max_deficit:.1e}"
        )
    pi = pi / pi.sum()
    kern = CountableKernel(
        P=P, pi=pi, mass_deficit=deficit, log10_mass_deficit=float(log10_deficit), gamma=g
    )
    kern.validate()
    return kern


class CountableChain:
    """Simulation and conditional-expectation engine over a CountableKernel."""

    noise_kind = "uniform"

    def __init__(self, kernel: CountableKernel):
        self.kernel = kernel
        self._cum_pi = np.cumsum(kernel.pi)
        P = kernel.P
        n = kernel.size
        # reset-or-increment rows enable an O(N)-per-step vectorized move
        self._up = None
        up = np.zeros(n)
        ok = True
        for j in range(n):
            row = P[j]
            nz = np.nonzero(row)[0]
            if j + 1 < n and set(nz) <= {0, j + 1}:
                up[j] = row[j + 1] if j + 1 in nz else 0.0
            elif set(nz) <= {0}:
                up[j] = 0.0
            else:
                ok = False
                break
        if ok:
            self._up = up
        else:
            self._cum_rows = np.cumsum(P, axis=1)

    def stationary_init(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.searchsorted(self._cum_pi, rng.random(size)).astype(np.int64)

    def step_block(self, states: np.ndarray, u: np.ndarray) -> np.ndarray:
        if self._up is not None:
            return np.where(u < self._up[states], states + 1, 0).astype(np.int64)
        c = self._cum_rows[states]
        return (c < u[:, None]).sum(axis=1).astype(np.int64)

    # conditional quantities are exact row sums
    def _psi_values(self, obs: ObservableSpec) -> np.ndarray:
        return np.asarray(obs.psi(np.arange(self.kernel.size)), dtype=float)

    def cond_cf(self, x, thp: float, obs: ObservableSpec) -> np.ndarray:
        row_cf = self.kernel.P @ np.exp(1j * thp * self._psi_values(obs))
        return row_cf[np.asarray(x, dtype=np.int64)]

    def trunc_mean(self, x, obs: ObservableSpec, c: float) -> np.ndarray:
        vals = self._psi_values(obs)
        rows = self.kernel.P @ np.where(np.abs(vals) <= c, vals, 0.0)
        return rows[np.asarray(x, dtype=np.int64)]

    def trunc_second(self, x, obs: ObservableSpec, c: float) -> np.ndarray:
        vals = self._psi_values(obs)
        rows = self.kernel.P @ np.where(np.abs(vals) <= c, vals * vals, 0.0)
        return rows[np.asarray(x, dtype=np.int64)]

    def cond_tail_prob(self, x, obs: ObservableSpec, c: float) -> np.ndarray:
        vals = self._psi_values(obs)
        rows = self.kernel.P @ (np.abs(vals) > c).astype(float)
        return rows[np.asarray(x, dtype=np.int64)]

    def cond_mean(self, x, obs: ObservableSpec) -> np.ndarray:
        rows = self.kernel.P @ self._psi_values(obs)
        return rows[np.asarray(x, dtype=np.int64)]


# ---------------------------------------------------------------------------
# Gaussian AR(1)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AR1Spec:
    """AR(1) with standard normal stationary marginal: X' = rho X + sqrt(1-rho^2) Z."""

    rho: float

    def __post_init__(self):
        if not 0.0 < abs(self.rho) < 1.0:
            raise InvalidParameterError(f"need 0 < |rho| < 1, got {self.rho}")


def ar1_step(spec: AR1Spec, x, noise):
    """One transition given a standard normal draw."""
    return spec.rho * x + np.sqrt(1.0 - spec.rho**2) * noise


def ar1_density(spec: AR1Spec, x, y):
    """Transition density p(x, y) relative to the stationary normal law.

    p(x,y) = (1-rho^2)^(-1/2) exp(-(rho^2 x^2 - 2 rho x y + rho^2 y^2) / (2(1-rho^2)));
    symmetric in (x, y), which is the chain's reversibility.
    """
    r = spec.rho
    s2 = 1.0 - r * r
    expo = (-(r * r) * (np.asarray(x) ** 2 + np.asarray(y) ** 2) / 2.0 + r * np.asarray(x) * np.asarray(y)) / s2
    return np.exp(expo) / np.sqrt(s2)


class _LinearInterp:
    """Uniform-grid linear interpolation (real or complex values)."""

    def __init__(self, m0: float, dm: float, values: np.ndarray):
        self.m0 = m0
        self.dm = dm
        self.values = values

    def __call__(self, m):
        m = np.asarray(m, dtype=float)
        pos = (m - self.m0) / self.dm
        idx = np.clip(pos.astype(np.int64), 0, len(self.values) - 2)
        frac = np.clip(pos - idx, 0.0, 1.0)
        return self.values[idx] * (1.0 - frac) + self.values[idx + 1] * frac


_GL_CACHE = {}


def _gl_nodes(order: int):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = roots_legendre(order)
    return _GL_CACHE[order]


_GH_CACHE = {}


def _gh_nodes(order: int):
    if order not in _GH_CACHE:
        t, w = np.polynomial.hermite.hermgauss(order)
        _GH_CACHE[order] = (t, w / np.sqrt(np.pi))
    return _GH_CACHE[order]


class AR1Chain:
    """AR(1) engine with conditional machinery for monotone quantile observables.

    The conditional law given x is N(rho x, 1 - rho^2), so every conditional
    quantity is a function of the conditional mean m = rho x alone.  Batched
    evaluations tabulate on a dense m-grid and interpolate linearly; the
    interpolation is a convex combination, so |conditional CF| <= 1 is
    preserved exactly.
    """

    noise_kind = "normal"

    def __init__(self, spec: AR1Spec):
        self.spec = spec
        self.rho = spec.rho
        self.sigma = np.sqrt(1.0 - spec.rho**2)

    def stationary_init(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.standard_normal(size)

    def step_block(self, states: np.ndarray, z: np.ndarray) -> np.ndarray:
        return self.rho * states + self.sigma * z

    # -- conditional machinery ------------------------------------------------

    @staticmethod
    def _require_quantile_obs(obs: ObservableSpec) -> TwoSidedPareto:
        if obs.target is None or obs.base is not STANDARD_NORMAL:
            raise NumericError(
                "AR(1) conditional expectations require a quantile observable "
                "over the standard normal marginal"
            )
        return obs.target

    def _support_y(self, target: TwoSidedPareto, c: float):
        """y-interval carrying {|psi| <= c} (psi is monotone increasing)."""
        if c < target.t0:
            return ndtri(target.cdf(-c)), ndtri(target.cdf(c))
        s_hi = target.c_plus * c ** -target.alpha
        u_lo = target.c_minus * c ** -target.alpha
        y_hi = -ndtri(s_hi) if s_hi > 0 else np.inf
        y_lo = ndtri(u_lo) if u_lo > 0 else -np.inf
        return y_lo, y_hi

    def cond_tail_prob(self, x, obs: ObservableSpec, c: float) -> np.ndarray:
        """P(|psi(X_1)| > c | x), exact through the normal CDF."""
        target = self._require_quantile_obs(obs)
        y_lo, y_hi = self._support_y(target, c)
        m = self.rho * np.asarray(x, dtype=float)
        return ndtr((y_lo - m) / self.sigma) + ndtr(-(y_hi - m) / self.sigma)

    def _moment_nodes(self, obs: ObservableSpec, c: float, power: int, n_tail=48, n_center=64):
        """Shared u-space nodes for E[psi^power 1{|psi|<=c} | x].

        The outer regions integrate in log distance-to-endpoint, which makes
        the near-singular Pareto branches smooth; returns (y_nodes, weights)
        with weights already carrying psi^power and the u-space Jacobian.
        """
        target = self._require_quantile_obs(obs)
        xs, ws = _gl_nodes(n_tail)
        xc, wc = _gl_nodes(n_center)
        ys, wq = [], []

        u_lo = target.cdf(-c)
        sf_hi = target.c_plus * c ** -target.alpha if c >= target.t0 else 1.0 - target.cdf(c)

        def add_region(nodes_u, w_u):
            psi_v = target.quantile(nodes_u)
            ys.append(ndtri(nodes_u))
            wq.append(w_u * psi_v**power)

        # lower tail region [u_lo, q_lo] in log(u)
        if target.c_minus > 0 and u_lo < target.q_lo:
            a, b = np.log(u_lo), np.log(target.q_lo)
            s = 0.5 * (a + b) + 0.5 * (b - a) * xs
            u = np.exp(s)
            add_region(u, ws * u * 0.5 * (b - a))
        # center [max(u_lo,q_lo), min(1-q_hi, cdf(c))] linear
        lo_c = max(u_lo, target.q_lo)
        hi_c = min(1.0 - target.q_hi, 1.0 - sf_hi)
        if hi_c > lo_c:
            u = 0.5 * (lo_c + hi_c) + 0.5 * (hi_c - lo_c) * xc
            add_region(u, wc * 0.5 * (hi_c - lo_c))
        # upper tail region in log(1-u), evaluated through the survival branch
        if target.c_plus > 0 and sf_hi < target.q_hi:
            a, b = np.log(sf_hi), np.log(target.q_hi)
            s = 0.5 * (a + b) + 0.5 * (b - a) * xs
            t = np.exp(s)
            psi_v = target.quantile_sf(t)
            ys.append(-ndtri(t))
            wq.append(ws * t * 0.5 * (b - a) * psi_v**power)
        return np.concatenate(ys), np.concatenate(wq)

    def _weight_log(self, m: np.ndarray, y: np.ndarray) -> np.ndarray:
        """log of the conditional-to-stationary density ratio p(x, y), m = rho x."""
        s2 = self.sigma**2
        return (
            y[None, :] ** 2 / 2.0
            - (y[None, :] - m[:, None]) ** 2 / (2.0 * s2)
            - np.log(self.sigma)
        )

    def _moment_direct(self, x, obs, c: float, power: int) -> np.ndarray:
        y, wq = self._moment_nodes(obs, c, power)
        m = self.rho * np.atleast_1d(np.asarray(x, dtype=float))
        out = np.exp(self._weight_log(m, y)) @ wq
        return out

    def trunc_mean(self, x, obs: ObservableSpec, c: float) -> np.ndarray:
        """E[psi(X_1) 1{|psi| <= c} | x] by shared-node quadrature."""
        return self._moment_direct(x, obs, c, 1)

    def trunc_second(self, x, obs: ObservableSpec, c: float) -> np.ndarray:
        return self._moment_direct(x, obs, c, 2)

    def cond_mean(self, x, obs: ObservableSpec) -> np.ndarray:
        """Untruncated conditional mean (requires tail exponent > 1)."""
        target = self._require_quantile_obs(obs)
        if target.alpha <= 1.0:
            raise NumericError("conditional mean requires alpha > 1")
        # conditional tail exponent alpha/(1-rho^2) keeps the remainder beyond
        # the cut negligible at this level
        return self._moment_direct(x, obs, 1e13, 1)

    def make_moment_table(self, obs, c: float, power: int, m_lo: float, m_hi: float):
        y, wq = self._moment_nodes(obs, c, power)
        grid = _m_grid(m_lo, m_hi)
        vals = np.exp(self._weight_log(grid, y)) @ wq
        return _LinearInterp(grid[0], grid[1] - grid[0], vals)

    def cond_cf(self, x, thp: float, obs: ObservableSpec, order: int = 128) -> np.ndarray:
        """Conditional CF of psi(X_1)/ (1/thp) by Gauss-Hermite of given order."""
        t, w = _gh_nodes(order)
        m = self.rho * np.atleast_1d(np.asarray(x, dtype=float))
        y = m[:, None] + np.sqrt(2.0) * self.sigma * t[None, :]
        return np.exp(1j * thp * obs.psi(y)) @ w

    def make_cf_table(self, thp: float, obs: ObservableSpec, order: int, m_lo: float, m_hi: float):
        t, w = _gh_nodes(order)
        grid = _m_grid(m_lo, m_hi)
        y = grid[:, None] + np.sqrt(2.0) * self.sigma * t[None, :]
        vals = np.exp(1j * thp * obs.psi(y)) @ w
        return _LinearInterp(grid[0], grid[1] - grid[0], vals)

    def cond_cf_reference(self, x: float, thp: float, obs: ObservableSpec) -> complex:
        """Slow scalar reference for the conditional CF.

        Compensated center by adaptive quadrature plus oscillatory tails in
        observable space through QUADPACK's Fourier rule; target accuracy
        ~1e-9 regardless of how heavy the observable tail is.
        """
        from scipy.integrate import quad

        target = self._require_quantile_obs(obs)
        if thp == 0.0:
            return 1.0 + 0.0j
        m = self.rho * float(x)
        sig = self.sigma
        cut = max(1.5 * target.t0, 0.05 / abs(thp))
        y_lo, y_hi = self._support_y(target, cut)

        def gauss(y):
            return np.exp(-((y - m) ** 2) / (2 * sig * sig)) / (sig * np.sqrt(2 * np.pi))

        fre = lambda y: (np.cos(thp * float(obs.psi(np.array([y]))[0])) - 1.0) * gauss(y)
        fim = lambda y: np.sin(thp * float(obs.psi(np.array([y]))[0])) * gauss(y)
        re, _ = quad(fre, y_lo, y_hi, limit=500, epsabs=1e-13)
        im, _ = quad(fim, y_lo, y_hi, limit=500, epsabs=1e-13)
        total = 1.0 + re + 1j * im

        def cond_density(v, c_side, sign):
            # conditional density of psi at sign * v, v >= cut
            sf = c_side * v ** -target.alpha
            yv = -ndtri(sf)
            base = max(np.exp(-yv * yv / 2.0) / np.sqrt(2.0 * np.pi), 1e-312)
            dy_dv = target.alpha * c_side * v ** (-target.alpha - 1.0) / base
            return gauss(sign * yv) * dy_dv

        for c_side, sign in ((target.c_plus, 1.0), (target.c_minus, -1.0)):
            if c_side == 0.0:
                continue
            g = lambda v: cond_density(v, c_side, sign)
            cre, _ = quad(g, cut, np.inf, weight="cos", wvar=abs(thp), limit=500)
            cim, _ = quad(g, cut, np.inf, weight="sin", wvar=abs(thp), limit=500)
            mass, _ = quad(g, cut, np.inf, limit=500)
            total += (cre - mass) + 1j * np.sign(thp) * sign * cim
        return complex(total)


def _m_grid(m_lo: float, m_hi: float, target_step: float = 1e-3):
    span = max(m_hi - m_lo, 1e-6)
    n = int(np.clip(np.ceil(span / target_step) + 1, 513, 20001))
    return np.linspace(m_lo - 1e-9, m_hi + 1e-9, n)


# ---------------------------------------------------------------------------
# ARCH(1)
# ---------------------------------------------------------------------------


def _arch_log_moment(u, lam: float):
    """log E (lam Z^2)^u for Z standard normal."""
    return u * np.log(2.0 * lam) + gammaln(u + 0.5) - gammaln(0.5)


def arch_kappa(lam: float) -> float:
    """Unique positive root of E(lam Z^2)^u = 1.

    Exists for lam in (0, 2 e^euler_gamma); the root is bracketed away from
    the trivial zero at u = 0 and solved to residual < 1e-10.
    """
    if not 0.0 < lam < 2.0 * np.exp(EULER_GAMMA):
        raise InvalidParameterError(
            f"lambda must lie in (0, 2 e^gamma) ~ (0, {2 * np.exp(EULER_GAMMA):.4f}), got {lam}"
        )
    f = lambda u: _arch_log_moment(u, lam)
    hi = 1.0
    while f(hi) <= 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise NumericError("kappa bracketing failed")
    lo = hi / 2.0
    while f(lo) >= 0.0:
        lo /= 2.0
        if lo < 1e-12:
            break
    root = brentq(f, lo, hi, xtol=1e-14, maxiter=200)
    if abs(np.exp(f(root)) - 1.0) > 1e-10:
        raise NumericError(f"kappa residual {abs(np.exp(f(root)) - 1.0):.2e} too large")
    return float(root)


@dataclass(frozen=True)
class ArchSpec:
    """ARCH(1) recursion X' = sqrt(beta + lam X^2) Z with N(0,1) innovations."""

    beta: float
    lam: float
    series_terms: int = 200
    kappa: float = field(init=False)

    def __post_init__(self):
        if self.beta <= 0.0:
            raise InvalidParameterError(f"beta must be positive, got {self.beta}")
        object.__setattr__(self, "kappa", arch_kappa(self.lam))
        r = np.sqrt(2.0 * self.lam / np.pi)  # E|term_j| = r^j
        if r < 1.0:
            needed = int(np.ceil(np.log(_SERIES_TAIL_TOL * (1.0 - r)) / np.log(r)))
            if self.series_terms < needed:
                raise InvalidParameterError(
                    f"series_terms={self.series_terms} too small: expected neglected "
                    f"tail exceeds {_SERIES_TAIL_TOL:g} (need >= {needed})"
                )


def arch_step(spec: ArchSpec, x, noise):
    """One ARCH(1) transition given a standard normal draw."""
    return np.sqrt(spec.beta + spec.lam * np.asarray(x) ** 2) * noise


def _s_infinity_batch(spec: ArchSpec, rng: np.random.Generator, m: int):
    """m truncated draws of the weighted-product series, with per-draw rejection.

    A draw is rejected when its last retained term is not yet below the tail
    tolerance (partial products failed to decay within series_terms).
    """
    J = spec.series_terms
    vals = np.zeros(m)
    ok = np.ones(m, dtype=bool)
    chunk = max(1, min(m, int(2e6) // J))
    done = 0
    half_log_lam = 0.5 * np.log(spec.lam)
    while done < m:
        take = min(chunk, m - done)
        z = rng.standard_normal((take, J))
        with np.errstate(divide="ignore"):
            term_logs = np.cumsum(np.log(np.abs(z)) + half_log_lam, axis=1)
        vals[done : done + take] = (np.sign(z) * np.exp(term_logs)).sum(axis=1)
        ok[done : done + take] = np.exp(term_logs[:, -1]) <= _SERIES_TAIL_TOL
        done += take
    return vals, int((~ok).sum())


def arch_s_infinity(spec: ArchSpec, seed) -> float:
    """One truncated draw of S_infinity (deterministic per seed)."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    vals, rejected = _s_infinity_batch(spec, rng, 1)
    if rejected:
        raise NumericError("series draw rejected: partial products did not decay")
    return float(vals[0])


@dataclass(frozen=True)
class ArchTauEstimate:
    estimate: float
    stderr: float
    n_used: int
    n_rejected: int


def arch_tau(spec: ArchSpec, n_draws: int, seed) -> ArchTauEstimate:
    """Monte-Carlo estimate of E[|1 + S_inf|^(2 kappa) - |S_inf|^(2 kappa)]."""
    if n_draws < 10_000:
        raise InvalidParameterError(f"need n_draws >= 1e4, got {n_draws}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    vals, rejected = _s_infinity_batch(spec, rng, n_draws)
    tk = 2.0 * spec.kappa
    integrand = np.abs(1.0 + vals) ** tk - np.abs(vals) ** tk
    est = float(integrand.mean())
    se = float(integrand.std(ddof=1) / np.sqrt(len(integrand)))
    return ArchTauEstimate(estimate=est, stderr=se, n_used=n_draws - rejected, n_rejected=rejected)


class ArchChain:
    """ARCH(1) engine; stationarity approximated by a documented burn-in."""

    noise_kind = "normal"

    def __init__(self, spec: ArchSpec, burn_in: int = 1000):
        self.spec = spec
        self.burn_in = burn_in

    def stationary_init(self, rng: np.random.Generator, size: int) -> np.ndarray:
        x = np.zeros(size)
        for _ in range(self.burn_in):
            x = arch_step(self.spec, x, rng.standard_normal(size))
        if not np.all(np.isfinite(x)):
            raise NumericError("ARCH burn-in diverged")
        return x

    def step_block(self, states: np.ndarray, z: np.ndarray) -> np.ndarray:
        return np.sqrt(self.spec.beta + self.spec.lam * states**2) * z


# ---------------------------------------------------------------------------
# 3-skeleton chain on [0, 3)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SkeletonSpec:
    """Chain on [0,3): two deterministic forward moves, then a uniform reset
    onto [0,1) u [2,3), with a symmetric alpha-stable observable on [0,1).
    """

    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise InvalidParameterError(f"alpha must be in (0,2), got {self.alpha}")
        if self.scale <= 0.0:
            raise InvalidParameterError(f"scale must be positive, got {self.scale}")

    def psi_unit(self, u):
        """Measurable map sending Lebesgue on [0,1) to the symmetric stable law.

        alpha = 1 is the exact tangent transform; otherwise the argument's
        mantissa is split into two 26-bit uniforms feeding the
        Chambers-Mallows-Stuck transform (exact in law up to the float
        quantization of the split).
        """
        u = np.asarray(u, dtype=float)
        if self.alpha == 1.0:
            return self.scale * np.tan(np.pi * (u - 0.5))
        scaled = u * 67108864.0  # 2^26
        u1 = (np.floor(scaled) + 0.5) / 67108864.0
        u2 = np.clip(scaled - np.floor(scaled), 7.45058059692383e-09, 1.0 - 7.45058059692383e-09)
        phi = np.pi * (u1 - 0.5)
        w = -np.log(u2)
        a = self.alpha
        val = (
            np.sin(a * phi)
            / np.cos(phi) ** (1.0 / a)
            * (np.cos((1.0 - a) * phi) / w) ** ((1.0 - a) / a)
        )
        return self.scale * val

    def psi(self, x):
        """Observable: psi on [0,1), -psi(.-1) on [1,2), 0 on [2,3)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        first = x < 1.0
        second = (x >= 1.0) & (x < 2.0)
        out = np.where(first, self.psi_unit(np.where(first, x, 0.0)), out)
        out = np.where(second, -self.psi_unit(np.where(second, x - 1.0, 0.0)), out)
        return out

    @property
    def levy_constant(self) -> float:
        """Per-side Levy constant of psi_unit's image law."""
        return symmetric_scale_to_levy(self.alpha, self.scale)

    def observable(self) -> ObservableSpec:
        c_pair = self.levy_constant
        tm = TailModel(self.alpha, c_pair / 2.0, c_pair / 2.0, ell_const=c_pair)
        return ObservableSpec(psi=self.psi, tail_model=tm, mean=0.0)


def skeleton_step(spec: SkeletonSpec, x, u):
    """One move: deterministic +1 from [0,2); from [2,3) jump uniformly onto
    [0,1) u [2,3) with equal mass (u < 1/2 lands low, else high)."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x >= 3.0)):
        raise InvalidParameterError("state outside [0,3)")
    u = np.asarray(u, dtype=float)
    jump = np.where(u < 0.5, 2.0 * u, 2.0 * u + 1.0)
    out = np.where(x < 2.0, x + 1.0, jump)
    return float(out) if out.ndim == 0 else out


class SkeletonChain:
    noise_kind = "uniform"

    def __init__(self, spec: SkeletonSpec):
        self.spec = spec
        self._psi_cf_cache = {}

    def stationary_init(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # invariant density 1/4 on [0,2), 1/2 on [2,3)
        w = rng.random(size)
        return np.where(w < 0.5, 4.0 * w, 2.0 * w + 1.0)

    def step_block(self, states: np.ndarray, u: np.ndarray) -> np.ndarray:
        jump = np.where(u < 0.5, 2.0 * u, 2.0 * u + 1.0)
        return np.where(states < 2.0, states + 1.0, jump)

    def _psi_image_cf(self, thp: float) -> complex:
        if thp not in self._psi_cf_cache:
            c = self.spec.levy_constant
            self._psi_cf_cache[thp] = complex(
                strictly_stable_cf(thp, self.spec.alpha, c, c)
            )
        return self._psi_cf_cache[thp]

    def cond_cf(self, x, thp: float, obs: ObservableSpec = None) -> np.ndarray:
        """Exact: deterministic branches, and the stable image CF on the
        uniform branch (half the jump mass lands on the zero segment)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        spec = self.spec
        out = np.empty(len(x), dtype=complex)
        first = x < 1.0
        second = (x >= 1.0) & (x < 2.0)
        third = x >= 2.0
        out[first] = np.exp(-1j * thp * spec.psi_unit(x[first]))
        out[second] = 1.0
        out[third] = 0.5 + 0.5 * self._psi_image_cf(thp)
        return out

    def cond_mean(self, x, obs: ObservableSpec = None) -> np.ndarray:
        if self.spec.alpha <= 1.0:
            raise NumericError("conditional mean requires alpha > 1")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(len(x))
        first = x < 1.0
        out[first] = -self.spec.psi_unit(x[first])
        return out


# ---------------------------------------------------------------------------
# i.i.d. reference kernel
# ---------------------------------------------------------------------------


class IidChain:
    """Kernel with P(x, .) = pi: every step draws afresh from the marginal.

    States are the observable values themselves (identity observable), so
    conditional quantities coincide with marginal ones.
    """

    noise_kind = "uniform"

    def __init__(self, marginal: TwoSidedPareto):
        self.marginal = marginal
        self._cf_cache = {}

    def observable(self) -> ObservableSpec:
        m = self.marginal
        return ObservableSpec(
            psi=lambda x: np.asarray(x, dtype=float),
            tail_model=m.tail_model,
            mean=m.mean if m.alpha > 1.0 else 0.0,
            target=m,
        )

    def stationary_init(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.marginal.quantile(rng.random(size))

    def step_block(self, states: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.marginal.quantile(u)

    def cond_cf(self, x, thp: float, obs: ObservableSpec = None) -> np.ndarray:
        if thp not in self._cf_cache:
            self._cf_cache[thp] = complex(self.marginal.cf(thp))
        return np.full(np.atleast_1d(np.asarray(x)).shape, self._cf_cache[thp])

    def trunc_mean(self, x, obs, c: float) -> np.ndarray:
        return np.full(np.atleast_1d(np.asarray(x)).shape, self.marginal.trunc_mean(c))

    def trunc_second(self, x, obs, c: float) -> np.ndarray:
        return np.full(np.atleast_1d(np.asarray(x)).shape, self.marginal.trunc_second(c))

    def cond_tail_prob(self, x, obs, c: float) -> np.ndarray:
        return np.full(np.atleast_1d(np.asarray(x)).shape, self.marginal.tail_prob(c))

    def cond_mean(self, x, obs=None) -> np.ndarray:
        return np.full(np.atleast_1d(np.asarray(x)).shape, self.observable().mean)


def iid_kernel(marginal: TwoSidedPareto) -> IidChain:
    """Reference kernel whose rows all equal the stationary law."""
    return IidChain(marginal)


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """A simulated path X_0..X_n, reproducible from (chain spec, seed, n)."""

    seed: object
    states: np.ndarray
    psi_values: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return len(self.states) - 1


def simulate_trajectory(chain, n: int, seed, observable: Optional[ObservableSpec] = None) -> Trajectory:
    """Length-n stationary path of a chain, one driving variate per step."""
    if n < 1:
        raise InvalidParameterError(f"need n >= 1, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    x = chain.stationary_init(rng, 1)
    states = np.empty(n + 1, dtype=x.dtype)
    states[0] = x[0]
    block = 65536
    pos = 0
    while pos < n:
        take = min(block, n - pos)
        draws = rng.standard_normal(take) if chain.noise_kind == "normal" else rng.random(take)
        for j in range(take):
            x = chain.step_block(x, draws[j : j + 1])
            states[pos + j + 1] = x[0]
        pos += take
    psi_vals = None
    if observable is not None:
        psi_vals = np.asarray(observable.psi(states), dtype=float)
    elif hasattr(chain, "spec") and isinstance(getattr(chain, "spec", None), SkeletonSpec):
        psi_vals = chain.spec.psi(states)
    return Trajectory(seed=seed, states=states, psi_values=psi_vals)
