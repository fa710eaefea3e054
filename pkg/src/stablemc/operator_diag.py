"""Numerical verification of transition-operator properties.

Everything is computed on the pi-weighted space: conjugating the kernel by
diag(sqrt(pi)) turns L^2(pi) norms into Euclidean ones, and the restriction
to mean-zero functions is a rank-one deflation (projecting out sqrt(pi),
which the weighted operator fixes).  States with pi underflowed to zero are
excluded; the leak this ignores is of the order of the underflow itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import roots_legendre

from .chains import BackwardRecurrenceSpec, CountableKernel
from .errors import InvalidParameterError, NumericError

__all__ = [
    "apply_P",
    "operator_norm_L20",
    "ui2_tail_sup",
    "ui2_paper_bound",
    "hyper_norm_fk",
    "hyper_norm_fk_direct",
    "ar1_hyper_integral",
    "HyperIntegralVerdict",
    "poisson_solve",
    "covariance_decay",
    "CovarianceDecay",
    "DiagnosticsReport",
    "l2pi_norm",
]

_CERT_TOL = 1e-8


def apply_P(kernel: CountableKernel, f) -> np.ndarray:
    """(Pf)(j) = sum_k p_{jk} f(k)."""
    f = np.asarray(f)
    if f.shape[0] != kernel.size:
        raise InvalidParameterError(
            f"function has {f.shape[0]} entries, kernel has {kernel.size} states"
        )
    return kernel.P @ f


def l2pi_norm(kernel: CountableKernel, f) -> float:
    return float(np.sqrt((kernel.pi * np.abs(np.asarray(f)) ** 2).sum()))


def _weighted_matrix(kernel: CountableKernel):
    mask = kernel.pi > 0.0
    sq = np.sqrt(kernel.pi[mask])
    M = sq[:, None] * kernel.P[np.ix_(mask, mask)] / sq[None, :]
    return M, sq, mask


def _top_singular(M: np.ndarray) -> tuple[float, np.ndarray]:
    u, s, vt = np.linalg.svd(M)
    return float(s[0]), vt[0]


def operator_norm_L20(kernel: CountableKernel) -> float:
    """Operator norm of P on the mean-zero subspace of L^2(pi).

    Largest singular value of the weighted matrix after deflating the
    constant direction; a residual certificate below 1e-8 is enforced.
    """
    M, v, _ = _weighted_matrix(kernel)
    Mdef = M - np.outer(M @ v, v)
    a, vec = _top_singular(Mdef)
    resid = np.linalg.norm(Mdef.T @ (Mdef @ vec) - a * a * vec)
    if resid > _CERT_TOL:
        raise NumericError(f"operator-norm residual certificate {resid:.2e} > {_CERT_TOL:.0e}")
    return a


def ui2_paper_bound(spec_or_gamma, k: int) -> float:
    """Tail bound 2 P(T>=k) + 2 sum_{j>=k} gamma^(j+1) for the gamma family."""
    gamma = spec_or_gamma.gamma if isinstance(spec_or_gamma, BackwardRecurrenceSpec) else spec_or_gamma
    spec = BackwardRecurrenceSpec(gamma)
    return float(2.0 * spec.tail(k) + 2.0 * gamma ** (k + 1) / (1.0 - gamma))


def ui2_tail_sup(kernel: CountableKernel, k: int) -> tuple[float, Optional[float]]:
    """sup over unit L^2(pi) balls of the mass of |Pf|^2 on states >= k.

    Returns (numeric sup, analytic bound); the bound is available when the
    kernel was built from the gamma family, else None.
    """
    if k < 0:
        raise InvalidParameterError(f"need k >= 0, got {k}")
    M, _, _ = _weighted_matrix(kernel)
    if k >= M.shape[0]:
        numeric = 0.0
    else:
        s = np.linalg.svd(M[k:, :], compute_uv=False)
        numeric = float(s[0] ** 2)
    bound = ui2_paper_bound(kernel.gamma, k) if kernel.gamma is not None else None
    return numeric, bound


def _hyper_w(q: float, k: int) -> float:
    return q * k * (k + 1) / 4.0 - (q - 1.0) * k * (k - 1) / 2.0


def hyper_norm_fk(gamma: float, q: float, k: int) -> float:
    """log ||P f_k||_q^q for the unit-mass spike functions f_k (closed form).

    The exponent w(k) = q k(k+1)/4 - (q-1) k(k-1)/2 tends to -infinity, so
    the log norm grows without bound: P is not bounded into L^q.
    """
    if q <= 2.0:
        raise InvalidParameterError(f"hyperboundedness test needs q > 2, got {q}")
    if k < 1:
        raise InvalidParameterError(f"need k >= 1, got {k}")
    et = BackwardRecurrenceSpec(gamma).expected_t()
    return float((q / 2.0 - 1.0) * np.log1p(et) + _hyper_w(q, k) * np.log(gamma))


def hyper_norm_fk_direct(kernel: CountableKernel, q: float, k: int) -> float:
    """log ||P f_k||_q^q by explicitly applying P to the spike function."""
    if kernel.gamma is None:
        raise InvalidParameterError("direct evaluation needs a gamma-family kernel")
    if q <= 2.0:
        raise InvalidParameterError(f"need q > 2, got {q}")
    if not 1 <= k < kernel.size:
        raise InvalidParameterError(f"need 1 <= k < {kernel.size}, got {k}")
    spec = BackwardRecurrenceSpec(kernel.gamma)
    et = spec.expected_t()
    log_fk = 0.5 * (np.log1p(et) - spec.log_tail(k))
    if log_fk > 300.0:
        raise NumericError("spike value overflows double precision; use the closed form")
    f = np.zeros(kernel.size)
    f[k] = np.exp(log_fk)
    pf = apply_P(kernel, f)
    val = (np.abs(pf) ** q * kernel.pi).sum()
    if val <= 0.0:
        raise NumericError("direct norm underflowed")
    return float(np.log(val))


@dataclass(frozen=True)
class HyperIntegralVerdict:
    """Finite/divergent classification of the q-th moment double integral."""

    verdict: str  # "finite" | "divergent" | "boundary"
    q_critical: float
    value: Optional[float]  # closed form when finite
    quad_inner: float  # truncated integral, radius 5
    quad_outer: float  # truncated integral, radius 8
    quad_consistent: bool


def ar1_hyper_integral(rho: float, q: float, radii=(5.0, 8.0), nodes: int = 240) -> HyperIntegralVerdict:
    """Classify int pi(dx) pi(dy) p(x,y)^q for the Gaussian AR(1) kernel.

    The combined exponent is the quadratic form a(x^2+y^2) - 2b xy with
    a = 1/2 + q rho^2 / (2(1-rho^2)), b = q|rho| / (2(1-rho^2)); the integral
    is finite iff a > b, equivalently q < (1+|rho|)/|rho|.  A truncated
    double quadrature at two radii cross-checks the verdict (growth beyond
    10x flags divergence).
    """
    if not 0.0 < abs(rho) < 1.0:
        raise InvalidParameterError(f"need 0 < |rho| < 1, got {rho}")
    if q <= 2.0:
        raise InvalidParameterError(f"need q > 2, got {q}")
    r = abs(rho)
    s2 = 1.0 - r * r
    a_coef = 0.5 + q * r * r / (2.0 * s2)
    b_coef = q * r / (2.0 * s2)
    q_crit = (1.0 + r) / r
    det = a_coef * a_coef - b_coef * b_coef

    def truncated(R: float) -> float:
        t, w = roots_legendre(nodes)
        x = R * t
        wx = R * w
        expo = (
            -a_coef * (x[:, None] ** 2 + x[None, :] ** 2)
            + 2.0 * b_coef * x[:, None] * x[None, :]
        )
        integ = np.exp(expo - q / 2.0 * np.log(s2) - np.log(2.0 * np.pi))
        return float(wx @ integ @ wx)

    inner, outer = truncated(radii[0]), truncated(radii[1])
    growth = outer / inner if inner > 0 else np.inf
    if abs(q - q_crit) < 1e-12:
        verdict, value = "boundary", None
        consistent = True
    elif det > 0.0:
        verdict = "finite"
        value = float(s2 ** (-q / 2.0) / (2.0 * np.sqrt(det)))
        consistent = growth < 1.5
    else:
        verdict, value = "divergent", None
        consistent = growth > 10.0
    return HyperIntegralVerdict(
        verdict=verdict,
        q_critical=q_crit,
        value=value,
        quad_inner=inner,
        quad_outer=outer,
        quad_consistent=consistent,
    )


def poisson_solve(kernel: CountableKernel, chi, tol: float = 1e-10, max_terms: int = 100000) -> np.ndarray:
    """Solve (I - P) delta = chi on mean-zero functions by the Neumann series.

    Requires |pi(chi)| <= 1e-10 and an operator norm a < 1 on the mean-zero
    subspace; terms are summed until the geometric tail bound drops below
    tol.  The residual ||(I-P) delta - chi|| <= tol is verified.
    """
    chi = np.asarray(chi, dtype=complex)
    if chi.shape[0] != kernel.size:
        raise InvalidParameterError("dimension mismatch")
    mean = (kernel.pi * chi).sum()
    if abs(mean) > 1e-10:
        raise InvalidParameterError(f"pi(chi) = {abs(mean):.2e} exceeds 1e-10")
    chi = chi - mean
    a = operator_norm_L20(kernel)
    if a >= 1.0 - 1e-6:
        raise NumericError(f"operator norm {a} too close to 1: series may not converge")
    delta = np.zeros_like(chi)
    term = chi.copy()
    for m in range(max_terms):
        delta += term
        if l2pi_norm(kernel, term) <= tol * (1.0 - a):
            break
        term = kernel.P @ term
        term -= (kernel.pi * term).sum()  # re-center against roundoff drift
    else:
        raise NumericError(f"Neumann series did not converge in {max_terms} terms (a={a:.4f})")
    resid = l2pi_norm(kernel, (delta - kernel.P @ delta) - chi)
    if resid > 10.0 * tol:
        raise NumericError(f"Poisson residual {resid:.2e} exceeds tolerance")
    return delta


@dataclass
class CovarianceDecay:
    lags: np.ndarray
    covariances: np.ndarray
    stderrs: np.ndarray
    eta_hat: float
    sup_chi: float
    bound_violated: bool
    n_significant: int

    def to_dict(self) -> dict:
        return {
            "lags": [int(v) for v in self.lags],
            "covariances_abs": [float(abs(v)) for v in self.covariances],
            "stderrs": [float(v) for v in self.stderrs],
            "eta_hat": float(self.eta_hat),
            "sup_chi": float(self.sup_chi),
            "bound_violated": bool(self.bound_violated),
            "n_significant": int(self.n_significant),
        }


def covariance_decay(trajectories, chi, max_lag: int) -> CovarianceDecay:
    """Empirical autocovariance of a bounded observable and a geometric fit.

    ``trajectories``: array (N, n+1) of states (or a list of Trajectory).
    eta_hat is the log-linear decay rate fitted over lags whose covariance is
    significant against Monte-Carlo error; the report flags any lag whose
    autocovariance exceeds 2 pi eta^lag ||chi||_inf^2 beyond 3 standard errors.
    """
    if hasattr(trajectories[0], "states"):
        states = np.stack([t.states for t in trajectories])
    else:
        states = np.asarray(trajectories)
    if states.ndim != 2 or states.shape[1] <= max_lag + 1:
        raise InvalidParameterError("need a 2-D ensemble with n > max_lag")
    vals = np.asarray(chi(states))
    sup_chi = float(np.abs(vals).max())
    mean = vals.mean()
    vc = vals - mean
    N = vc.shape[0]
    lags = np.arange(max_lag + 1)
    covs = np.empty(max_lag + 1, dtype=complex)
    ses = np.empty(max_lag + 1)
    for lag in lags:
        prods = (vc[:, : vc.shape[1] - lag] * np.conj(vc[:, lag:])).mean(axis=1)
        covs[lag] = prods.mean()
        ses[lag] = np.abs(prods).std(ddof=1) / np.sqrt(N) if N > 1 else np.inf
    sig = (np.abs(covs) > 3.0 * ses) & (lags >= 1)
    if sig.sum() >= 2:
        slope = np.polyfit(lags[sig], np.log(np.abs(covs[sig])), 1)[0]
        eta = float(np.clip(np.exp(slope), 0.0, 1.0 - 1e-12))
    else:
        eta = 0.0
    bound = 2.0 * np.pi * eta ** lags[1:] * sup_chi**2
    violated = bool(np.any(np.abs(covs[1:]) > bound + 3.0 * ses[1:]))
    return CovarianceDecay(
        lags=lags,
        covariances=covs,
        stderrs=ses,
        eta_hat=eta,
        sup_chi=sup_chi,
        bound_violated=violated,
        n_significant=int(sig.sum()),
    )


@dataclass
class DiagnosticsReport:
    """Bundle of operator diagnostics for one kernel."""

    gap: Optional[float] = None
    gap_bound: Optional[float] = None
    truncation_sizes: Optional[list] = None
    ui_curve: list = field(default_factory=list)  # (k, numeric, bound)
    hyper_curve: list = field(default_factory=list)  # (k, log norm)
    hyper_q: Optional[float] = None
    ar1_hyper: Optional[dict] = None
    mixing: Optional[dict] = None
    flags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "gap": self.gap,
            "gap_bound": self.gap_bound,
            "truncation_sizes": self.truncation_sizes,
            "ui_curve": [
                {"k": int(k), "numeric": float(v), "bound": None if b is None else float(b)}
                for k, v, b in self.ui_curve
            ],
            "hyper_q": self.hyper_q,
            "hyper_curve": [{"k": int(k), "log_norm": float(v)} for k, v in self.hyper_curve],
            "ar1_hyper": self.ar1_hyper,
            "mixing": self.mixing,
            "flags": self.flags,
        }
