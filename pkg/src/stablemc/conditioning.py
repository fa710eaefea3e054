"""Conditional characteristic-function machinery along trajectories.

For a path X_0..X_n and an observable psi with normalization B, the engine
evaluates the per-step conditional CFs z_j = E(e^{i theta psi(X_j)/B} | X_{j-1}),
the square-sum condition S(theta) = sum_j |1 - z_j|^2, the truncated
conditional centerings A_n, the accumulated exponent
Phi_n = sum_j (z_j - 1) - i theta A_n, and the product/exponential
equivalence gap |prod_j z_j - exp(sum_j (z_j - 1))| <= 5 S(theta), which
holds path by path whenever every |z_j| <= 1.

Batched AR(1) evaluations tabulate on a conditional-mean grid (see
chains.AR1Chain); everything else is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .chains import AR1Chain, CountableChain, IidChain, SkeletonChain, Trajectory
from .errors import InvalidParameterError, QuadratureError
from .tails import ObservableSpec

__all__ = [
    "conditional_cf",
    "conditional_cf_reference",
    "quadrature_self_check",
    "cf_deviation_sum",
    "conditional_centering",
    "accumulated_exponent",
    "product_exponential_gap",
    "GapCheck",
    "truncated_moment_terms",
    "step_bound_terms",
    "PocRun",
    "batch_cf_values",
    "batch_trunc_means",
]

GH_DEFAULT_ORDER = 128
SELF_CHECK_TOL = 1e-6
_TABLE_THRESHOLD = 512  # switch from direct evaluation to m-grid tables


def _states_of(traj) -> np.ndarray:
    return traj.states if isinstance(traj, Trajectory) else np.asarray(traj)


def conditional_cf(chain, x, theta: float, obs: ObservableSpec, B: float,
                   order: int = GH_DEFAULT_ORDER, self_check: bool = False):
    """E(e^{i theta psi(X_1)/B} | X_0 = x)  (vectorized in x).

    Countable kernels and the i.i.d. kernel are exact row/marginal sums, the
    skeleton chain is exact by construction, and AR(1) uses Gauss-Hermite
    quadrature of the given order.  With ``self_check`` the value is compared
    against twice the order and a disagreement beyond 1e-6 raises
    QuadratureError (heavy-tailed observables can trip this at extreme
    states; see the README note on quadrature accuracy).
    """
    if B <= 0.0:
        raise InvalidParameterError(f"need B > 0, got {B}")
    thp = theta / B
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(chain, AR1Chain):
        vals = chain.cond_cf(xs, thp, obs, order=order)
        if self_check:
            again = chain.cond_cf(xs, thp, obs, order=2 * order)
            worst = float(np.abs(vals - again).max())
            if worst > SELF_CHECK_TOL:
                raise QuadratureError(
                    f"Gauss-Hermite self-check failed: orders {order}/{2*order} "
                    f"disagree by {worst:.2e} > {SELF_CHECK_TOL:.0e}"
                )
    else:
        vals = chain.cond_cf(xs, thp, obs)
    return complex(vals[0]) if np.ndim(x) == 0 else vals


def conditional_cf_reference(chain, x: float, theta: float, obs: ObservableSpec, B: float) -> complex:
    """Independent slow evaluation of the conditional CF (scalar).

    Exact for countable/i.i.d./skeleton kernels; for AR(1) an adaptive
    compensated quadrature with Fourier tails in observable space.
    """
    thp = theta / B
    if isinstance(chain, AR1Chain):
        return chain.cond_cf_reference(float(x), thp, obs)
    return complex(np.atleast_1d(chain.cond_cf(np.atleast_1d(x), thp, obs))[0])


def quadrature_self_check(chain, states, theta: float, obs: ObservableSpec, B: float,
                          order: int = GH_DEFAULT_ORDER, raise_on_fail: bool = True) -> float:
    """Max disagreement between order and 2x-order conditional CFs.

    Exact kernels return 0.  Raises QuadratureError beyond 1e-6 unless
    ``raise_on_fail`` is disabled (then the caller records the value).
    """
    if not isinstance(chain, AR1Chain):
        return 0.0
    thp = theta / B
    xs = np.asarray(states, dtype=float).ravel()
    v1 = chain.cond_cf(xs, thp, obs, order=order)
    v2 = chain.cond_cf(xs, thp, obs, order=2 * order)
    worst = float(np.abs(v1 - v2).max())
    if raise_on_fail and worst > SELF_CHECK_TOL:
        raise QuadratureError(
            f"Gauss-Hermite self-check failed: orders {order}/{2*order} "
            f"disagree by {worst:.2e} > {SELF_CHECK_TOL:.0e}"
        )
    return worst


def batch_cf_values(chain, states: np.ndarray, thp: float, obs: ObservableSpec,
                    order: int = GH_DEFAULT_ORDER) -> np.ndarray:
    """Conditional CF at every entry of ``states`` (any shape)."""
    flat = np.asarray(states, dtype=float).ravel()
    if isinstance(chain, AR1Chain) and flat.size > _TABLE_THRESHOLD:
        m = chain.rho * flat
        table = chain.make_cf_table(thp, obs, order, float(m.min()), float(m.max()))
        vals = table(m)
    elif isinstance(chain, AR1Chain):
        vals = chain.cond_cf(flat, thp, obs, order=order)
    else:
        vals = chain.cond_cf(flat, thp, obs)
    return vals.reshape(np.shape(states))


def batch_trunc_means(chain, states: np.ndarray, obs: ObservableSpec, cut: float) -> np.ndarray:
    """E(psi(X_1) 1{|psi| <= cut} | x) at every entry of ``states``."""
    flat = np.asarray(states, dtype=float).ravel()
    if isinstance(chain, AR1Chain) and flat.size > _TABLE_THRESHOLD:
        m = chain.rho * flat
        table = chain.make_moment_table(obs, cut, 1, float(m.min()), float(m.max()))
        vals = table(m)
    elif isinstance(chain, (IidChain, CountableChain, AR1Chain)):
        vals = chain.trunc_mean(flat, obs, cut)
    elif isinstance(chain, SkeletonChain):
        vals = _skeleton_trunc_mean(chain, flat, cut)
    else:
        raise InvalidParameterError(f"no truncated conditional means for {type(chain).__name__}")
    return np.asarray(vals).reshape(np.shape(states))


def _skeleton_trunc_mean(chain: SkeletonChain, x: np.ndarray, cut: float) -> np.ndarray:
    # deterministic branches truncate exactly; the uniform branch is symmetric
    out = np.zeros(len(x))
    first = x < 1.0
    vals = -chain.spec.psi_unit(x[first])
    out[first] = np.where(np.abs(vals) <= cut, vals, 0.0)
    return out


def cf_deviation_sum(chain, traj, theta: float, obs: ObservableSpec, B: float,
                     order: int = GH_DEFAULT_ORDER) -> float:
    """S(theta) = sum_{j=1}^n |1 - E(e^{i theta psi(X_j)/B} | F_{j-1})|^2."""
    states = _states_of(traj)
    z = batch_cf_values(chain, states[:-1], theta / B, obs, order)
    return float(np.abs(1.0 - z).__pow__(2).sum())


def conditional_centering(chain, traj, obs: ObservableSpec, B: float, h: float) -> float:
    """A_n = (1/B) sum_j E(psi(X_j) 1{|psi| <= h B} | F_{j-1})."""
    if h <= 0.0:
        raise InvalidParameterError(f"need h > 0, got {h}")
    states = _states_of(traj)
    tm = batch_trunc_means(chain, states[:-1], obs, h * B)
    return float(tm.sum() / B)


def accumulated_exponent(chain, traj, theta: float, obs: ObservableSpec, B: float, h: float,
                         order: int = GH_DEFAULT_ORDER) -> complex:
    """Phi_n = sum_j [z_j - 1 - i theta B^{-1} E(psi(X_j) 1{|psi|<=hB} | F_{j-1})]."""
    states = _states_of(traj)
    z = batch_cf_values(chain, states[:-1], theta / B, obs, order)
    tm = batch_trunc_means(chain, states[:-1], obs, h * B)
    return complex((z - 1.0).sum() - 1j * theta * tm.sum() / B)


@dataclass(frozen=True)
class GapCheck:
    """Product form vs exponential form of the conditional CF accumulation."""

    product: complex  # prod_j z_j * e^{-i theta A_n}
    exp_form: complex  # exp(Phi_n)
    gap: float
    bound: float  # 5 * S(theta)

    @property
    def holds(self) -> bool:
        return self.gap <= self.bound + 1e-12


def product_exponential_gap(chain, traj, theta: float, obs: ObservableSpec, B: float, h: float,
                            order: int = GH_DEFAULT_ORDER) -> GapCheck:
    """Path-wise check of |prod z_j - e^{sum (z_j - 1)}| <= 5 sum |1 - z_j|^2."""
    states = _states_of(traj)
    z = batch_cf_values(chain, states[:-1], theta / B, obs, order)
    tm = batch_trunc_means(chain, states[:-1], obs, h * B)
    a_n = tm.sum() / B
    s = float(np.abs(1.0 - z).__pow__(2).sum())
    phase = np.exp(-1j * theta * a_n)
    product = complex(np.prod(z) * phase)
    exp_form = complex(np.exp((z - 1.0).sum() - 1j * theta * a_n))
    return GapCheck(product=product, exp_form=exp_form, gap=abs(product - exp_form), bound=5.0 * s)


def truncated_moment_terms(chain, x, obs: ObservableSpec, B: float, h: float, n: int):
    """The three n-scaled conditional moment terms at states x.

    I1 = n B^-4 (E(psi^2 1{|psi|<=hB} | x))^2,
    I2 = n (P(|psi| > hB | x))^2,
    I3 = n B^-2 (E(psi 1{|psi|<=hB} | x))^2.
    """
    cut = h * B
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(chain, (AR1Chain, CountableChain, IidChain)):
        m2 = np.asarray(chain.trunc_second(xs, obs, cut), dtype=float)
        m1 = np.asarray(chain.trunc_mean(xs, obs, cut), dtype=float)
        tp = np.asarray(chain.cond_tail_prob(xs, obs, cut), dtype=float)
    else:
        raise InvalidParameterError(f"no conditional moments for {type(chain).__name__}")
    i1 = n * m2**2 / B**4
    i2 = n * tp**2
    i3 = n * m1**2 / B**2
    if np.ndim(x) == 0:
        return float(i1[0]), float(i2[0]), float(i3[0])
    return i1, i2, i3


def step_bound_terms(chain, x, theta: float, obs: ObservableSpec, B: float, h: float, n: int,
                     order: int = GH_DEFAULT_ORDER):
    """(lhs, rhs) of n |1 - z(x)|^2 <= theta^4 I1 + 16 I2 + 2 theta^2 I3."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    z = batch_cf_values(chain, xs, theta / B, obs, order)
    lhs = n * np.abs(1.0 - z) ** 2
    i1, i2, i3 = truncated_moment_terms(chain, xs, obs, B, h, n)
    rhs = theta**4 * i1 + 16.0 * i2 + 2.0 * theta**2 * i3
    if np.ndim(x) == 0:
        return float(lhs[0]), float(rhs[0])
    return lhs, rhs


@dataclass
class PocRun:
    """Ensemble summary of the conditioning diagnostics on a theta grid."""

    theta_grid: list
    h: float
    n_grid: list
    replicates: int
    master_seed: int
    order: int
    per_n: list = field(default_factory=list)  # one dict per n
    target_exponent: dict = field(default_factory=dict)  # theta -> complex target
    decay_slopes: dict = field(default_factory=dict)  # theta -> log-log slope of mean S
    quadrature_check: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "theta_grid": [float(t) for t in self.theta_grid],
            "h": float(self.h),
            "n_grid": [int(n) for n in self.n_grid],
            "replicates": int(self.replicates),
            "master_seed": int(self.master_seed),
            "gh_order": int(self.order),
            "per_n": self.per_n,
            "target_exponent": {
                str(t): [v.real, v.imag] for t, v in self.target_exponent.items()
            },
            "decay_slopes": {str(t): float(v) for t, v in self.decay_slopes.items()},
            "quadrature_check": self.quadrature_check,
        }
