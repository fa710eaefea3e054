"""Experiment orchestration: ensemble runs, contrasts, and report emission.

Every runner consumes a LoadedConfig, simulates with per-replicate streams
(deterministic for any worker count), compares empirical characteristic
functions on a fixed theta grid against quadrature targets, and returns a
report object that serializes to canonical JSON and to CSV rows (one row per
(n, theta)).  Reports embed the full raw config and the library version and
contain nothing schedule- or time-dependent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .chains import ArchChain, arch_tau
from .conditioning import (
    GH_DEFAULT_ORDER,
    batch_cf_values,
    batch_trunc_means,
    quadrature_self_check,
    PocRun,
)
from .config import LoadedConfig, build_chain, build_observable, validate_limit_run
from .ensemble import replicate_stream, simulate_paths, simulate_sums
from .errors import ConfigError, NumericError
from .operator_diag import (
    DiagnosticsReport,
    ar1_hyper_integral,
    covariance_decay,
    hyper_norm_fk,
    operator_norm_L20,
    ui2_tail_sup,
)
from .stable_laws import StableParams, strictly_stable_cf, truncated_levy_exponent
from .tails import TailModel, solve_bn

__all__ = [
    "cf_distance",
    "empirical_cf",
    "ConvergenceReport",
    "run_ensemble",
    "run_weak_lln",
    "run_skeleton_contrast",
    "run_arch_contrast",
    "run_poc",
    "run_diagnostics",
    "bn_table",
    "dump_json",
    "write_report",
]

_QUANTILES = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99]
_TAU_STREAM_INDEX = 999_999_937  # disjoint from replicate indices


def empirical_cf(values, theta_grid) -> np.ndarray:
    """Mean of e^{i theta v}: modulus <= 1 exactly (average of unit terms)."""
    v = np.asarray(values, dtype=float)
    return np.exp(1j * np.outer(np.asarray(theta_grid, dtype=float), v)).mean(axis=1)


def cf_distance(emp, target, theta_grid=None) -> float:
    """Sup over the grid of |empirical - target|."""
    emp = np.atleast_1d(np.asarray(emp))
    target = np.atleast_1d(np.asarray(target))
    if emp.size == 0 or emp.shape != target.shape:
        raise ConfigError("cf_distance needs two aligned, nonempty CF arrays")
    return float(np.abs(emp - target).max())


def _target_cf(theta_grid, tm: TailModel) -> np.ndarray:
    return np.asarray(
        [strictly_stable_cf(t, tm.alpha, tm.c_plus, tm.c_minus) for t in theta_grid]
    )


def _quantile_block(z: np.ndarray) -> dict:
    qs = np.quantile(z, _QUANTILES)
    return {f"q{int(100 * p):02d}": float(v) for p, v in zip(_QUANTILES, qs)}


@dataclass
class ConvergenceReport:
    """Empirical-vs-target CF comparison across the n grid."""

    kind: str
    config: dict
    master_seed: int
    version: str = __version__
    per_n: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "version": self.version,
            "master_seed": int(self.master_seed),
            "config": self.config,
            "per_n": self.per_n,
            "extras": self.extras,
        }

    def csv_rows(self):
        header = [
            "n",
            "B_n",
            "theta",
            "emp_re",
            "emp_im",
            "target_re",
            "target_im",
            "distance",
        ]
        rows = []
        for block in self.per_n:
            for row in block.get("rows", []):
                rows.append(
                    [
                        block["n"],
                        block["B_n"],
                        row["theta"],
                        row["emp_re"],
                        row["emp_im"],
                        row["target_re"],
                        row["target_im"],
                        row["distance"],
                    ]
                )
        return header, rows

    @property
    def sup_distance(self) -> float:
        return max(block["sup_distance"] for block in self.per_n)


def _cf_block(n: int, B: float, z: np.ndarray, theta_grid, target: np.ndarray) -> dict:
    emp = empirical_cf(z, theta_grid)
    rows = [
        {
            "theta": float(t),
            "emp_re": float(e.real),
            "emp_im": float(e.imag),
            "target_re": float(g.real),
            "target_im": float(g.imag),
            "distance": float(abs(e - g)),
        }
        for t, e, g in zip(theta_grid, emp, target)
    ]
    return {
        "n": int(n),
        "B_n": float(B),
        "rows": rows,
        "sup_distance": float(np.abs(emp - target).max()),
        "quantiles": _quantile_block(z),
    }


def run_ensemble(cfg: LoadedConfig) -> ConvergenceReport:
    """Normalized partial sums vs their stable target on the theta grid."""
    chain = build_chain(cfg.chain)
    chain, obs = build_observable(cfg.observable, chain, cfg.chain)
    if isinstance(chain, ArchChain) or chain is None:
        raise ConfigError("run_ensemble supports iid, ar1, skeleton, and backward chains")
    validate_limit_run(cfg.run, obs)
    run = cfg.run
    sums = simulate_sums(
        chain,
        obs,
        run.n_grid,
        run.replicates,
        run.master_seed,
        centering=run.centering,
        workers=run.workers,
    )
    tm = obs.tail_model
    target = _target_cf(run.theta_grid, tm)
    report = ConvergenceReport(kind="simulate", config=cfg.raw, master_seed=run.master_seed)
    for i, n in enumerate(run.n_grid):
        B = solve_bn(int(n), tm)
        report.per_n.append(_cf_block(int(n), B, sums[i] / B, run.theta_grid, target))
    return report


def run_weak_lln(cfg: LoadedConfig) -> ConvergenceReport:
    """Decay of |S_n| / B_n for a centered observable with a declared moment.

    The per-n summary is the empirical 90th percentile with an order-statistic
    band (88th and 92nd); the verdict is "decreasing" when consecutive bands
    separate.
    """
    chain = build_chain(cfg.chain)
    chain, obs = build_observable(cfg.observable, chain, cfg.chain)
    run = cfg.run
    if obs.beta_moment is not None and obs.tail_model.alpha >= min(obs.beta_moment, 2.0):
        raise ConfigError(
            f"weak LLN needs alpha < min(beta, 2): alpha={obs.tail_model.alpha}, "
            f"beta={obs.beta_moment}"
        )
    if obs.mean != 0.0:
        raise ConfigError("weak LLN requires a centered observable")
    sums = simulate_sums(
        chain, obs, run.n_grid, run.replicates, run.master_seed, workers=run.workers
    )
    report = ConvergenceReport(kind="weak_lln", config=cfg.raw, master_seed=run.master_seed)
    p90s = []
    for i, n in enumerate(run.n_grid):
        B = solve_bn(int(n), obs.tail_model)
        z = np.abs(sums[i]) / B
        lo, p90, hi = np.quantile(z, [0.88, 0.90, 0.92])
        p90s.append((float(lo), float(p90), float(hi)))
        report.per_n.append(
            {
                "n": int(n),
                "B_n": float(B),
                "p90_abs_normalized": float(p90),
                "band_lo": float(lo),
                "band_hi": float(hi),
                "quantiles": _quantile_block(z),
                "rows": [],
                "sup_distance": 0.0,
            }
        )
    strict = all(p90s[i + 1][1] < p90s[i][1] for i in range(len(p90s) - 1))
    separated = all(p90s[i + 1][2] < p90s[i][0] for i in range(len(p90s) - 1))
    report.extras = {
        "verdict": "decreasing" if strict else "not_decreasing",
        "decreasing_beyond_noise": bool(separated),
    }
    return report


def run_skeleton_contrast(cfg: LoadedConfig) -> ConvergenceReport:
    """Skeleton sums against their stable target, full sums against boundedness.

    Part (a): sums over every third state, normalized by B_m, compared to the
    symmetric stable target.  Part (b): unnormalized |S_n| location/scale
    across the n grid; boundedness in probability shows up as stable
    percentiles while B_n grows.
    """
    chain = build_chain(cfg.chain)
    chain, obs = build_observable(cfg.observable, chain, cfg.chain)
    run = cfg.run
    tm = obs.tail_model
    m = int(run.skeleton_m)
    skel = simulate_sums(
        chain, obs, [m], run.replicates, run.master_seed, workers=run.workers, stride=3
    )
    B_m = solve_bn(m, tm)
    target = _target_cf(run.theta_grid, tm)
    report = ConvergenceReport(kind="skeleton", config=cfg.raw, master_seed=run.master_seed)
    block = _cf_block(m, B_m, skel[0] / B_m, run.theta_grid, target)
    block["part"] = "skeleton_sums"
    report.per_n.append(block)

    n_full = min(run.replicates, 500)
    full = simulate_sums(
        chain, obs, run.n_grid, n_full, run.master_seed, workers=run.workers
    )
    full_blocks = []
    for i, n in enumerate(run.n_grid):
        absolute = np.abs(full[i])
        med, q95 = np.quantile(absolute, [0.5, 0.95])
        full_blocks.append(
            {
                "n": int(n),
                "B_n": float(solve_bn(int(n), tm)),
                "median_abs_sum": float(med),
                "q95_abs_sum": float(q95),
                "replicates": int(n_full),
            }
        )
    q95s = [b["q95_abs_sum"] for b in full_blocks]
    report.extras = {
        "full_sequence": full_blocks,
        "q95_spread": float(max(q95s) / min(q95s)) if min(q95s) > 0 else float("inf"),
        "bounded_in_probability": bool(min(q95s) > 0 and max(q95s) / min(q95s) < 2.0),
    }
    return report


def run_arch_contrast(cfg: LoadedConfig) -> ConvergenceReport:
    """ARCH sums under tail normalization vs the two candidate stable targets.

    The normalization a_n = (n C)^(1/2 kappa) uses the one-sided tail
    constant C with P(X > x) ~ C x^(-2 kappa), which makes the limit predicted
    by conditional-independence heuristics exactly the tau = 1 target; the
    dependent limit replaces tau = 1 by tau = E[|1+S|^2k - |S|^2k].
    """
    chain = build_chain(cfg.chain)
    if not isinstance(chain, ArchChain):
        raise ConfigError("run_arch_contrast requires chain.type = 'arch'")
    spec = chain.spec
    run = cfg.run
    two_kappa = 2.0 * spec.kappa
    if abs(two_kappa - 2.0) < 1e-9 or not 0.0 < two_kappa < 2.0:
        raise ConfigError(
            f"need 2 kappa in (0, 2) excluding the boundary, got {two_kappa:.6f} "
            f"(lambda = {spec.lam})"
        )
    tau = arch_tau(spec, run.tau_draws, replicate_stream(run.master_seed, _TAU_STREAM_INDEX))
    if tau.n_rejected > 0.01 * run.tau_draws:
        raise NumericError(
            f"series rejection rate {tau.n_rejected / run.tau_draws:.2%} exceeds 1%"
        )

    n = int(run.n_grid[-1])
    pool_stride = max(1, n // 1000)

    def reducer(block, start):
        sums = block[:, 1:].sum(axis=1)
        pooled = np.abs(block[:, 1::pool_stride]).ravel()
        return sums, pooled

    parts = simulate_paths(chain, n, run.replicates, run.master_seed, run.workers, reducer)
    sums = np.concatenate([p[0] for p in parts])
    pooled = np.concatenate([p[1] for p in parts])

    # one-sided tail constant over the 99-99.9% band: P(X>x) x^(2k) ~ C
    band = np.linspace(0.99, 0.999, 10)
    xq = np.quantile(pooled, band)
    c_half = float(np.mean((1.0 - band) * xq**two_kappa) / 2.0)
    a_n = (n * c_half) ** (1.0 / two_kappa)
    z = sums / a_n

    emp = empirical_cf(z, run.theta_grid)
    target_one = np.asarray([strictly_stable_cf(t, two_kappa, 1.0, 1.0) for t in run.theta_grid])
    target_tau = np.asarray(
        [strictly_stable_cf(t, two_kappa, tau.estimate, tau.estimate) for t in run.theta_grid]
    )
    d_one = cf_distance(emp, target_one)
    d_tau = cf_distance(emp, target_tau)
    separated = abs(tau.estimate - 1.0) > 3.0 * tau.stderr

    report = ConvergenceReport(kind="arch", config=cfg.raw, master_seed=run.master_seed)
    report.per_n.append(
        {
            "n": n,
            "B_n": float(a_n),
            "rows": [
                {
                    "theta": float(t),
                    "emp_re": float(e.real),
                    "emp_im": float(e.imag),
                    "target_re": float(g.real),
                    "target_im": float(g.imag),
                    "distance": float(abs(e - g)),
                }
                for t, e, g in zip(run.theta_grid, emp, target_tau)
            ],
            "sup_distance": d_tau,
            "quantiles": _quantile_block(z),
        }
    )
    report.extras = {
        "kappa": float(spec.kappa),
        "two_kappa": float(two_kappa),
        "tau_hat": float(tau.estimate),
        "tau_stderr": float(tau.stderr),
        "tau_ci_3sigma": [
            float(tau.estimate - 3 * tau.stderr),
            float(tau.estimate + 3 * tau.stderr),
        ],
        "series_rejected": int(tau.n_rejected),
        "tail_constant_one_sided": c_half,
        "distance_to_tau1": d_one,
        "distance_to_tau_hat": d_tau,
        "tau_separated_from_1": bool(separated),
        "ordering_expected": bool((not separated) or d_tau < d_one),
    }
    return report


def run_poc(cfg: LoadedConfig) -> PocRun:
    """Conditioning diagnostics ensemble: square-sum decay, accumulated
    exponents vs the truncated Levy target, product/exponential gap, and the
    three conditional moment terms."""
    chain = build_chain(cfg.chain)
    chain, obs = build_observable(cfg.observable, chain, cfg.chain)
    run = cfg.run
    tm = obs.tail_model
    order = int(run.gh_order)
    result = PocRun(
        theta_grid=list(run.theta_grid),
        h=run.h,
        n_grid=[int(v) for v in run.n_grid],
        replicates=run.replicates,
        master_seed=run.master_seed,
        order=order,
    )
    params = StableParams(tm.alpha, tm.c_plus, tm.c_minus, h=run.h)
    for t in run.theta_grid:
        result.target_exponent[float(t)] = complex(truncated_levy_exponent(t, params))

    check_states = None
    for n in result.n_grid:
        B = solve_bn(n, tm)
        cut = run.h * B
        acc = {
            float(t): {"S": 0.0, "phi": 0.0 + 0.0j, "gap_ok": True, "max_gap_excess": -np.inf}
            for t in run.theta_grid
        }
        moments = np.zeros(3)
        a_n_total = 0.0

        def reducer(block, start):
            nonlocal check_states
            prev = block[:, :-1]
            if check_states is None:
                check_states = prev[0, : min(64, prev.shape[1])].copy()
            tmv = batch_trunc_means(chain, prev, obs, cut)
            a_paths = tmv.sum(axis=1) / B
            out_a = a_paths.sum()
            out = {}
            for t in run.theta_grid:
                z = batch_cf_values(chain, prev, t / B, obs, order)
                dev = np.abs(1.0 - z) ** 2
                s_paths = dev.sum(axis=1)
                phi_paths = (z - 1.0).sum(axis=1) - 1j * t * a_paths
                prod = np.prod(z, axis=1) * np.exp(-1j * t * a_paths)
                expf = np.exp(phi_paths)
                gap = np.abs(prod - expf)
                bound = 5.0 * s_paths
                out[float(t)] = (
                    s_paths.sum(),
                    phi_paths.sum(),
                    bool(np.all(gap <= bound + 1e-12)),
                    float((gap - bound).max()),
                )
            flat = prev.ravel()
            if hasattr(chain, "trunc_second"):
                m2 = np.asarray(chain.trunc_second(flat, obs, cut), dtype=float)
                m1 = tmv.ravel()
                tp = np.asarray(chain.cond_tail_prob(flat, obs, cut), dtype=float)
                mom = np.array(
                    [
                        n * (m2**2).mean() / B**4,
                        n * (tp**2).mean(),
                        n * (m1**2).mean() / B**2,
                    ]
                )
            else:
                mom = np.zeros(3)
            return out, out_a, mom, prev.shape[0]

        parts = simulate_paths(chain, n, run.replicates, run.master_seed, run.workers, reducer)
        total_r = 0
        for out, out_a, mom, r_count in parts:
            for t, (s_sum, phi_sum, gok, excess) in out.items():
                acc[t]["S"] += s_sum
                acc[t]["phi"] += phi_sum
                acc[t]["gap_ok"] = acc[t]["gap_ok"] and gok
                acc[t]["max_gap_excess"] = max(acc[t]["max_gap_excess"], excess)
            a_n_total += out_a
            moments += mom * r_count
            total_r += r_count
        moments /= total_r
        block = {
            "n": int(n),
            "B_n": float(B),
            "A_n_mean": float(a_n_total / total_r),
            "I1_mean": float(moments[0]),
            "I2_mean": float(moments[1]),
            "I3_mean": float(moments[2]),
            "per_theta": [],
        }
        for t in run.theta_grid:
            tgt = result.target_exponent[float(t)]
            phi_mean = acc[float(t)]["phi"] / total_r
            block["per_theta"].append(
                {
                    "theta": float(t),
                    "S_mean": float(acc[float(t)]["S"] / total_r),
                    "phi_mean_re": float(phi_mean.real),
                    "phi_mean_im": float(phi_mean.imag),
                    "phi_target_re": float(tgt.real),
                    "phi_target_im": float(tgt.imag),
                    "phi_distance": float(abs(phi_mean - tgt)),
                    "gap_bound_holds": bool(acc[float(t)]["gap_ok"]),
                    "max_gap_excess": float(acc[float(t)]["max_gap_excess"]),
                }
            )
        result.per_n.append(block)

    if check_states is not None:
        worst = 0.0
        t_max = max(abs(float(t)) for t in run.theta_grid)
        b_min = solve_bn(result.n_grid[0], tm)
        worst = quadrature_self_check(
            chain, check_states, t_max, obs, b_min, order=order, raise_on_fail=False
        )
        result.quadrature_check = float(worst)

    log_n = np.log(np.asarray(result.n_grid, dtype=float))
    for t in run.theta_grid:
        s_means = np.asarray([b["per_theta"][list(run.theta_grid).index(t)]["S_mean"] for b in result.per_n])
        if len(s_means) >= 2 and np.all(s_means > 0):
            result.decay_slopes[float(t)] = float(np.polyfit(log_n, np.log(s_means), 1)[0])
    return result


def run_diagnostics(cfg: LoadedConfig) -> DiagnosticsReport:
    """Operator diagnostics for the configured kernel.

    Backward chain: spectral gap with its analytic bound, the uniform-
    integrability tail curve, and the unbounded L^q norm sequence.  AR(1):
    the hyperboundedness double integral at the configured q values and an
    empirical covariance-decay fit.
    """
    kind = cfg.chain.get("type")
    d = cfg.diagnose
    report = DiagnosticsReport()
    if kind == "backward":
        chain = build_chain(cfg.chain)
        kern = chain.kernel
        gamma = kern.gamma
        from .chains import BackwardRecurrenceSpec

        spec = BackwardRecurrenceSpec(gamma)
        et = spec.expected_t()
        a = operator_norm_L20(kern)
        report.gap = float(a)
        report.gap_bound = float(np.sqrt(3.0 * et + gamma))
        report.truncation_sizes = [int(kern.size - 1)]
        k_max = int(d.get("k_max", 15))
        for k in range(0, k_max + 1):
            numeric, bound = ui2_tail_sup(kern, k)
            report.ui_curve.append((k, numeric, bound))
        q = float(d.get("q", 3.0))
        report.hyper_q = q
        for k in range(1, int(d.get("hyper_k_max", 40)) + 1):
            report.hyper_curve.append((k, hyper_norm_fk(gamma, q, k)))
        report.flags = {
            "gap_below_bound": bool(a * a <= 3.0 * et + gamma),
            "ui_curve_below_bound": bool(
                all(v <= b + 1e-12 for _, v, b in report.ui_curve if b is not None)
            ),
            "hyper_norms_unbounded": bool(report.hyper_curve[-1][1] > 100.0),
            "gap_assumptions_hold": spec.gap_assumptions_hold(),
        }
        return report
    if kind == "ar1":
        chain = build_chain(cfg.chain)
        rho = chain.rho
        qs = d.get("ar1_q", [2.5, 3.5])
        report.ar1_hyper = {}
        for q in qs:
            verdict = ar1_hyper_integral(rho, float(q))
            report.ar1_hyper[str(q)] = {
                "verdict": verdict.verdict,
                "q_critical": verdict.q_critical,
                "value": verdict.value,
                "quad_inner": verdict.quad_inner,
                "quad_outer": verdict.quad_outer,
                "quad_consistent": verdict.quad_consistent,
            }
        n_mix = int(d.get("mixing_n", 2000))
        n_rep = int(d.get("mixing_replicates", 64))
        states = simulate_paths(chain, n_mix, n_rep, cfg.run.master_seed, cfg.run.workers)[0]
        chi = lambda s: np.clip(s, -3.0, 3.0)
        decay = covariance_decay(states, chi, int(d.get("max_lag", 12)))
        report.mixing = decay.to_dict()
        report.flags = {
            "mixing_bound_violated": decay.bound_violated,
            "eta_hat_near_rho": bool(abs(decay.eta_hat - abs(rho)) < 0.05),
        }
        return report
    raise ConfigError(f"diagnostics support chain types 'backward' and 'ar1', got {kind!r}")


def bn_table(cfg: LoadedConfig) -> dict:
    """Normalizing-sequence table for a configured tail model."""
    bn = cfg.bn
    if not bn:
        raise ConfigError("bn subcommand needs a [bn] section")
    tm = TailModel(
        float(bn.get("alpha", 1.0)),
        float(bn.get("c_plus", 0.5)),
        float(bn.get("c_minus", 0.5)),
    )
    n_values = [int(v) for v in bn.get("n_values", [10, 100, 1000, 10000])]
    rows = []
    for n in n_values:
        b = solve_bn(n, tm)
        resid = n * tm.ell_const / b**tm.alpha - tm.total
        rows.append({"n": n, "B_n": float(b), "residual": float(resid)})
    return {
        "kind": "bn",
        "version": __version__,
        "config": cfg.raw,
        "alpha": tm.alpha,
        "c_plus": tm.c_plus,
        "c_minus": tm.c_minus,
        "rows": rows,
    }


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return [_canonical(v) for v in obj.tolist()]
    return obj


def dump_json(report) -> str:
    payload = report.to_dict() if hasattr(report, "to_dict") else report
    return json.dumps(_canonical(payload), sort_keys=True, indent=2) + "\n"


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def _generic_csv(report) -> tuple[list, list]:
    if hasattr(report, "csv_rows"):
        return report.csv_rows()
    payload = report.to_dict() if hasattr(report, "to_dict") else report
    if payload.get("kind") == "bn":
        return ["n", "B_n", "residual"], [
            [r["n"], r["B_n"], r["residual"]] for r in payload["rows"]
        ]
    if "per_n" in payload and payload["per_n"] and "per_theta" in payload["per_n"][0]:
        header = [
            "n",
            "B_n",
            "theta",
            "S_mean",
            "phi_mean_re",
            "phi_mean_im",
            "phi_target_re",
            "phi_target_im",
            "phi_distance",
            "gap_bound_holds",
        ]
        rows = []
        for block in payload["per_n"]:
            for row in block["per_theta"]:
                rows.append(
                    [
                        block["n"],
                        block["B_n"],
                        row["theta"],
                        row["S_mean"],
                        row["phi_mean_re"],
                        row["phi_mean_im"],
                        row["phi_target_re"],
                        row["phi_target_im"],
                        row["phi_distance"],
                        row["gap_bound_holds"],
                    ]
                )
        return header, rows
    return ["key", "value"], [[k, json.dumps(_canonical(v))] for k, v in payload.items()]


def write_report(report, outdir, name: str) -> tuple[Path, Path]:
    """Write canonical JSON and CSV; returns the two paths."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    jpath = out / f"{name}.json"
    cpath = out / f"{name}.csv"
    jpath.write_text(dump_json(report))
    header, rows = _generic_csv(report)
    cpath.write_text(_csv_text(header, rows))
    return jpath, cpath
