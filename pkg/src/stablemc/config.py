"""Run configuration: a single TOML file with nested sections.

Sections: [run] (grids, replicates, seed, centering, workers), [chain]
(which kernel and its parameters), [observable] (which psi and its tail),
and optional [diagnose] / [bn] blocks for those subcommands.  Unknown
sections or keys are rejected, as are centering/tail combinations outside
the supported theorems.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .chains import (
    AR1Chain,
    AR1Spec,
    ArchChain,
    ArchSpec,
    BackwardRecurrenceSpec,
    CountableChain,
    IidChain,
    SkeletonChain,
    SkeletonSpec,
    backward_recurrence_kernel,
)
from .errors import ConfigError, InvalidParameterError
from .tails import ObservableSpec, TailModel, two_sided_pareto, quantile_observable
from scipy.special import ndtr

__all__ = ["RunSettings", "LoadedConfig", "load_config", "build_chain", "build_observable"]

DEFAULT_THETA_GRID = [0.25, 0.5, 1.0, 2.0, 4.0, -0.25, -0.5, -1.0, -2.0, -4.0]

_RUN_KEYS = {
    "n_grid",
    "replicates",
    "master_seed",
    "theta_grid",
    "h",
    "centering",
    "workers",
    "skeleton_m",
    "tau_draws",
    "gh_order",
}
_CHAIN_KEYS = {
    "type",
    "rho",
    "gamma",
    "K",
    "beta",
    "lam",
    "series_terms",
    "burn_in",
    "alpha",
    "scale",
}
_OBS_KEYS = {"type", "alpha", "c_plus", "c_minus", "clip", "beta_moment", "tail_alpha"}
_DIAGNOSE_KEYS = {"k_max", "q", "hyper_k_max", "ar1_q", "max_lag", "mixing_replicates", "mixing_n"}
_BN_KEYS = {"alpha", "c_plus", "c_minus", "n_values"}
_SECTIONS = {"run", "chain", "observable", "diagnose", "bn"}


@dataclass
class RunSettings:
    n_grid: list = field(default_factory=lambda: [1000])
    replicates: int = 200
    master_seed: int = 0
    theta_grid: list = field(default_factory=lambda: list(DEFAULT_THETA_GRID))
    h: float = 1.0
    centering: str = "none"
    workers: int = 1
    skeleton_m: int = 10000
    tau_draws: int = 200000
    gh_order: int = 128

    def validate(self) -> None:
        n = [int(v) for v in self.n_grid]
        if len(n) == 0 or sorted(n) != n or len(set(n)) != len(n) or n[0] < 1:
            raise ConfigError("run.n_grid must be a strictly increasing list of positive ints")
        if self.replicates < 1:
            raise ConfigError("run.replicates must be >= 1")
        if self.h <= 0:
            raise ConfigError("run.h must be positive")
        if self.centering not in ("none", "mean", "conditional"):
            raise ConfigError(f"unknown centering mode {self.centering!r}")
        if self.workers < 1:
            raise ConfigError("run.workers must be >= 1")
        if len(self.theta_grid) == 0:
            raise ConfigError("run.theta_grid must be nonempty")


@dataclass
class LoadedConfig:
    run: RunSettings
    chain: dict
    observable: dict
    diagnose: dict
    bn: dict
    raw: dict


def _check_keys(section: str, data: dict, allowed: set) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")


def load_config(path) -> LoadedConfig:
    """Parse and structurally validate a TOML run configuration."""
    try:
        with open(Path(path), "rb") as fh:
            raw = _toml.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    unknown = set(raw) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    run_raw = raw.get("run", {})
    _check_keys("run", run_raw, _RUN_KEYS)
    run = RunSettings(**run_raw)
    run.validate()
    chain = dict(raw.get("chain", {}))
    _check_keys("chain", chain, _CHAIN_KEYS)
    observable = dict(raw.get("observable", {}))
    _check_keys("observable", observable, _OBS_KEYS)
    diagnose = dict(raw.get("diagnose", {}))
    _check_keys("diagnose", diagnose, _DIAGNOSE_KEYS)
    bn = dict(raw.get("bn", {}))
    _check_keys("bn", bn, _BN_KEYS)
    return LoadedConfig(run=run, chain=chain, observable=observable, diagnose=diagnose, bn=bn, raw=raw)


def build_chain(chain_cfg: dict):
    """Instantiate the configured kernel engine."""
    kind = chain_cfg.get("type")
    if kind is None:
        raise ConfigError("missing chain.type")
    try:
        if kind == "ar1":
            return AR1Chain(AR1Spec(rho=float(chain_cfg.get("rho", 0.5))))
        if kind == "arch":
            spec = ArchSpec(
                beta=float(chain_cfg.get("beta", 1.0)),
                lam=float(chain_cfg.get("lam", 1.2)),
                series_terms=int(chain_cfg.get("series_terms", 200)),
            )
            return ArchChain(spec, burn_in=int(chain_cfg.get("burn_in", 1000)))
        if kind == "skeleton":
            return SkeletonChain(
                SkeletonSpec(
                    alpha=float(chain_cfg.get("alpha", 1.0)),
                    scale=float(chain_cfg.get("scale", 1.0)),
                )
            )
        if kind == "backward":
            spec = BackwardRecurrenceSpec(gamma=float(chain_cfg.get("gamma", 0.1)))
            kern = backward_recurrence_kernel(spec, K=int(chain_cfg.get("K", 30)))
            return CountableChain(kern)
        if kind == "iid":
            # marginal comes from the observable block; placeholder built there
            return None
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown chain type {kind!r}")


def _clipped_cubic_observable(obs_cfg: dict) -> ObservableSpec:
    clip = float(obs_cfg.get("clip", 50.0))
    if clip <= 0:
        raise ConfigError("observable.clip must be positive")
    tail_alpha = float(obs_cfg.get("tail_alpha", 1.2))
    beta_moment = float(obs_cfg.get("beta_moment", 1.5))
    psi = lambda x: np.clip(np.asarray(x, dtype=float) ** 3, -clip, clip)
    tm = TailModel(tail_alpha, 0.5, 0.5)
    # odd clip of a symmetric marginal: pi(psi) = 0 exactly
    return ObservableSpec(psi=psi, tail_model=tm, mean=0.0, beta_moment=beta_moment)


def build_observable(obs_cfg: dict, chain, chain_cfg: dict):
    """Construct the observable and, for the iid chain, the chain itself.

    Returns (chain, observable).  Heavy-tailed quantile observables pair only
    with continuous-marginal chains: the atomic backward-recurrence marginal
    gives a step tail whose regular variation is not guaranteed, so that
    combination is rejected.
    """
    kind = obs_cfg.get("type")
    chain_kind = chain_cfg.get("type")
    if kind is None:
        raise ConfigError("missing observable.type")
    try:
        if kind == "identity":
            if chain_kind != "iid":
                raise ConfigError("observable 'identity' is the iid kernel's own observable")
            marginal = two_sided_pareto(
                float(obs_cfg.get("alpha", 1.5)),
                float(obs_cfg.get("c_plus", 0.5)),
                float(obs_cfg.get("c_minus", 0.5)),
            )
            chain = IidChain(marginal)
            return chain, chain.observable()
        if kind == "pareto_quantile":
            if chain_kind == "backward":
                raise ConfigError(
                    "quantile observables need a continuous stationary marginal; "
                    "the backward-recurrence chain is atomic"
                )
            if chain_kind != "ar1":
                raise ConfigError(f"pareto_quantile is not defined for chain {chain_kind!r}")
            target = two_sided_pareto(
                float(obs_cfg.get("alpha", 0.8)),
                float(obs_cfg.get("c_plus", 0.5)),
                float(obs_cfg.get("c_minus", 0.5)),
            )
            return chain, quantile_observable(ndtr, target)
        if kind == "builtin":
            if chain_kind == "skeleton":
                return chain, chain.spec.observable()
            raise ConfigError(f"chain {chain_kind!r} has no builtin observable")
        if kind == "clipped_cubic":
            if chain_kind != "ar1":
                raise ConfigError("clipped_cubic is supported on the AR(1) chain")
            return chain, _clipped_cubic_observable(obs_cfg)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown observable type {kind!r}")


def validate_limit_run(run: RunSettings, obs: ObservableSpec) -> None:
    """Centering mode vs tail-exponent case, per the limit theorems."""
    alpha = obs.tail_model.alpha
    if alpha == 1.0 and obs.tail_model.c_plus != obs.tail_model.c_minus:
        raise ConfigError("alpha = 1 runs require a symmetric tail (c_plus == c_minus)")
    if run.centering == "conditional" and alpha <= 1.0:
        raise ConfigError("conditional centering is the alpha in (1,2) regime")
    if run.centering == "none" and alpha > 1.0 and obs.mean != 0.0:
        raise ConfigError(
            "no-centering runs with alpha in (1,2) need pi(psi) = 0 "
            f"(declared mean {obs.mean})"
        )
