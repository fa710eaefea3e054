"""Replicate-parallel simulation with schedule-independent randomness.

Every replicate i draws from its own stream seeded by (master_seed, i); work
is partitioned into fixed-size chunks of replicates and chunks may run on any
number of worker threads.  Because streams are per replicate, chunk size is a
library constant, and results land in per-chunk slots, the output is
byte-identical for every worker count and schedule.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np

from .chains import AR1Chain, CountableChain, IidChain, SkeletonChain
from .errors import ConfigError
from .tails import ObservableSpec

__all__ = [
    "replicate_stream",
    "map_chunks",
    "simulate_sums",
    "simulate_paths",
    "CHUNK_SIZE",
]

CHUNK_SIZE = 256  # replicates per work unit; fixed so results ignore worker count
_STEP_BLOCK = 2048  # steps of pre-drawn noise per replicate


def replicate_stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator for one replicate; depends only on (seed, index)."""
    return np.random.default_rng([int(master_seed), int(index)])


def map_chunks(n_total: int, workers: int, fn: Callable[[int, int], object]) -> list:
    """Apply fn(start, stop) over fixed chunks, collecting in chunk order."""
    bounds = [(s, min(s + CHUNK_SIZE, n_total)) for s in range(0, n_total, CHUNK_SIZE)]
    if workers <= 1:
        return [fn(s, e) for s, e in bounds]
    slots = [None] * len(bounds)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(fn, s, e): i for i, (s, e) in enumerate(bounds)}
        for fut, i in futures.items():
            slots[i] = fut.result()
    return slots


def _draws(gens, take: int, kind: str) -> np.ndarray:
    if kind == "normal":
        return np.stack([g.standard_normal(take) for g in gens])
    return np.stack([g.random(take) for g in gens])


def make_cond_mean_fn(chain, obs: ObservableSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Fast per-state conditional mean E(psi(X_1) | x) for centering loops."""
    if isinstance(chain, IidChain):
        mean = chain.observable().mean
        return lambda states: np.full(len(states), mean)
    if isinstance(chain, CountableChain):
        table = chain.kernel.P @ np.asarray(obs.psi(np.arange(chain.kernel.size)), dtype=float)
        return lambda states: table[states.astype(np.int64)]
    if isinstance(chain, AR1Chain):
        interp = chain.make_moment_table(obs, 1e13, 1, -10.0 * abs(chain.rho), 10.0 * abs(chain.rho))
        rho = chain.rho
        return lambda states: interp(rho * states)
    if isinstance(chain, SkeletonChain):
        return lambda states: chain.cond_mean(states)
    raise ConfigError(f"conditional centering unsupported for {type(chain).__name__}")


def simulate_sums(
    chain,
    obs: ObservableSpec,
    n_grid,
    n_replicates: int,
    master_seed: int,
    centering: str = "none",
    workers: int = 1,
    stride: int = 1,
) -> np.ndarray:
    """Centered partial sums of psi along stationary paths.

    Returns an array of shape (len(n_grid), n_replicates): entry [i, r] is
    sum_{k=1}^{n_grid[i]} psi(X_{stride k}) for replicate r, centered per
    ``centering`` ("none"; "mean": subtract n * pi(psi); "conditional":
    subtract the conditional mean of each summand).
    """
    n_grid = [int(n) for n in n_grid]
    if sorted(n_grid) != n_grid or len(set(n_grid)) != len(n_grid):
        raise ConfigError("n_grid must be strictly increasing")
    if centering not in ("none", "mean", "conditional"):
        raise ConfigError(f"unknown centering mode {centering!r}")
    if centering == "conditional" and stride != 1:
        raise ConfigError("conditional centering requires stride 1")
    cond_mean_fn = make_cond_mean_fn(chain, obs) if centering == "conditional" else None
    total_steps = stride * n_grid[-1]
    snap_at = {stride * n: i for i, n in enumerate(n_grid)}

    def work(start: int, stop: int) -> np.ndarray:
        gens = [replicate_stream(master_seed, i) for i in range(start, stop)]
        states = np.concatenate([chain.stationary_init(g, 1) for g in gens])
        acc = np.zeros(stop - start)
        out = np.empty((len(n_grid), stop - start))
        step = 0
        while step < total_steps:
            take = min(_STEP_BLOCK, total_steps - step)
            noise = _draws(gens, take, chain.noise_kind)
            for j in range(take):
                if cond_mean_fn is not None:
                    acc -= cond_mean_fn(states)
                states = chain.step_block(states, noise[:, j])
                step += 1
                if step % stride == 0:
                    acc += obs.psi(states)
                idx = snap_at.get(step)
                if idx is not None:
                    out[idx] = acc
            del noise
        return out

    parts = map_chunks(n_replicates, workers, work)
    sums = np.concatenate(parts, axis=1)
    if centering == "mean":
        sums = sums - np.asarray(n_grid)[:, None] * obs.mean
    return sums


def simulate_paths(
    chain,
    n_steps: int,
    n_replicates: int,
    master_seed: int,
    workers: int = 1,
    reducer: Optional[Callable[[np.ndarray, int], object]] = None,
) -> list:
    """Stationary paths X_0..X_n per replicate, chunk by chunk.

    Without a reducer, returns the full (n_replicates, n_steps+1) array of
    states (memory permitting).  With a reducer, each chunk's (R, n+1) block
    is passed to ``reducer(block, start_index)`` and the per-chunk results
    are returned in order, which keeps memory flat for long paths.
    """

    def work(start: int, stop: int):
        gens = [replicate_stream(master_seed, i) for i in range(start, stop)]
        states = np.concatenate([chain.stationary_init(g, 1) for g in gens])
        block = np.empty((stop - start, n_steps + 1), dtype=states.dtype)
        block[:, 0] = states
        step = 0
        while step < n_steps:
            take = min(_STEP_BLOCK, n_steps - step)
            noise = _draws(gens, take, chain.noise_kind)
            for j in range(take):
                states = chain.step_block(states, noise[:, j])
                block[:, step + j + 1] = states
            step += take
        return reducer(block, start) if reducer is not None else block

    parts = map_chunks(n_replicates, workers, work)
    if reducer is not None:
        return parts
    return [np.concatenate(parts, axis=0)]
