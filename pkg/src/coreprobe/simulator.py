"""Independent Monte Carlo check of the analytic miss probability.

Two models:

* ``urn`` -- the one-shot experiment behind the closed form: of n nodes,
  the first q are the core; alpha distinct nodes are replaced; q distinct
  nodes are probed; a miss is recorded when no probe lands on a
  surviving core member.
* ``churn_process`` -- the per-time-unit mechanism: every unit,
  ceil(c*n) of the current nodes (original or joined) are replaced by
  fresh ones; after delta units the probe is drawn.  This mode also
  tracks how many core members survived each trial.

Determinism contract: trials are partitioned into fixed-size blocks and
block b draws from ``SeedSequence(entropy=seed, spawn_key=(b,))``; block
size depends only on n.  Aggregation is integer summation over blocks.
Identical (seed, config) therefore produce identical reports no matter
how many worker threads run the blocks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Union

import numpy as np

from .persistence import (
    _check_int,
    churn_ratio,
    miss_probability,
    replaced_count,
)

__all__ = [
    "TrialConfig",
    "TrialReport",
    "AnalyticComparison",
    "run_urn_trials",
    "run_churn_trials",
    "compare_with_analytic",
    "run_trials",
    "draw_subsets",
    "wilson_interval",
    "THREADS_ENV_VAR",
]

Model = Literal["urn", "churn_process"]

THREADS_ENV_VAR = "COREPROBE_THREADS"

# Two-sided 99% standard normal quantile, for the Wilson interval.
_Z99 = 2.5758293035489004

# Block arrays hold roughly this many elements; the resulting block
# size is a pure function of n, so reports do not depend on the machine.
_BLOCK_ELEMENTS = 1 << 24
_MIN_BLOCK = 64
_MAX_BLOCK = 16384


@dataclass(frozen=True)
class TrialConfig:
    """Parameters of one simulation run.

    ``alpha`` is required by the urn model; ``c`` and ``delta`` by the
    churn process.  ``fractional_churn`` switches the churn process from
    a constant ceil(c*n) replacements per unit to an accumulator that
    replaces c*n on average (for sensitivity checks at sub-integer
    rates).
    """

    n: int
    q: int
    trials: int
    model: Model
    alpha: int | None = None
    c: Union[float, Fraction, None] = None
    delta: int | None = None
    seed: int = 0
    fractional_churn: bool = False

    def __post_init__(self) -> None:
        n = _check_int("n", self.n)
        q = _check_int("q", self.q)
        trials = _check_int("trials", self.trials)
        if n < 1 or n >= 2**31:
            raise ValueError(f"n must lie in [1, 2^31), got {n}")
        if not 0 <= q <= n:
            raise ValueError(f"q must lie in [0, n={n}], got {q}")
        if trials < 1:
            raise ValueError(f"trials must be >= 1, got {trials}")
        seed = _check_int("seed", self.seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned value, got {seed}")
        if self.model == "urn":
            if self.alpha is None:
                raise ValueError("urn model requires alpha")
            alpha = _check_int("alpha", self.alpha)
            if not 0 <= alpha <= n:
                raise ValueError(f"alpha must lie in [0, n={n}], got {alpha}")
            if self.c is not None or self.delta is not None:
                raise ValueError("urn model takes alpha, not (c, delta)")
            if self.fractional_churn:
                raise ValueError("fractional_churn applies to churn_process only")
        elif self.model == "churn_process":
            if self.c is None or self.delta is None:
                raise ValueError("churn_process model requires c and delta")
            if not 0 <= self.c < 1:
                raise ValueError(f"c must lie in [0, 1), got {self.c}")
            delta = _check_int("delta", self.delta)
            if delta < 0:
                raise ValueError(f"delta must be >= 0, got {delta}")
            if self.alpha is not None:
                raise ValueError("churn_process model takes (c, delta), not alpha")
        else:
            raise ValueError(f"unknown model {self.model!r}")


@dataclass(frozen=True)
class TrialReport:
    """Aggregate of a simulation run.

    ``ci_low``/``ci_high`` bound the miss probability by the 99% Wilson
    score interval.  Survivor statistics (count of core members never
    replaced, per trial) are present for the churn process only;
    ``survivor_stddev`` is the sample standard deviation.
    """

    trials: int
    misses: int
    epsilon_hat: float
    ci_low: float
    ci_high: float
    survivor_mean: float | None = None
    survivor_stddev: float | None = None


@dataclass(frozen=True)
class AnalyticComparison:
    """Empirical estimate side by side with the closed-form value."""

    report: TrialReport
    alpha: int
    epsilon_analytic: float
    epsilon_empirical: float
    z_score: float
    flagged: bool  # |z| > 3


def wilson_interval(
    successes: int, trials: int, z: float = _Z99
) -> tuple[float, float]:
    """Wilson score interval; well behaved even at zero observed counts."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes must lie in [0, {trials}], got {successes}")
    phat = successes / trials
    zz = z * z
    denom = 1.0 + zz / trials
    center = (phat + zz / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + zz / (4 * trials * trials))
    half /= denom
    # At the boundary counts the exact bound is 0 or 1; evaluating the
    # formula in floats can land an ulp inside, so pin those two cases.
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return low, high


def _block_size(n: int) -> int:
    return max(_MIN_BLOCK, min(_MAX_BLOCK, _BLOCK_ELEMENTS // n))


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(block,))
    )


class _PrefixSampler:
    """Distinct-subset sampler shared by all trials of one block.

    One (block, n) index array is set up once; ``draw(k)`` runs a
    partial Fisher-Yates shuffle of the k-prefix of every row with
    fresh partner indices, copies the prefix out, then undoes the swaps
    in reverse order.  Setup is O(block*n) once, each draw O(block*k).
    """

    def __init__(self, rng: np.random.Generator, block: int, n: int) -> None:
        self._rng = rng
        self._n = n
        self._arr = np.tile(np.arange(n, dtype=np.int32), (block, 1))
        self._rows = np.arange(block)
        self._block = block

    def draw(self, k: int) -> np.ndarray:
        """A uniform random k-subset of range(n) per row, shape (block, k)."""
        if not 0 <= k <= self._n:
            raise ValueError(f"k must lie in [0, n={self._n}], got {k}")
        arr, rows, rng = self._arr, self._rows, self._rng
        if k == 0:
            return np.empty((self._block, 0), dtype=np.int32)
        partners = np.empty((self._block, k), dtype=np.int32)
        for j in range(k):
            p = rng.integers(j, self._n, size=self._block, dtype=np.int32)
            partners[:, j] = p
            self._swap_column(j, p)
        sample = arr[:, :k].copy()
        for j in reversed(range(k)):
            self._swap_column(j, partners[:, j])
        return sample

    def _swap_column(self, j: int, p: np.ndarray) -> None:
        arr, rows = self._arr, self._rows
        tmp = arr[rows, p]           # advanced indexing copies
        col_j = arr[:, j].copy()
        arr[rows, p] = col_j
        arr[:, j] = tmp


def draw_subsets(n: int, k: int, count: int, seed: int = 0) -> np.ndarray:
    """``count`` independent uniform k-subsets of range(n), shape (count, k).

    Uses the same block/substream scheme as the trial runners, so it is
    deterministic in (n, k, count, seed).
    """
    n = _check_int("n", n)
    k = _check_int("k", k)
    count = _check_int("count", count)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    out = np.empty((count, k), dtype=np.int32)
    block = _block_size(n)
    for b, start in enumerate(range(0, count, block)):
        size = min(block, count - start)
        sampler = _PrefixSampler(_block_rng(seed, b), size, n)
        out[start : start + size] = sampler.draw(k)
    return out


def _resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV_VAR, "1"))
    if threads < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")
    return threads


def _miss_count(
    probes: np.ndarray, replaced: np.ndarray, q: int, rows: np.ndarray
) -> int:
    """Trials in which no probe hit a never-replaced core slot (< q)."""
    hits = (probes < q) & ~replaced[rows[:, None], probes]
    return int(len(rows) - hits.any(axis=1).sum())


def _urn_block(config: TrialConfig, block: int, size: int) -> int:
    rng = _block_rng(config.seed, block)
    sampler = _PrefixSampler(rng, size, config.n)
    replaced_idx = sampler.draw(config.alpha)
    probes = sampler.draw(config.q)
    rows = np.arange(size)
    replaced = np.zeros((size, config.n), dtype=bool)
    if config.alpha:
        replaced[rows[:, None], replaced_idx] = True
    return _miss_count(probes, replaced, config.q, rows)


def _replacement_schedule(config: TrialConfig) -> list[int]:
    """Nodes replaced at each time unit.

    Default: the constant ceil(c*n).  Fractional mode: carry the
    non-integer remainder so units replace c*n on average.
    """
    n, c, delta = config.n, config.c, config.delta
    if not config.fractional_churn:
        return [math.ceil(c * n)] * delta
    schedule = []
    carry = 0.0
    rate = float(c) * n
    for _ in range(delta):
        x = carry + rate
        r = math.floor(x)
        carry = x - r
        schedule.append(r)
    return schedule


def _churn_block(
    config: TrialConfig, block: int, size: int, schedule: list[int]
) -> tuple[int, int, int]:
    rng = _block_rng(config.seed, block)
    sampler = _PrefixSampler(rng, size, config.n)
    rows = np.arange(size)
    replaced_ever = np.zeros((size, config.n), dtype=bool)
    for r in schedule:
        if r:
            idx = sampler.draw(r)
            replaced_ever[rows[:, None], idx] = True
    probes = sampler.draw(config.q)
    misses = _miss_count(probes, replaced_ever, config.q, rows)
    survivors = config.q - replaced_ever[:, : config.q].sum(axis=1)
    return misses, int(survivors.sum()), int((survivors.astype(np.int64) ** 2).sum())


def _blocks(config: TrialConfig) -> list[tuple[int, int]]:
    block = _block_size(config.n)
    return [
        (b, min(block, config.trials - start))
        for b, start in enumerate(range(0, config.trials, block))
    ]


def _map_blocks(fn, blocks, threads):
    if threads == 1:
        return [fn(b, size) for b, size in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda bs: fn(*bs), blocks))


def run_urn_trials(config: TrialConfig, threads: int | None = None) -> TrialReport:
    """Run the one-shot replacement experiment ``config.trials`` times."""
    if config.model != "urn":
        raise ValueError(f"run_urn_trials requires model='urn', got {config.model!r}")
    threads = _resolve_threads(threads)
    results = _map_blocks(
        lambda b, size: _urn_block(config, b, size), _blocks(config), threads
    )
    misses = sum(results)
    low, high = wilson_interval(misses, config.trials)
    return TrialReport(
        trials=config.trials,
        misses=misses,
        epsilon_hat=misses / config.trials,
        ci_low=low,
        ci_high=high,
    )


def run_churn_trials(config: TrialConfig, threads: int | None = None) -> TrialReport:
    """Run the per-time-unit replacement process ``config.trials`` times."""
    if config.model != "churn_process":
        raise ValueError(
            f"run_churn_trials requires model='churn_process', got {config.model!r}"
        )
    threads = _resolve_threads(threads)
    schedule = _replacement_schedule(config)
    results = _map_blocks(
        lambda b, size: _churn_block(config, b, size, schedule),
        _blocks(config),
        threads,
    )
    misses = sum(r[0] for r in results)
    surv_sum = sum(r[1] for r in results)
    surv_sumsq = sum(r[2] for r in results)
    t = config.trials
    mean = surv_sum / t
    if t > 1:
        var = max(0.0, (surv_sumsq - t * mean * mean) / (t - 1))
    else:
        var = 0.0
    low, high = wilson_interval(misses, t)
    return TrialReport(
        trials=t,
        misses=misses,
        epsilon_hat=misses / t,
        ci_low=low,
        ci_high=high,
        survivor_mean=mean,
        survivor_stddev=math.sqrt(var),
    )


def run_trials(config: TrialConfig, threads: int | None = None) -> TrialReport:
    """Dispatch to the runner matching ``config.model``."""
    if config.model == "urn":
        return run_urn_trials(config, threads)
    return run_churn_trials(config, threads)


def analytic_alpha(config: TrialConfig) -> int:
    """Replacement count the analytic comparison uses for this config."""
    if config.model == "urn":
        return config.alpha
    return replaced_count(config.n, churn_ratio(config.c, config.delta))


def compare_with_analytic(
    config: TrialConfig, threads: int | None = None
) -> AnalyticComparison:
    """Run the configured simulation and z-test it against the closed form.

    The standard error uses the analytic value (the null hypothesis).
    For the churn process the analytic side goes through the derived
    replacement count, so the z-score quantifies the gap introduced by
    treating the survivor decay as deterministic; it is reported, not
    asserted.
    """
    report = run_trials(config, threads)
    alpha = analytic_alpha(config)
    eps = float(miss_probability(config.n, alpha, config.q).epsilon)
    se = math.sqrt(eps * (1.0 - eps) / config.trials)
    diff = report.epsilon_hat - eps
    if se == 0.0:
        z = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    else:
        z = diff / se
    return AnalyticComparison(
        report=report,
        alpha=alpha,
        epsilon_analytic=eps,
        epsilon_empirical=report.epsilon_hat,
        z_score=z,
        flagged=abs(z) > 3.0,
    )
