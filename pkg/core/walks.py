"""
Monte Carlo Return Probabilities
================================

Estimates μ^{(n)}(e) by sampling i.i.d. step products. Trials are cut into
fixed-size blocks; block b draws from np.random.SeedSequence([seed, b]) so the
merged counts do not depend on how many worker processes ran the blocks.
"""

import math
from dataclasses import dataclass
from multiprocessing import Pool
from typing import List, Optional, Tuple

import numpy as np
from scipy.stats import norm

from .measures import MeasureSpec, make_progress
from .utils import MeasureError, console, get_logger

logger = get_logger(__name__)


@dataclass
class WalkEstimate:
    n: int
    trials: int
    hits: int
    estimate: float
    ci_low: float
    ci_high: float
    seed: int
    std_error: float

    @property
    def three_sigma(self) -> Tuple[float, float]:
        return self.estimate - 3 * self.std_error, self.estimate + 3 * self.std_error

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high

    def to_json(self):
        return {
            "n": self.n,
            "trials": self.trials,
            "hits": self.hits,
            "estimate": self.estimate,
            "ci": [self.ci_low, self.ci_high],
            "std_error": self.std_error,
            "seed": self.seed,
        }


def wilson_interval(hits: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise MeasureError("Wilson interval needs at least one trial")
    z = float(norm.ppf(0.5 + confidence / 2))
    p = hits / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _run_block(task) -> int:
    spec, n, trials, seed, block = task
    rng = np.random.default_rng(np.random.SeedSequence([seed, block]))
    atoms, cdf = spec.sampler()
    picks = np.searchsorted(cdf, rng.random((trials, n)), side="right")
    np.minimum(picks, len(atoms) - 1, out=picks)
    group = spec.group
    e = group.identity()
    multiply = group.multiply
    hits = 0
    for row in picks:
        x = e
        for k in row:
            x = multiply(x, atoms[k])
        if x == e:
            hits += 1
    return hits


def block_tasks(spec: MeasureSpec, n: int, trials: int, seed: int, block_size: int) -> List[tuple]:
    tasks = []
    done = 0
    block = 0
    while done < trials:
        size = min(block_size, trials - done)
        tasks.append((spec, n, size, seed, block))
        done += size
        block += 1
    return tasks


def mc_return_probability(spec: MeasureSpec, n: int, trials: int, seed: int,
                          threads: int = 1, block_size: int = 10_000,
                          show_progress: bool = False) -> WalkEstimate:
    """
    Fraction of `trials` sampled n-step products equal to the identity,
    with a 95% Wilson interval.
    """
    if trials < 1:
        raise MeasureError(f"trials must be >= 1, got {trials}")
    if n < 0:
        raise MeasureError(f"n must be >= 0, got {n}")
    if block_size < 1:
        raise MeasureError(f"block size must be >= 1, got {block_size}")

    if n == 0:
        hits = trials
    else:
        tasks = block_tasks(spec, n, trials, seed, block_size)
        logger.debug("%d trials of %s^%d in %d blocks on %d workers", trials, spec.name, n, len(tasks), threads)
        hits = 0
        with make_progress(show_progress and console.is_terminal) as progress:
            task_id = progress.add_task(f"sampling {spec.name}", total=len(tasks))
            if threads > 1 and len(tasks) > 1:
                with Pool(processes=threads) as pool:
                    for block_hits in pool.imap(_run_block, tasks):
                        hits += block_hits
                        progress.advance(task_id)
            else:
                for task in tasks:
                    hits += _run_block(task)
                    progress.advance(task_id)

    estimate = hits / trials
    low, high = wilson_interval(hits, trials)
    std_error = math.sqrt(estimate * (1 - estimate) / trials)
    return WalkEstimate(n, trials, hits, estimate, low, high, seed, std_error)
