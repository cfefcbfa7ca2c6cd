"""Finite measurement records and the evolution of the posterior."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bayes import PhaseDistribution, bayes_update, phase_mean, phase_std, uniform_prior
from .condprob import CondProbTable, PhiGrid, table_for
from .fileio import provenance, write_json
from .state import StatePrep

__all__ = ["GENERATOR", "make_rng", "run_seed", "sample_outcome", "ReconstructionRun",
           "run_reconstruction", "ensemble_std"]

GENERATOR = "numpy.random.PCG64"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def run_seed(master_seed: int, counter: int) -> np.random.SeedSequence:
    """Seed of the counter-th run in an ensemble; entropy is (master, counter)."""
    return np.random.SeedSequence([int(master_seed), int(counter)])


def sample_outcome(table: CondProbTable, theta: float, rng: np.random.Generator) -> int:
    """Inverse-CDF draw from the table column nearest theta."""
    p = table.column(theta)
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    k = int(np.searchsorted(cdf, rng.random(), side="right"))
    return min(k, len(p) - 1) - table.m_max


@dataclass
class ReconstructionRun:
    seed: int
    theta: float
    n: int
    prep_true: StatePrep
    prep_inference: StatePrep
    grid: PhiGrid
    record: list[int] = field(default_factory=list)
    posteriors: list[PhaseDistribution] = field(default_factory=list, repr=False)
    snapshot_steps: list[int] = field(default_factory=list)

    @property
    def final(self) -> PhaseDistribution:
        return self.posteriors[-1]

    def summaries(self) -> list[dict]:
        return [{"step": step, "m": self.record[step - 1], "mean": phase_mean(d),
                 "std": phase_std(d), "argmax": d.argmax()}
                for step, d in zip(self.snapshot_steps, self.posteriors)]

    def to_json(self, path, **meta):
        doc = provenance(
            kind="reconstruction", generator=GENERATOR, seed=self.seed, theta=self.theta,
            n=self.n, grid_points=self.grid.count, prep_true=self.prep_true.as_dict(),
            prep_inference=self.prep_inference.as_dict(), **meta)
        doc["record"] = list(self.record)
        doc["steps"] = self.summaries()
        return write_json(path, doc)


def run_reconstruction(prep_true: StatePrep, prep_inference: StatePrep | None = None,
                       theta: float = 0.0, n: int = 30, seed: int = 42,
                       grid: PhiGrid = PhiGrid(), snapshot_every: int = 1,
                       rng: np.random.Generator | None = None) -> ReconstructionRun:
    """Sample n outcomes at theta from the true model and update with the inference model.

    A snapshot is kept every ``snapshot_every`` steps; the final step is always kept.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"record length n must be a positive integer, got {n}")
    if snapshot_every < 1:
        raise ValueError("snapshot_every must be >= 1")
    prep_inference = prep_inference or prep_true
    truth = table_for(prep_true, grid)
    model = table_for(prep_inference, grid)
    rng = rng if rng is not None else make_rng(seed)
    run = ReconstructionRun(seed, float(theta), int(n), prep_true, prep_inference, grid)
    post = uniform_prior(grid)
    for step in range(1, int(n) + 1):
        m = sample_outcome(truth, theta, rng)
        run.record.append(m)
        post = bayes_update(post, m, model)
        if step % snapshot_every == 0 or step == n:
            run.posteriors.append(post)
            run.snapshot_steps.append(step)
    return run


def ensemble_std(prep: StatePrep, theta: float = 0.0, n: int = 5, n_runs: int = 200,
                 seed: int = 42, grid: PhiGrid = PhiGrid(),
                 threads: int | None = 1) -> tuple[float, float]:
    """Mean final-posterior std over independent runs, and its standard error."""
    if n_runs < 2:
        raise ValueError("n_runs must be >= 2")

    def one(k):
        rng = np.random.Generator(np.random.PCG64(run_seed(seed, k)))
        run = run_reconstruction(prep, prep, theta, n, seed, grid,
                                 snapshot_every=int(n), rng=rng)
        return phase_std(run.final)

    table_for(prep, grid)  # warm the cache before fanning out
    if threads == 1:
        stds = [one(k) for k in range(n_runs)]
    else:
        with ThreadPoolExecutor(threads) as pool:
            stds = list(pool.map(one, range(n_runs)))
    stds = np.array(stds)
    return float(stds.mean()), float(stds.std(ddof=1) / math.sqrt(n_runs))
