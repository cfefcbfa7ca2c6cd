"""Posterior updating on the phase grid and the asymptotic likelihood F(phi | theta)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .condprob import CondProbTable, PhiGrid
from .errors import ModelContradictionError
from .fileio import provenance, write_csv

__all__ = ["PhaseDistribution", "LikelihoodSpec", "uniform_prior", "bayes_update",
           "posterior_from_record", "asymptotic_likelihood", "log_likelihood",
           "raise_to_n", "phase_std", "phase_mean", "local_maxima", "MODE_FLOOR"]

# Relative height below which a local maximum is treated as ripple.
MODE_FLOOR = 1e-3


@dataclass(frozen=True)
class PhaseDistribution:
    grid: PhiGrid
    density: np.ndarray = field(repr=False)

    @classmethod
    def from_unnormalized(cls, grid: PhiGrid, values) -> "PhaseDistribution":
        values = np.asarray(values, dtype=float)
        z = trapezoid(values, grid.points)
        if not np.isfinite(z) or z <= 0:
            raise ModelContradictionError("distribution has no support on the grid")
        density = values / z
        density.setflags(write=False)
        return cls(grid, density)

    @classmethod
    def from_log(cls, grid: PhiGrid, log_values) -> "PhaseDistribution":
        log_values = np.asarray(log_values, dtype=float)
        top = np.max(log_values)
        if not np.isfinite(top):
            raise ModelContradictionError("distribution has no support on the grid")
        return cls.from_unnormalized(grid, np.exp(log_values - top))

    @property
    def phi(self) -> np.ndarray:
        return self.grid.points

    def integral(self) -> float:
        return float(trapezoid(self.density, self.phi))

    def argmax(self) -> float:
        return float(self.phi[np.argmax(self.density)])

    def to_csv(self, path, **meta):
        stamp = provenance(**{"kind": "phase_distribution", "grid_points": self.grid.count, **meta})
        return write_csv(path, ["phi", "density"], np.column_stack([self.phi, self.density]), stamp)


@dataclass(frozen=True)
class LikelihoodSpec:
    """Inference model, true model, and true phase for F(phi | theta; dm_est, dm)."""

    inference_table: CondProbTable
    truth_table: CondProbTable
    theta: float = 0.0

    def __post_init__(self):
        if self.inference_table.grid != self.truth_table.grid:
            raise ValueError("inference and truth tables must share a grid")

    @property
    def grid(self) -> PhiGrid:
        return self.truth_table.grid

    def aligned(self) -> tuple[np.ndarray, np.ndarray]:
        """(inference P, truth P) padded to a common outcome range."""
        m_max = max(self.inference_table.m_max, self.truth_table.m_max)
        return self.inference_table.padded(m_max), self.truth_table.padded(m_max)


def uniform_prior(grid: PhiGrid) -> PhaseDistribution:
    return PhaseDistribution.from_unnormalized(grid, np.ones(grid.count))


def bayes_update(prior: PhaseDistribution, m: int, table: CondProbTable) -> PhaseDistribution:
    if table.grid != prior.grid:
        raise ValueError("prior and table grids differ")
    product = prior.density * table.row(m)
    if not np.any(product > 0):
        raise ModelContradictionError(f"outcome m={m} has zero probability at every phase")
    return PhaseDistribution.from_unnormalized(prior.grid, product)


def posterior_from_record(record, table: CondProbTable) -> PhaseDistribution:
    """Product-form posterior from the whole record in one pass (uniform prior)."""
    m_vals, counts = np.unique(np.asarray(record, dtype=int), return_counts=True)
    log_p = np.zeros(table.grid.count)
    with np.errstate(divide="ignore"):
        for m, c in zip(m_vals, counts):
            log_p += c * np.log(table.row(int(m)))
    return PhaseDistribution.from_log(table.grid, log_p)


def log_likelihood(spec: LikelihoodSpec) -> np.ndarray:
    """sum_m P_true(m|theta) log P_inf(m|phi), with 0 log 0 = 0 and no floor.

    Rows are summed one at a time: a matmul would turn 0 * -inf into nan.
    """
    p_inf, p_true = spec.aligned()
    w = p_true[:, spec.grid.nearest_index(spec.theta)]
    out = np.zeros(spec.grid.count)
    with np.errstate(divide="ignore"):
        for wm, row in zip(w, p_inf):
            if wm > 0:
                out += wm * np.log(row)
    return out


def asymptotic_likelihood(spec: LikelihoodSpec) -> PhaseDistribution:
    return PhaseDistribution.from_log(spec.grid, log_likelihood(spec))


def raise_to_n(F: PhaseDistribution, n: float) -> PhaseDistribution:
    """F^n renormalized, evaluated in the log domain."""
    if not n > 0:
        raise ValueError(f"n must be positive, got {n}")
    if n == 1:
        return F
    with np.errstate(divide="ignore"):
        return PhaseDistribution.from_log(F.grid, n * np.log(F.density))


def phase_mean(dist: PhaseDistribution) -> float:
    return float(trapezoid(dist.phi * dist.density, dist.phi))


def phase_std(dist: PhaseDistribution) -> float:
    """Plain second-moment standard deviation on the bounded interval."""
    phi, p = dist.phi, dist.density
    mean = trapezoid(phi * p, phi)
    var = trapezoid(phi**2 * p, phi) - mean**2
    return float(np.sqrt(max(var, 0.0)))


def local_maxima(dist: PhaseDistribution, floor: float = MODE_FLOOR) -> np.ndarray:
    """Grid indices strictly above both neighbours and above floor * global max."""
    y = dist.density
    inner = np.arange(1, len(y) - 1)
    peak = (y[inner] > y[inner - 1]) & (y[inner] > y[inner + 1]) & (y[inner] > floor * y.max())
    return inner[peak]
