"""Conditional detection probabilities P(m | phi) for mixed inputs on a phase grid."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .angular import rotation_columns
from .errors import NumericalContractError
from .fileio import provenance, write_csv
from .state import MixtureWeights, StatePrep, build_mixture

__all__ = ["PhiGrid", "CondProbTable", "cond_prob_table", "table_for", "tail_envelope",
           "delta_j_sensitivity", "check_normalization", "central_fwhm", "DEFAULT_GRID_POINTS"]

# Odd so that phi = 0 is a grid point.
DEFAULT_GRID_POINTS = 2049
NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class PhiGrid:
    """Uniform grid on [-pi/2, pi/2], endpoints included."""

    count: int = DEFAULT_GRID_POINTS

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 3:
            raise ValueError(f"grid needs at least 3 points, got {self.count}")

    @cached_property
    def points(self) -> np.ndarray:
        p = np.linspace(-np.pi / 2, np.pi / 2, self.count)
        p.setflags(write=False)
        return p

    @property
    def spacing(self) -> float:
        return math.pi / (self.count - 1)

    def nearest_index(self, theta: float) -> int:
        if not (-np.pi / 2 - 0.5 * self.spacing <= theta <= np.pi / 2 + 0.5 * self.spacing):
            raise ValueError(f"theta = {theta} outside the phase interval")
        return int(np.clip(round((theta + np.pi / 2) / self.spacing), 0, self.count - 1))


@dataclass(frozen=True)
class CondProbTable:
    """P[m + m_max, k] = P(m | phi_k)."""

    grid: PhiGrid
    m_max: int
    P: np.ndarray = field(repr=False)
    prep: StatePrep | None = None

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(-self.m_max, self.m_max + 1)

    def row(self, m: int) -> np.ndarray:
        """P(m | phi) over the grid; zeros outside the support."""
        if abs(m) > self.m_max:
            return np.zeros(self.grid.count)
        return self.P[m + self.m_max]

    def column(self, theta: float) -> np.ndarray:
        """Outcome distribution at the grid point nearest theta."""
        return self.P[:, self.grid.nearest_index(theta)]

    def padded(self, m_max: int) -> np.ndarray:
        if m_max < self.m_max:
            raise ValueError("cannot pad to a narrower outcome range")
        pad = m_max - self.m_max
        return np.pad(self.P, ((pad, pad), (0, 0)))

    def normalization_defect(self) -> float:
        return float(np.abs(self.P.sum(axis=0) - 1.0).max())

    def to_csv(self, path, **meta):
        header = ["phi"] + [f"m={m:+d}" if m else "m=0" for m in self.m_values]
        data = np.column_stack([self.grid.points, self.P.T])
        stamp = provenance(**{"kind": "condprob", "grid_points": self.grid.count,
                              **(self.prep.as_dict() if self.prep else {}), **meta})
        return write_csv(path, header, data, stamp)


def cond_prob_table(w: MixtureWeights, grid: PhiGrid) -> CondProbTable:
    """Sum of weight * D_J'(phi)[m, m0]^2 over the mixture components."""
    m_max = w.J_range[1]
    P = np.zeros((2 * m_max + 1, grid.count))
    for J, m0s, weights in w.components():
        cols = rotation_columns(J, grid.points, m0s)
        block = np.einsum("c,cpm->mp", weights, cols**2)
        P[m_max - J:m_max + J + 1] += block
    np.clip(P, 0.0, 1.0, out=P)
    P.setflags(write=False)
    return CondProbTable(grid, m_max, P, w.prep)


@lru_cache(maxsize=64)
def table_for(prep: StatePrep, grid: PhiGrid = PhiGrid()) -> CondProbTable:
    """Cached cond_prob_table keyed on (prep, grid)."""
    return cond_prob_table(build_mixture(prep), grid)


def check_normalization(table: CondProbTable, tol: float = NORMALIZATION_TOL) -> CondProbTable:
    defect = table.normalization_defect()
    if defect > tol:
        raise NumericalContractError(f"sum_m P(m|phi) deviates from 1 by {defect:.3e} > {tol:g}")
    return table


def tail_envelope(J: int, phi: float) -> float:
    """Averaged Bessel tail 1/(pi J phi)."""
    if phi <= 0:
        raise ValueError("tail envelope defined for phi > 0")
    return 1.0 / (math.pi * J * phi)


def central_fwhm(table: CondProbTable, m: int = 0) -> float:
    """Full width at half maximum of the peak of P(m | phi) around phi = 0."""
    y = table.row(m)
    phi = table.grid.points
    c = table.grid.nearest_index(0.0)
    half = 0.5 * y[c]

    def crossing(step):
        k = c
        while 0 < k < len(y) - 1 and y[k + step] > half:
            k += step
        k2 = k + step
        if not 0 <= k2 < len(y):
            return phi[k]
        # linear interpolation between k and k2
        t = (y[k] - half) / (y[k] - y[k2])
        return phi[k] + t * (phi[k2] - phi[k])

    return float(crossing(1) - crossing(-1))


def delta_j_sensitivity(prep: StatePrep, delta_j_values, grid: PhiGrid = PhiGrid(),
                        n: float = 5.0) -> list[tuple[float, float]]:
    """Asymptotic resolution for each total-spin spread, other parameters fixed."""
    from .analysis import delta_phi_infinity

    return [(float(dj), delta_phi_infinity(StatePrep(prep.J_mean, dj, prep.delta_m), 0.0, n, grid))
            for dj in delta_j_values]
