"""Asymptotic resolution, the (J, delta_m) sweep, the alpha fit, and mismatch modality."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bayes import (LikelihoodSpec, PhaseDistribution, asymptotic_likelihood, local_maxima,
                    phase_std, raise_to_n)
from .condprob import PhiGrid, table_for
from .fileio import provenance, write_json, write_rows_csv
from .state import StatePrep

__all__ = ["DEFAULT_N", "SweepRow", "AlphaFit", "FitError", "delta_phi_infinity",
           "universal_sweep", "fit_alpha", "resolution_law", "ModalityRow", "modality_scan",
           "write_sweep_csv"]

DEFAULT_N = 5
FIT_MIN_DELTA_M = 1.0


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class SweepRow:
    J: int
    delta_m: float
    delta_phi_inf: float

    @property
    def scaled(self) -> float:
        return self.J * self.delta_phi_inf


@dataclass(frozen=True)
class AlphaFit:
    alpha: float
    residual: float
    n_rows: int

    def to_json(self, path, **meta):
        doc = provenance(kind="alpha_fit", **meta)
        doc.update(alpha=self.alpha, residual=self.residual, n_rows=self.n_rows)
        return write_json(path, doc)


def resolution_law(J, delta_m, alpha: float = 2.0):
    """sqrt(J^-2 + (alpha delta_m / J)^2)."""
    return np.sqrt(1.0 + (alpha * np.asarray(delta_m)) ** 2) / np.asarray(J)


def likelihood(prep_true: StatePrep, prep_inference: StatePrep | None = None,
               theta: float = 0.0, grid: PhiGrid = PhiGrid()) -> PhaseDistribution:
    spec = LikelihoodSpec(table_for(prep_inference or prep_true, grid),
                          table_for(prep_true, grid), theta)
    return asymptotic_likelihood(spec)


def delta_phi_infinity(prep: StatePrep, theta: float = 0.0, n: float = DEFAULT_N,
                       grid: PhiGrid = PhiGrid()) -> float:
    """sqrt(n) times the std of the matched F^n; deterministic, no sampling."""
    F = likelihood(prep, None, theta, grid)
    return math.sqrt(n) * phase_std(raise_to_n(F, n))


def _pool_map(fn, items, threads):
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


def universal_sweep(J_values, delta_m_values, grid: PhiGrid = PhiGrid(),
                    n: float = DEFAULT_N, theta: float = 0.0,
                    threads: int | None = 1) -> list[SweepRow]:
    """Cartesian product J x delta_m at delta_J = 0; rows in input order."""
    cells = [(int(J), float(dm)) for J in J_values for dm in delta_m_values]
    if not cells:
        raise ValueError("sweep needs at least one J and one delta_m")

    def cell(c):
        J, dm = c
        return SweepRow(J, dm, delta_phi_infinity(StatePrep(J, 0.0, dm), theta, n, grid))

    return _pool_map(cell, cells, threads)


def fit_alpha(rows) -> AlphaFit:
    """Least squares for alpha^2 in scaled^2 = 1 + alpha^2 delta_m^2 over delta_m >= 1."""
    used = [r for r in rows if r.delta_m >= FIT_MIN_DELTA_M]
    if not used:
        raise FitError(f"no rows with delta_m >= {FIT_MIN_DELTA_M}; alpha is undetermined")
    x = np.array([r.delta_m**2 for r in used])
    y = np.array([r.scaled**2 - 1.0 for r in used])
    a2 = float(x @ y / (x @ x))
    if a2 <= 0:
        raise FitError(f"fitted alpha^2 = {a2} is not positive")
    scaled = np.array([r.scaled for r in used])
    model = np.sqrt(1.0 + a2 * x)
    return AlphaFit(math.sqrt(a2), float(np.max(np.abs(scaled / model - 1.0))), len(used))


def write_sweep_csv(path, rows, **meta):
    stamp = provenance(kind="sweep", **meta)
    return write_rows_csv(path, ["J", "delta_m", "delta_phi_inf", "scaled"],
                          [(r.J, r.delta_m, r.delta_phi_inf, r.scaled) for r in rows], stamp)


@dataclass(frozen=True)
class ModalityRow:
    delta_m_est: float
    n_modes: int
    peak_location: float
    std: float
    resolution: float
    likelihood: PhaseDistribution = field(repr=False, compare=False)


def modality_scan(J: int, delta_m: float, delta_m_est_values, theta: float = 0.0,
                  grid: PhiGrid = PhiGrid(), threads: int | None = 1,
                  n: float = DEFAULT_N) -> list[ModalityRow]:
    """Mode count, global argmax and std of F(phi | theta; dm_est, dm) per estimate.

    ``resolution`` is sqrt(n) * std(F^n), the mismatched analogue of delta_phi_infinity.
    """
    values = [float(v) for v in delta_m_est_values]
    if not values:
        raise ValueError("empty delta_m_est scan")
    truth = StatePrep(J, 0.0, delta_m)

    def one(dme):
        F = likelihood(truth, StatePrep(J, 0.0, dme), theta, grid)
        return ModalityRow(dme, len(local_maxima(F)), F.argmax(), phase_std(F),
                           math.sqrt(n) * phase_std(raise_to_n(F, n)), F)

    table_for(truth, grid)
    return _pool_map(one, values, threads)
