"""Exit criteria of the build, shared by ``fockphase verify`` and the test suite.

Each check returns a Result; tolerances are fixed here and nowhere else.
"""
from __future__ import annotations

import contextlib
import filecmp
import io
import math
import os
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .analysis import delta_phi_infinity, fit_alpha, modality_scan, universal_sweep
from .angular import matrix_exponential_oracle, rotation_kernel
from .condprob import PhiGrid, delta_j_sensitivity, table_for
from .montecarlo import ensemble_std, make_rng, sample_outcome
from .state import StatePrep

REFERENCE_J = (10, 20, 40, 80)
PANEL_PREPS = [(10, 0, 0), (10, 0, 1), (10, 0, 3), (10, 3, 0), (10, 3, 1), (10, 3, 3)]
CHI2_PREPS = [StatePrep(10, 0, 1), StatePrep(10, 3, 1), StatePrep(20, 0, 3)]


@dataclass
class Result:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number}. {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(number, name):
    def wrap(fn):
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            passed, detail = fn(*args, **kwargs)
            return Result(number, name, bool(passed), detail, time.perf_counter() - t0)
        run.__name__ = fn.__name__
        run.number = number
        return run
    return wrap


@_timed(1, "oracle equivalence")
def oracle_equivalence(**_):
    t0 = time.perf_counter()
    worst = 0.0
    for J in range(6):
        for phi in np.linspace(-np.pi / 2, np.pi / 2, 50):
            diff = np.abs(rotation_kernel(J, phi).D - matrix_exponential_oracle(J, phi).D).max()
            worst = max(worst, diff)
    dt = time.perf_counter() - t0
    return worst < 1e-10 and dt < 1.0, f"max |D - oracle| = {worst:.2e} (< 1e-10), {dt:.2f}s (< 1s)"


@_timed(2, "normalization on the six panel preps")
def normalization_suite(**_):
    grid = PhiGrid(2048)
    defects = [table_for(StatePrep(*p), grid).normalization_defect() for p in PANEL_PREPS]
    return max(defects) < 1e-10, f"max over 6 preps x 2048 points = {max(defects):.2e} (< 1e-10)"


@_timed(3, "Heisenberg plateau")
def heisenberg_plateau(**_):
    scaled = {J: J * delta_phi_infinity(StatePrep(J, 0, 0)) for J in REFERENCE_J}
    ok = all(1.0 <= v <= 1.1 for v in scaled.values())
    return ok, "J*dphi_inf = " + ", ".join(f"{J}:{v:.4f}" for J, v in scaled.items()) + " (in [1.0, 1.1])"


def collapse_stats(rows):
    dms = sorted({r.delta_m for r in rows})
    spreads = {}
    for dm in dms:
        vals = np.array([r.scaled for r in rows if r.delta_m == dm])
        spreads[dm] = float((vals.max() - vals.min()) / vals.mean())
    return spreads


@_timed(4, "universal collapse and alpha fit")
def universal_collapse(threads=1, **_):
    dms = [0.25 * k for k in range(13)]
    rows = universal_sweep(REFERENCE_J, dms, threads=threads)
    spreads = collapse_stats(rows)
    worst_dm = max(spreads, key=spreads.get)
    fit = fit_alpha(rows)
    ok = spreads[worst_dm] < 0.10 and abs(fit.alpha - 2.0) <= 0.2 and fit.residual < 0.15
    return ok, (f"max spread {spreads[worst_dm]:.3f} at dm={worst_dm:g} (< 0.10); "
                f"alpha = {fit.alpha:.3f} (2.0 +- 0.2); residual = {fit.residual:.3f} (< 0.15)")


@_timed(5, "width law and tail law")
def width_law(**_):
    J, dm = 20, 3.0
    table = table_for(StatePrep(J, 0, dm))
    phi = table.grid.points
    p0 = table.row(0)
    width = dm / J
    core = np.abs(phi) <= width
    gauss = p0[table.grid.nearest_index(0.0)] * np.exp(-phi[core] ** 2 / (2 * width**2))
    core_dev = float(np.abs(p0[core] / gauss - 1).max())
    tail = (np.abs(phi) >= 0.4) & (np.abs(phi) <= 1.2)
    tail_dev = float(np.abs(p0[tail] * np.pi * J * np.abs(phi[tail]) - 1).max())
    return core_dev < 0.10 and tail_dev < 0.25, (
        f"core deviation {core_dev:.3f} (< 0.10); tail deviation {tail_dev:.3f} (< 0.25)")


@_timed(6, "delta_J insensitivity")
def delta_j_insensitivity(**_):
    (_, a), (_, b) = delta_j_sensitivity(StatePrep(10, 0, 1), [0.0, 3.0])
    change = abs(b / a - 1)
    return change < 0.03, f"dphi_inf {a:.5f} -> {b:.5f}, change {change:.3%} (< 3%)"


@_timed(7, "mismatch phenomenology")
def mismatch_phenomenology(**_):
    rows = {r.delta_m_est: r for r in modality_scan(20, 2.0, [0.5, 1, 2, 3, 4])}
    bimodal = all(rows[d].n_modes >= 2 and rows[d].peak_location != 0.0 for d in (0.5, 1))
    unimodal = all(rows[d].n_modes == 1 and rows[d].peak_location == 0.0 for d in (2, 3, 4))
    best = min(rows, key=lambda d: rows[d].std)
    detail = "; ".join(f"{d:g}: modes={r.n_modes} peak={r.peak_location:+.4f} std={r.std:.4f}"
                       for d, r in rows.items())
    return bimodal and unimodal and best == 2, detail


def chi_square_sampling(prep: StatePrep, draws: int = 100_000, seed: int = 2024):
    """(statistic, p-value) of sampled outcomes at theta = 0 against the table column."""
    table = table_for(prep)
    rng = make_rng(seed)
    counts = np.bincount([sample_outcome(table, 0.0, rng) + table.m_max for _ in range(draws)],
                         minlength=2 * table.m_max + 1)
    expected = table.column(0.0) * draws
    # pool bins with expected count < 5 into one
    small = expected < 5
    obs = np.append(counts[~small], counts[small].sum())
    exp = np.append(expected[~small], expected[small].sum())
    if exp[-1] == 0:
        obs, exp = obs[:-1], exp[:-1]
    exp *= obs.sum() / exp.sum()
    res = stats.chisquare(obs, exp)
    return float(res.statistic), float(res.pvalue)


@_timed(8, "Monte Carlo consistency")
def monte_carlo_consistency(threads=1, **_):
    pvals = [chi_square_sampling(p)[1] for p in CHI2_PREPS]
    prep = StatePrep(10, 0, 0)
    mean_std, _ = ensemble_std(prep, 0.0, 5, 200, seed=42, threads=threads)
    target = delta_phi_infinity(prep) / math.sqrt(5)
    rel = abs(mean_std / target - 1)
    ok = min(pvals) > 0.001 and rel < 0.15
    return ok, ("chi2 p-values " + ", ".join(f"{p:.3f}" for p in pvals) + " (> 0.001); "
                f"ensemble std {mean_std:.5f} vs dphi_inf/sqrt5 {target:.5f}, rel {rel:.3%} (< 15%)")


DETERMINISM_COMMANDS = [
    ["condprob", "--j", "10", "--dj", "3", "--dm", "1"],
    ["reconstruct", "--j", "10", "--dm", "1", "--n", "30", "--seed", "7", "--full-density"],
    ["sweep", "--j", "10,20", "--dm", "0:3:0.5"],
    ["mismatch", "--j", "20", "--dm", "2", "--dmest", "0.5:4:0.5"],
]


def _data_files(folder: Path):
    return sorted(p.relative_to(folder) for p in folder.rglob("*") if p.suffix in {".csv", ".json"})


@_timed(9, "determinism across runs and thread counts")
def determinism(threads=None, **_):
    from .cli import main

    cores = str(threads or os.cpu_count() or 1)
    bad = []
    with tempfile.TemporaryDirectory() as tmp:
        for cmd in DETERMINISM_COMMANDS:
            dirs = []
            for k, t in enumerate(["1", cores, "1"]):
                d = Path(tmp) / f"{cmd[0]}_{k}"
                with contextlib.redirect_stdout(io.StringIO()):
                    main(cmd + ["--out", str(d), "--threads", t])
                dirs.append(d)
            ref = _data_files(dirs[0])
            for other in dirs[1:]:
                if _data_files(other) != ref or not all(
                        filecmp.cmp(dirs[0] / f, other / f, shallow=False) for f in ref):
                    bad.append(cmd[0])
                    break
    return not bad, ("byte-identical for " + ", ".join(c[0] for c in DETERMINISM_COMMANDS)
                              if not bad else "differences in " + ", ".join(bad))


CRITERIA = [oracle_equivalence, normalization_suite, heisenberg_plateau, universal_collapse,
            width_law, delta_j_insensitivity, mismatch_phenomenology, monte_carlo_consistency,
            determinism]


def run_all(threads=None, verbose=False) -> list[Result]:
    results = []
    for check in CRITERIA:
        r = check(threads=threads)
        if verbose:
            print(r.line(), flush=True)
        results.append(r)
    return results
