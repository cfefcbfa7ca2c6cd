"""Incoherent Gaussian mixtures of |J', m> states."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["StatePrep", "MixtureWeights", "build_mixture", "marginal_m_std",
           "marginal_j_mean", "TRUNCATION_SIGMAS"]

TRUNCATION_SIGMAS = 4


@dataclass(frozen=True)
class StatePrep:
    """Preparation parameters: mean total spin, its spread, and the imbalance spread."""

    J_mean: int
    delta_J: float = 0.0
    delta_m: float = 0.0

    def __post_init__(self):
        if isinstance(self.J_mean, bool) or int(self.J_mean) != self.J_mean:
            raise ValueError(f"J_mean must be an integer, got {self.J_mean!r}")
        if self.J_mean < 1:
            raise ValueError(f"J_mean must be >= 1, got {self.J_mean}")
        for name in ("delta_J", "delta_m"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be a finite non-negative number, got {v}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "J_mean", int(self.J_mean))

    def with_delta_m(self, delta_m: float) -> "StatePrep":
        return StatePrep(self.J_mean, self.delta_J, delta_m)

    def as_dict(self) -> dict:
        return {"J_mean": self.J_mean, "delta_J": self.delta_J, "delta_m": self.delta_m}


@dataclass(frozen=True)
class MixtureWeights:
    """Weights P_{J',m} on the truncated support, flattened into parallel arrays."""

    prep: StatePrep
    J: np.ndarray = field(repr=False)
    m: np.ndarray = field(repr=False)
    weight: np.ndarray = field(repr=False)

    @property
    def entries(self) -> list[tuple[int, int, float]]:
        return [(int(j), int(m), float(w)) for j, m, w in zip(self.J, self.m, self.weight)]

    @property
    def J_range(self) -> tuple[int, int]:
        return int(self.J.min()), int(self.J.max())

    @property
    def m_range(self) -> tuple[int, int]:
        mm = int(np.abs(self.m).max())
        return -mm, mm

    def components(self):
        """Yield (J', m0 array, weight array) grouped by total spin."""
        for j in np.unique(self.J):
            sel = self.J == j
            yield int(j), self.m[sel], self.weight[sel]


def _window(sigma: float, extra: int = 0) -> int:
    return math.ceil(TRUNCATION_SIGMAS * sigma) + extra if sigma > 0 else 0


def _gauss(x: int, sigma: float) -> float:
    # x / sigma first so a tiny sigma underflows to weight 0 instead of dividing by 0
    r = x / sigma
    return math.exp(-0.5 * r * r)


def build_mixture(prep: StatePrep) -> MixtureWeights:
    """Product-Gaussian weights over valid (J', m), truncated at 4 sigma and renormalized.

    A zero width collapses that factor to a Kronecker delta (J' = J_mean, or
    m = 0).  The m window is |m| <= min(J', ceil(4 delta_m) + 1).
    """
    kJ = _window(prep.delta_J)
    km = _window(prep.delta_m, extra=1)
    Js, ms, ws = [], [], []
    for j in range(max(0, prep.J_mean - kJ), prep.J_mean + kJ + 1):
        wj = 1.0 if prep.delta_J == 0 else _gauss(j - prep.J_mean, prep.delta_J)
        top = min(j, km)
        for m in range(-top, top + 1):
            wm = 1.0 if prep.delta_m == 0 else _gauss(m, prep.delta_m)
            Js.append(j)
            ms.append(m)
            ws.append(wj * wm)
    total = math.fsum(ws)
    if not Js or total <= 0:
        raise ValueError(f"empty truncation window for {prep}")
    weight = np.array(ws) / total
    arrays = [np.array(Js), np.array(ms), weight]
    for a in arrays:
        a.setflags(write=False)
    return MixtureWeights(prep, *arrays)


def marginal_m_std(w: MixtureWeights) -> float:
    """Realized standard deviation of the number-imbalance marginal."""
    mean = float(np.dot(w.weight, w.m))
    return math.sqrt(max(float(np.dot(w.weight, (w.m - mean) ** 2)), 0.0))


def marginal_j_mean(w: MixtureWeights) -> float:
    return float(np.dot(w.weight, w.J))
