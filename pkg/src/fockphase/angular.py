"""Rotation kernels <J,m'|exp(i phi J_y)|J,m> for integer J.

The kernel is evaluated through the eigensystem of J_x, which is a real
symmetric tridiagonal matrix with exactly known integer eigenvalues.  Since
J_y = exp(-i pi J_z / 2) J_x exp(i pi J_z / 2), the y-rotation is the x-rotation
dressed with diagonal phases, and those phases collapse to signs once the
real part is taken.  This stays orthogonal to machine precision well beyond
J = 200, where factorial closed forms overflow.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import jv

__all__ = [
    "Representation",
    "RotationKernel",
    "rotation_kernel",
    "rotation_columns",
    "matrix_exponential_oracle",
    "pure_cond_prob",
    "bessel_approx_cond_prob",
    "ORACLE_MAX_J",
]

ORACLE_MAX_J = 8


def check_spin(J) -> int:
    if isinstance(J, bool) or not isinstance(J, numbers.Integral):
        raise ValueError(f"J must be a non-negative integer, got {J!r}")
    J = int(J)
    if J < 0:
        raise ValueError(f"J must be a non-negative integer, got {J}")
    return J


def _check_phi(phi) -> float:
    phi = float(phi)
    if not math.isfinite(phi):
        raise ValueError(f"phi must be finite, got {phi}")
    return phi


@dataclass(frozen=True)
class Representation:
    """Spin-J irrep of dimension 2J + 1 (N = 2J particles)."""

    J: int

    def __post_init__(self):
        object.__setattr__(self, "J", check_spin(self.J))

    @property
    def dim(self) -> int:
        return 2 * self.J + 1

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(-self.J, self.J + 1)

    def index(self, m: int) -> int:
        if abs(m) > self.J:
            raise ValueError(f"|m| = {abs(m)} exceeds J = {self.J}")
        return int(m) + self.J


@dataclass(frozen=True)
class RotationKernel:
    """Matrix D[m', m] at a single phase, rows and columns ordered m = -J..J."""

    J: int
    phi: float
    D: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return 2 * self.J + 1

    def element(self, m_out: int, m_in: int) -> float:
        return float(self.D[m_out + self.J, m_in + self.J])


@lru_cache(maxsize=256)
def _jx_eigensystem(J: int):
    """Eigenvectors of J_x with the exact eigenvalues -J..J.

    eigh_tridiagonal returns ascending eigenvalues, which for J_x are the
    integers -J..J; the computed values are replaced by the exact ones.
    """
    m = np.arange(-J, J + 1, dtype=float)
    if J == 0:
        return np.zeros(1), np.ones((1, 1))
    off = 0.5 * np.sqrt(J * (J + 1) - m[:-1] * (m[:-1] + 1))
    lam, V = eigh_tridiagonal(np.zeros(2 * J + 1), off)
    exact = np.arange(-J, J + 1, dtype=float)
    if np.max(np.abs(lam - exact)) > 1e-8:
        raise ArithmeticError(f"J_x spectrum off integers for J={J}")
    V.setflags(write=False)
    return exact, V


def _phase_signs(J: int, m_in: int):
    """Sign and parity pattern of exp(-i pi (m' - m) / 2) over all m'.

    Returns (even_mask, sign): for even m' - m the real part picks the cosine
    sum times (-1)^((m'-m)/2); for odd the sine sum times (-1)^((m'-m-1)/2).
    """
    s = np.arange(-J, J + 1) - m_in
    even = s % 2 == 0
    sign = np.where(even, (-1.0) ** (s // 2), (-1.0) ** ((s - 1) // 2))
    return even, sign


def rotation_columns(J: int, phis, m_in_values) -> np.ndarray:
    """Columns D(phi)[:, m_in] for many phases at once.

    Returns an array of shape (len(m_in_values), len(phis), 2J + 1) holding
    <J,m'|exp(i phi J_y)|J,m_in> indexed [column, phase, m' + J].
    """
    J = check_spin(J)
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    if not np.all(np.isfinite(phis)):
        raise ValueError("phi must be finite")
    lam, V = _jx_eigensystem(J)
    arg = np.outer(phis, lam)
    cos, sin = np.cos(arg), np.sin(arg)
    out = np.empty((len(m_in_values), len(phis), 2 * J + 1))
    for k, m_in in enumerate(m_in_values):
        if abs(m_in) > J:
            raise ValueError(f"|m| = {abs(m_in)} exceeds J = {J}")
        v = V[m_in + J]
        c = (cos * v) @ V.T
        s = (sin * v) @ V.T
        even, sign = _phase_signs(J, int(m_in))
        out[k] = np.where(even, c, s) * sign
    return out


def rotation_kernel(J: int, phi: float) -> RotationKernel:
    """Full (2J+1) x (2J+1) matrix of exp(i phi J_y) in the |J,m> basis."""
    J = check_spin(J)
    phi = _check_phi(phi)
    if phi == 0.0:
        D = np.eye(2 * J + 1)
    else:
        lam, V = _jx_eigensystem(J)
        c = (V * np.cos(phi * lam)) @ V.T
        s = (V * np.sin(phi * lam)) @ V.T
        d = np.arange(-J, J + 1)
        diff = d[:, None] - d[None, :]
        even = diff % 2 == 0
        sign = np.where(even, (-1.0) ** (diff // 2), (-1.0) ** ((diff - 1) // 2))
        D = np.where(even, c, s) * sign
    D.setflags(write=False)
    return RotationKernel(J, phi, D)


def _jy_matrix(J: int) -> np.ndarray:
    d = 2 * J + 1
    m = np.arange(-J, J + 1)
    Jy = np.zeros((d, d), dtype=complex)
    for i in range(d - 1):
        c = math.sqrt(J * (J + 1) - m[i] * (m[i] + 1))
        # <m+1|J_y|m> = -(i/2) c,  <m|J_y|m+1> = +(i/2) c
        Jy[i + 1, i] = -0.5j * c
        Jy[i, i + 1] = 0.5j * c
    return Jy


def _expm_series(A: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(A, 1)
    squarings = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    B = A / 2.0**squarings
    term = np.eye(A.shape[0], dtype=A.dtype)
    total = term.copy()
    for k in range(1, 60):
        term = term @ B / k
        total = total + term
        if np.abs(term).max() < 1e-18:
            break
    for _ in range(squarings):
        total = total @ total
    return total


def matrix_exponential_oracle(J: int, phi: float) -> RotationKernel:
    """Brute-force exp(i phi J_y) from ladder elements, for J <= 8 only."""
    J = check_spin(J)
    phi = _check_phi(phi)
    if J > ORACLE_MAX_J:
        raise ValueError(f"oracle restricted to J <= {ORACLE_MAX_J}, got {J}")
    U = _expm_series(1j * phi * _jy_matrix(J))
    if np.abs(U.imag).max() > 1e-12:
        raise ArithmeticError("rotation about y should be real in the J_z basis")
    D = np.ascontiguousarray(U.real)
    D.setflags(write=False)
    return RotationKernel(J, phi, D)


def _check_m(J: int, *ms):
    for m in ms:
        if abs(m) > J:
            raise ValueError(f"|m| = {abs(m)} exceeds J = {J}")


def pure_cond_prob(J: int, m0: int, m: int, phi: float) -> float:
    """P(m | phi) for the pure input |J, m0>, i.e. D[m, m0]^2."""
    J = check_spin(J)
    _check_m(J, m0, m)
    col = rotation_columns(J, [_check_phi(phi)], [m0])[0, 0]
    return float(col[m + J] ** 2)


def bessel_approx_cond_prob(J: int, m0: int, m: int, phi: float) -> float:
    """Small-angle approximation J_{m0-m}(J phi)^2 of pure_cond_prob."""
    J = check_spin(J)
    _check_m(J, m0, m)
    return float(jv(m0 - m, J * _check_phi(phi)) ** 2)
