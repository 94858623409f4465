"""Direct solvers for the constant-coefficient systems of the time stepper.

Each operator is diagonal in a discrete trigonometric basis:

* cell fields with Neumann mirrors: DCT-II in both directions;
* the x-velocity: DST-I across x (Dirichlet at the walls) times DCT-II
  along y (free-slip mirror), and symmetrically for the y-velocity.

In both bases the 1D five-point eigenvalues are ``-(4/h^2) sin^2(k pi / 2N)``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft

from .grid import GridSpec, MacVector

#: Neumann compatibility tolerance, scaled by ``max(1, ||rhs||_inf)``.
COMPAT_TOL = 1e-10

THREADS_ENV = "MAC_SAV_ZEC_THREADS"


class IncompatibleRHSError(ValueError):
    """Right-hand side of a pure Neumann problem has nonzero mean."""

    def __init__(self, mean: float):
        self.mean = mean
        super().__init__(f"Neumann Poisson rhs is not mean-zero: mean = {mean:.6e}")


def fft_workers() -> int | None:
    """Worker count for scipy.fft taken from ``MAC_SAV_ZEC_THREADS`` (0 = all cores)."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return None
    n = int(raw)
    return -1 if n == 0 else n


@lru_cache(maxsize=None)
def _eig_1d(n: int) -> np.ndarray:
    # k = 0..n-1 for DCT-II; DST-I uses entries 1..n-1
    h = 1.0 / n
    lam = -4.0 / h**2 * np.sin(np.arange(n) * np.pi / (2 * n)) ** 2
    lam.flags.writeable = False
    return lam


@lru_cache(maxsize=None)
def neumann_eigenvalues(n: int) -> np.ndarray:
    """2D eigenvalues of the Neumann five-point Laplacian, indexed ``[ky, kx]``."""
    lam = _eig_1d(n)
    sig = lam[:, None] + lam[None, :]
    sig.flags.writeable = False
    return sig


@lru_cache(maxsize=None)
def xvel_eigenvalues(n: int) -> np.ndarray:
    """Eigenvalues for the interior x-velocity, shape ``(N, N - 1)``."""
    lam = _eig_1d(n)
    sig = lam[:, None] + lam[None, 1:]
    sig.flags.writeable = False
    return sig


def _dct2(a: np.ndarray) -> np.ndarray:
    return fft.dctn(a, type=2, axes=(-2, -1), norm="ortho", workers=fft_workers())


def _idct2(a: np.ndarray) -> np.ndarray:
    return fft.idctn(a, type=2, axes=(-2, -1), norm="ortho", workers=fft_workers())


def _xvel_forward(a: np.ndarray) -> np.ndarray:
    w = fft_workers()
    a = fft.dct(a, type=2, axis=0, norm="ortho", workers=w)
    return fft.dst(a, type=1, axis=1, norm="ortho", workers=w)


def _xvel_inverse(a: np.ndarray) -> np.ndarray:
    w = fft_workers()
    a = fft.idst(a, type=1, axis=1, norm="ortho", workers=w)
    return fft.idct(a, type=2, axis=0, norm="ortho", workers=w)


@dataclass(frozen=True)
class PhaseOperatorSpec:
    """``L X = (lead / tau) X + epsilon^2 Delta_h^2 X`` with Neumann mirrors.

    ``lead`` is the leading coefficient of the backward difference (3/2 for
    BDF2, 1 for a backward Euler start-up step).
    """

    tau: float
    epsilon: float
    grid: GridSpec
    lead: float = 1.5

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    def symbol(self) -> np.ndarray:
        sig = neumann_eigenvalues(self.grid.n_cells)
        return self.lead / self.tau + self.epsilon**2 * sig**2


@dataclass(frozen=True)
class VelocityOperatorSpec:
    """``L V = (lead / tau) V - nu Delta_h V`` with no-penetration / free-slip."""

    tau: float
    nu: float
    grid: GridSpec
    lead: float = 1.5

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")

    def symbol(self) -> np.ndarray:
        """Symbol for the x-velocity; the y-velocity uses its transpose."""
        return self.lead / self.tau - self.nu * xvel_eigenvalues(self.grid.n_cells)


def solve_phase(spec: PhaseOperatorSpec, rhs: np.ndarray) -> np.ndarray:
    """Solve ``L_phi X = rhs`` for a cell field (or a stack of them)."""
    return _idct2(_dct2(rhs) / spec.symbol())


def solve_velocity(spec: VelocityOperatorSpec, rhs: MacVector) -> MacVector:
    """Solve ``L_u V = rhs``; rhs values on the wall-normal boundary edges are ignored."""
    sym = spec.symbol()
    out = spec.grid.zeros_mac()
    out.x[:, 1:-1] = _xvel_inverse(_xvel_forward(rhs.x[:, 1:-1]) / sym)
    # the y-velocity problem is the x-velocity problem transposed
    out.y[1:-1, :] = _xvel_inverse(_xvel_forward(rhs.y[1:-1, :].T) / sym).T
    return out


def solve_poisson_neumann(rhs: np.ndarray) -> np.ndarray:
    """Mean-zero solution of ``Delta_h psi = rhs`` with Neumann mirrors.

    Raises :class:`IncompatibleRHSError` if the mean of ``rhs`` exceeds
    ``COMPAT_TOL * max(1, ||rhs||_inf)``; a compatible rhs has its roundoff
    mean removed.
    """
    n = rhs.shape[0]
    mean = float(np.mean(rhs))
    scale = max(1.0, float(np.max(np.abs(rhs))))
    if abs(mean) > COMPAT_TOL * scale:
        raise IncompatibleRHSError(mean)
    coef = _dct2(rhs)
    sig = neumann_eigenvalues(n).copy()
    sig[0, 0] = 1.0
    coef /= sig
    coef[0, 0] = 0.0
    psi = _idct2(coef)
    return psi - np.mean(psi)
