"""Staggered (MAC) grid containers and ghost-cell fills on the unit square.

Storage convention: every field is a plain ``float64`` array indexed
``a[j, i]`` (y index slow, x index fast).

==========  ==============  =================================
placement   shape           entry ``a[j, i]`` samples f at
==========  ==============  =================================
cell        ``(N, N)``      ``((i + 1/2) h, (j + 1/2) h)``
x-edge      ``(N, N + 1)``  ``(i h, (j + 1/2) h)``
y-edge      ``(N + 1, N)``  ``((i + 1/2) h, j h)``
==========  ==============  =================================

Ghost fills return padded copies with one extra layer per side.  Corner
ghosts are never used by any stencil; they are set to NaN so an
accidental read poisons the result instead of passing silently.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

#: Tolerance on caller-supplied normal velocity at the boundary.
NORMAL_BC_TOL = 1e-14


class BoundaryConditionError(ValueError):
    """Raised when a velocity field violates no-penetration on input."""


class Placement(enum.IntEnum):
    CELL = 0
    XEDGE = 1
    YEDGE = 2


@dataclass(frozen=True)
class GridSpec:
    """Uniform ``N x N`` MAC mesh on (0, 1)^2."""

    n_cells: int

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise ValueError(f"n_cells must be an integer >= 2, got {self.n_cells!r}")
        object.__setattr__(self, "n_cells", int(self.n_cells))

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    def shape(self, placement: Placement) -> tuple[int, int]:
        n = self.n_cells
        return {
            Placement.CELL: (n, n),
            Placement.XEDGE: (n, n + 1),
            Placement.YEDGE: (n + 1, n),
        }[Placement(placement)]

    def coords(self, placement: Placement) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X, Y)`` coordinate arrays for the given placement."""
        n, h = self.n_cells, self.h
        centers = (np.arange(n) + 0.5) * h
        nodes = np.arange(n + 1) * h
        xs, ys = {
            Placement.CELL: (centers, centers),
            Placement.XEDGE: (nodes, centers),
            Placement.YEDGE: (centers, nodes),
        }[Placement(placement)]
        return np.meshgrid(xs, ys, indexing="xy")

    def zeros(self, placement: Placement = Placement.CELL) -> np.ndarray:
        return np.zeros(self.shape(placement))

    def zeros_mac(self) -> MacVector:
        return MacVector(self.zeros(Placement.XEDGE), self.zeros(Placement.YEDGE))

    def sample(self, func, placement: Placement = Placement.CELL) -> np.ndarray:
        """Evaluate ``func(x, y)`` at the points of a placement."""
        X, Y = self.coords(placement)
        return np.asarray(func(X, Y), dtype=float) * np.ones_like(X)

    def placement_of(self, a: np.ndarray) -> Placement:
        for p in Placement:
            if a.shape == self.shape(p):
                return p
        raise ValueError(f"array of shape {a.shape} is not a field on a {self.n_cells}^2 grid")


@dataclass
class MacVector:
    """Staggered velocity: ``x`` on east-west edges, ``y`` on north-south edges."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        n = self.x.shape[0]
        if self.x.shape != (n, n + 1) or self.y.shape != (n + 1, n):
            raise ValueError(
                f"inconsistent MAC component shapes {self.x.shape} and {self.y.shape}"
            )

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.x.shape[0])

    def copy(self) -> MacVector:
        return MacVector(self.x.copy(), self.y.copy())

    def __add__(self, other: MacVector) -> MacVector:
        return MacVector(self.x + other.x, self.y + other.y)

    def __sub__(self, other: MacVector) -> MacVector:
        return MacVector(self.x - other.x, self.y - other.y)

    def __mul__(self, c: float) -> MacVector:
        return MacVector(self.x * c, self.y * c)

    __rmul__ = __mul__

    def __neg__(self) -> MacVector:
        return MacVector(-self.x, -self.y)

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(self.x))), float(np.max(np.abs(self.y))))

    def isfinite(self) -> bool:
        return bool(np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y)))


def neumann_ghost_fill(f: np.ndarray) -> np.ndarray:
    """Pad a cell field with homogeneous-Neumann mirror ghosts.

    Returns an ``(N + 2, N + 2)`` array; ``P[j + 1, i + 1] == f[j, i]``.
    """
    n = f.shape[0]
    if f.shape != (n, n):
        raise ValueError(f"expected a square cell field, got shape {f.shape}")
    P = np.empty((n + 2, n + 2))
    P[1:-1, 1:-1] = f
    P[1:-1, 0] = f[:, 0]
    P[1:-1, -1] = f[:, -1]
    P[0, 1:-1] = f[0, :]
    P[-1, 1:-1] = f[-1, :]
    P[0, 0] = P[0, -1] = P[-1, 0] = P[-1, -1] = np.nan
    return P


def _check_normal(name: str, values: np.ndarray) -> None:
    worst = float(np.max(np.abs(values)))
    if worst > NORMAL_BC_TOL:
        raise BoundaryConditionError(
            f"{name} normal boundary values must vanish, max |value| = {worst:.3e}"
        )


def velocity_ghost_fill(v: MacVector) -> tuple[np.ndarray, np.ndarray]:
    """Pad both velocity components with no-penetration / free-slip ghosts.

    The normal direction gets the odd (homogeneous Dirichlet) reflection
    ``f_{-1} = -f_{1}``, which reproduces the boundary reductions of the
    long-stencil difference; the tangential direction gets the free-slip
    mirror ``f_{-1/2} = f_{1/2}``.  Boundary normal values are checked to
    be zero and then stored as exact zeros.

    Returns ``(PX, PY)`` with shapes ``(N + 2, N + 3)`` and ``(N + 3, N + 2)``,
    offset by one in each direction from the unpadded indices.
    """
    ux, uy = v.x, v.y
    n = ux.shape[0]
    _check_normal("x-velocity", ux[:, [0, -1]])
    _check_normal("y-velocity", uy[[0, -1], :])

    PX = np.empty((n + 2, n + 3))
    PX[1:-1, 1:-1] = ux
    PX[1:-1, 1] = 0.0
    PX[1:-1, -2] = 0.0
    PX[1:-1, 0] = -PX[1:-1, 2]
    PX[1:-1, -1] = -PX[1:-1, -3]
    PX[0, 1:-1] = PX[1, 1:-1]
    PX[-1, 1:-1] = PX[-2, 1:-1]
    PX[0, [0, -1]] = PX[-1, [0, -1]] = np.nan

    PY = np.empty((n + 3, n + 2))
    PY[1:-1, 1:-1] = uy
    PY[1, 1:-1] = 0.0
    PY[-2, 1:-1] = 0.0
    PY[0, 1:-1] = -PY[2, 1:-1]
    PY[-1, 1:-1] = -PY[-3, 1:-1]
    PY[1:-1, 0] = PY[1:-1, 1]
    PY[1:-1, -1] = PY[1:-1, -2]
    PY[[0, -1], 0] = PY[[0, -1], -1] = np.nan
    return PX, PY


def strip_ghosts(P: np.ndarray) -> np.ndarray:
    """Inverse of a ghost fill: drop the outer layer."""
    return P[1:-1, 1:-1].copy()


def enforce_no_penetration(v: MacVector) -> MacVector:
    """Return a copy with the boundary normal components set to exactly zero."""
    out = v.copy()
    out.x[:, [0, -1]] = 0.0
    out.y[[0, -1], :] = 0.0
    return out


def cell_average(f: np.ndarray) -> float:
    """Discrete average ``<f, 1>_c = h^2 sum f`` (|Omega| = 1)."""
    n = f.shape[0]
    return float(np.sum(f)) / (n * n)
