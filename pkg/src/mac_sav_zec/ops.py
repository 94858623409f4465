"""Discrete difference, averaging, nonlinear and inner-product operators.

All functions are pure and return freshly allocated arrays.  Cell fields
are assumed to carry homogeneous Neumann ghosts and velocities the
no-penetration / free-slip ghosts of :mod:`mac_sav_zec.grid`.
"""

from __future__ import annotations

import numpy as np

from .grid import (
    MacVector,
    Placement,
    GridSpec,
    neumann_ghost_fill,
    velocity_ghost_fill,
)

#: Mean-zero tolerance for the H^{-1} norm.
MEAN_ZERO_TOL = 1e-12


def _h(a: np.ndarray) -> float:
    return 1.0 / a.shape[0]


# -- gradients and divergence ---------------------------------------------


def grad_cell(f: np.ndarray) -> MacVector:
    """Centered gradient of a cell field onto the MAC edges.

    Boundary edges are zero (Neumann mirror).
    """
    h = _h(f)
    P = neumann_ghost_fill(f)
    gx = (P[1:-1, 1:] - P[1:-1, :-1]) / h
    gy = (P[1:, 1:-1] - P[:-1, 1:-1]) / h
    gx[:, [0, -1]] = 0.0
    gy[[0, -1], :] = 0.0
    return MacVector(gx, gy)


def div_mac(v: MacVector) -> np.ndarray:
    """Cell-centered divergence ``D^ew_x v^x + D^ns_y v^y``."""
    h = _h(v.x)
    return (v.x[:, 1:] - v.x[:, :-1]) / h + (v.y[1:, :] - v.y[:-1, :]) / h


def laplacian_5pt(f):
    """Five-point Laplacian for a cell field, edge field or :class:`MacVector`."""
    if isinstance(f, MacVector):
        PX, PY = velocity_ghost_fill(f)
        return MacVector(_five_point(PX), _five_point(PY))
    grid = GridSpec(f.shape[0])
    placement = grid.placement_of(f)
    if placement is Placement.CELL:
        return _five_point(neumann_ghost_fill(f))
    # a single edge component: pair it with zeros to reuse the velocity fill
    zero = grid.zeros_mac()
    if placement is Placement.XEDGE:
        return laplacian_5pt(MacVector(f, zero.y)).x
    return laplacian_5pt(MacVector(zero.x, f)).y


def _five_point(P: np.ndarray) -> np.ndarray:
    h = 1.0 / (min(P.shape) - 2)
    c = P[1:-1, 1:-1]
    return (P[1:-1, 2:] + P[1:-1, :-2] + P[2:, 1:-1] + P[:-2, 1:-1] - 4.0 * c) / (h * h)


# -- averaging -----------------------------------------------------------


def avg_x(f: np.ndarray) -> np.ndarray:
    """Cell -> x-edge average, ``(f_{i-1/2} + f_{i+1/2}) / 2``."""
    P = neumann_ghost_fill(f)
    return 0.5 * (P[1:-1, :-1] + P[1:-1, 1:])


def avg_y(f: np.ndarray) -> np.ndarray:
    """Cell -> y-edge average."""
    P = neumann_ghost_fill(f)
    return 0.5 * (P[:-1, 1:-1] + P[1:, 1:-1])


def avg_xy(v: MacVector) -> tuple[np.ndarray, np.ndarray]:
    """Four-point cross averages.

    Returns ``(A_xy v^y on x-edges, A_xy v^x on y-edges)``.
    """
    PX, PY = velocity_ghost_fill(v)
    # v^y around the x-edge (i, j+1/2): cells i-1/2, i+1/2 on rows j, j+1
    rows = PY[1:-1, :]
    ay_on_x = 0.25 * (rows[:-1, :-1] + rows[:-1, 1:] + rows[1:, :-1] + rows[1:, 1:])
    cols = PX[:, 1:-1]
    ax_on_y = 0.25 * (cols[:-1, :-1] + cols[:-1, 1:] + cols[1:, :-1] + cols[1:, 1:])
    return ay_on_x, ax_on_y


# -- nonlinear terms -------------------------------------------------------


def advect_velocity(u: MacVector, v: MacVector) -> MacVector:
    """Centered advection ``u . grad_h v`` using the long-stencil differences."""
    h = _h(u.x)
    VX, VY = velocity_ghost_fill(v)
    ay_on_x, ax_on_y = avg_xy(u)
    dx_vx = (VX[1:-1, 2:] - VX[1:-1, :-2]) / (2 * h)
    dy_vx = (VX[2:, 1:-1] - VX[:-2, 1:-1]) / (2 * h)
    dx_vy = (VY[1:-1, 2:] - VY[1:-1, :-2]) / (2 * h)
    dy_vy = (VY[2:, 1:-1] - VY[:-2, 1:-1]) / (2 * h)
    return MacVector(u.x * dx_vx + ay_on_x * dy_vx, ax_on_y * dx_vy + u.y * dy_vy)


def mu_grad_phi(mu: np.ndarray, phi: np.ndarray) -> MacVector:
    """Surface-tension term ``(D^c phi) (A mu)`` on the MAC edges."""
    g = grad_cell(phi)
    return MacVector(g.x * avg_x(mu), g.y * avg_y(mu))


def div_phi_u(phi: np.ndarray, u: MacVector) -> np.ndarray:
    """Conservative flux divergence ``div_h(phi u)`` at cell centers."""
    return div_mac(MacVector(u.x * avg_x(phi), u.y * avg_y(phi)))


# -- inner products and norms ----------------------------------------------


def inner_cell(f: np.ndarray, g: np.ndarray) -> float:
    h = _h(f)
    return float(np.sum(f * g)) * h * h


def inner_xedge(f: np.ndarray, g: np.ndarray) -> float:
    # boundary edge lines i = 0, N are excluded
    h = _h(f)
    return float(np.sum(f[:, 1:-1] * g[:, 1:-1])) * h * h


def inner_yedge(f: np.ndarray, g: np.ndarray) -> float:
    h = _h(f.T)
    return float(np.sum(f[1:-1, :] * g[1:-1, :])) * h * h


def inner_mac(u: MacVector, v: MacVector) -> float:
    return inner_xedge(u.x, v.x) + inner_yedge(u.y, v.y)


def inner(a, b) -> float:
    """Placement-dispatching discrete l2 inner product."""
    if isinstance(a, MacVector):
        return inner_mac(a, b)
    p = GridSpec(a.shape[0]).placement_of(a)
    return {
        Placement.CELL: inner_cell,
        Placement.XEDGE: inner_xedge,
        Placement.YEDGE: inner_yedge,
    }[p](a, b)


def _interior_values(a) -> np.ndarray:
    if isinstance(a, MacVector):
        return np.concatenate([a.x[:, 1:-1].ravel(), a.y[1:-1, :].ravel()])
    p = GridSpec(a.shape[0]).placement_of(a)
    if p is Placement.XEDGE:
        return a[:, 1:-1].ravel()
    if p is Placement.YEDGE:
        return a[1:-1, :].ravel()
    return a.ravel()


def norm(a, p: float = 2) -> float:
    """h^2-weighted discrete l^p norm (same point sets as :func:`inner`)."""
    vals = np.abs(_interior_values(a))
    n = a.x.shape[0] if isinstance(a, MacVector) else a.shape[0]
    if np.isinf(p):
        return float(np.max(vals))
    return float((np.sum(vals**p) / (n * n)) ** (1.0 / p))


def norm_inf(a) -> float:
    if isinstance(a, MacVector):
        return a.max_abs()
    return float(np.max(np.abs(a)))


def grad_norm_sq(a) -> float:
    """``||grad_h a||_2^2`` for a cell field or a MAC velocity.

    For a velocity, each component's x/y differences are taken onto the
    staggered locations between its samples; differences across the
    free-slip mirror vanish and so do not appear.
    """
    if not isinstance(a, MacVector):
        g = grad_cell(a)
        return inner_mac(g, g)
    ux, uy = a.x, a.y
    s = np.sum(np.diff(ux, axis=1) ** 2)  # D_x u^x at cell centers
    s += np.sum(np.diff(ux[:, 1:-1], axis=0) ** 2)  # D_y u^x at interior nodes
    s += np.sum(np.diff(uy, axis=0) ** 2)
    s += np.sum(np.diff(uy[1:-1, :], axis=1) ** 2)
    return float(s)  # h^2 weight cancels the 1/h^2 of the differences


def norm_h1m(f: np.ndarray) -> float:
    """Discrete H^{-1} norm ``sqrt(<f, (-Delta_h)^{-1} f>_c)`` of a mean-zero field."""
    from .fastsolve import solve_poisson_neumann

    mean = float(np.mean(f))
    if abs(mean) > MEAN_ZERO_TOL:
        raise ValueError(f"norm_h1m needs a mean-zero field, got mean {mean:.3e}")
    psi = solve_poisson_neumann(f)
    return float(np.sqrt(max(-inner_cell(f, psi), 0.0)))
