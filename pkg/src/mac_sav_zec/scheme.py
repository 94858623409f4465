"""Linear, decoupled BDF2 SAV-ZEC time stepper for Cahn-Hilliard-Navier-Stokes.

One step advances ``(phi, u, p, r, q)`` by

1. extrapolating star profiles ``f* = 2 f^n - f^{n-1}``;
2. solving the coupled ``(phi^{n+1}, u_hat, r^{n+1}, q^{n+1})`` system by
   superposition: three phase solves, two velocity solves and a 2x2 linear
   system for the two scalars;
3. projecting ``u_hat`` onto discretely divergence-free fields with a
   pressure-increment Poisson solve.

Only constant-coefficient solves from :mod:`mac_sav_zec.fastsolve` are used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import ops
from .fastsolve import (
    PhaseOperatorSpec,
    VelocityOperatorSpec,
    solve_phase,
    solve_poisson_neumann,
    solve_velocity,
)
from .grid import GridSpec, MacVector, cell_average, velocity_ghost_fill

DIV_TOL = 1e-10
MASS_TOL = 1e-12
ENERGY_RTOL = 1e-10

STARTUPS = ("copy_level", "first_order_step")


class SingularClosureError(RuntimeError):
    pass


class SchemeInvariantError(RuntimeError):
    """A step broke mass conservation, incompressibility or energy decay."""


@dataclass(frozen=True)
class Params:
    """Physical and numerical parameters; ``lam`` is the mixing energy density."""

    epsilon: float
    nu: float
    lam: float
    tau: float
    n_cells: int
    t_end: float

    def __post_init__(self):
        for name in ("epsilon", "nu", "lam", "tau", "t_end"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        GridSpec(self.n_cells)

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.n_cells)

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_end / self.tau + 1e-9))


@dataclass
class SimState:
    phi_n: np.ndarray
    phi_nm1: np.ndarray
    u_n: MacVector
    u_nm1: MacVector
    p_n: np.ndarray
    r_n: float
    r_nm1: float
    q_n: float
    q_nm1: float
    step: int = 0
    time: float = 0.0

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.phi_n.shape[0])

    def copy(self) -> SimState:
        return replace(
            self,
            phi_n=self.phi_n.copy(),
            phi_nm1=self.phi_nm1.copy(),
            u_n=self.u_n.copy(),
            u_nm1=self.u_nm1.copy(),
            p_n=self.p_n.copy(),
        )


@dataclass
class StepWork:
    """Transient per-step quantities (star profiles and superposition parts)."""

    order: int
    phi_star: np.ndarray
    u_star: MacVector
    mu_tilde_star: np.ndarray
    e1h_star: float
    b_star: np.ndarray
    phi_0: np.ndarray | None = None
    phi_r: np.ndarray | None = None
    phi_q: np.ndarray | None = None
    u_hat_0: MacVector | None = None
    u_hat_q: MacVector | None = None
    mu_tilde_np1: np.ndarray | None = None
    closure_matrix: np.ndarray | None = field(default=None, repr=False)


@dataclass
class StepRecord:
    """Everything produced inside one step, for residual and identity checks."""

    work: StepWork
    phi_np1: np.ndarray
    u_hat: MacVector
    r_np1: float
    q_np1: float
    u_np1: MacVector
    p_np1: np.ndarray
    dp: np.ndarray


def _bdf(order: int) -> tuple[float, float, float]:
    """``(lead, c_n, c_nm1)`` such that the time difference is
    ``(lead f^{n+1} - c_n f^n - c_nm1 f^{n-1}) / tau``."""
    if order == 2:
        return 1.5, 2.0, -0.5
    if order == 1:
        return 1.0, 1.0, 0.0
    raise ValueError(f"order must be 1 or 2, got {order}")


def compute_e1h(phi: np.ndarray) -> float:
    """Discrete ``E_1(phi) = <phi^4/4 - phi^2/2 + 5/4, 1>_c``; always >= 1."""
    return cell_average(0.25 * phi**4 - 0.5 * phi**2 + 1.25)


def default_initial_phase(grid: GridSpec) -> np.ndarray:
    return grid.sample(
        lambda x, y: 0.1 * np.cos(np.pi * x) * np.cos(np.pi * y)
        + 0.05 * np.cos(2 * np.pi * x) * np.cos(3 * np.pi * y)
    )


def random_initial_phase(grid: GridSpec, seed: int, amplitude: float = 0.1, modes: int = 4):
    """Smooth random cosine series with ``modes`` wavenumbers per direction."""
    rng = np.random.default_rng(seed)
    coef = rng.standard_normal((modes + 1, modes + 1))
    k = np.arange(modes + 1)
    coef /= 1.0 + k[:, None] ** 2 + k[None, :] ** 2
    coef[0, 0] = 0.0
    X, Y = grid.coords(0)
    phi = np.zeros_like(X)
    for ky in range(modes + 1):
        for kx in range(modes + 1):
            phi += coef[ky, kx] * np.cos(kx * np.pi * X) * np.cos(ky * np.pi * Y)
    return amplitude * phi / np.max(np.abs(phi))


def init_state(phi0: np.ndarray, u0: MacVector | None = None) -> SimState:
    """Start from ``(phi0, u0)`` with ``p = 0``, ``r = sqrt(E_1h)``, ``q = 1``.

    Level ``n - 1`` is a copy of level ``n``.
    """
    phi0 = np.array(phi0, dtype=float)
    grid = GridSpec(phi0.shape[0])
    u0 = grid.zeros_mac() if u0 is None else u0.copy()
    if not np.all(np.isfinite(phi0)):
        raise ValueError("initial phase field is not finite")
    velocity_ghost_fill(u0)
    max_div = ops.norm_inf(ops.div_mac(u0))
    if max_div > DIV_TOL:
        raise ValueError(f"initial velocity is not discretely solenoidal: max |div u| = {max_div:.3e}")
    r0 = math.sqrt(compute_e1h(phi0))
    return SimState(
        phi_n=phi0,
        phi_nm1=phi0.copy(),
        u_n=u0,
        u_nm1=u0.copy(),
        p_n=np.zeros_like(phi0),
        r_n=r0,
        r_nm1=r0,
        q_n=1.0,
        q_nm1=1.0,
    )


def assemble_star(state: SimState, params: Params, order: int = 2) -> StepWork:
    if order == 2:
        phi_star = 2.0 * state.phi_n - state.phi_nm1
        u_star = 2.0 * state.u_n - state.u_nm1
    else:
        phi_star = state.phi_n.copy()
        u_star = state.u_n.copy()
    if not np.all(np.isfinite(phi_star)):
        raise FloatingPointError(f"non-finite extrapolated phase at step {state.step}")
    nonlin = phi_star**3 - phi_star
    mu_tilde_star = nonlin - params.epsilon**2 * ops.laplacian_5pt(phi_star)
    e1h = compute_e1h(phi_star)
    return StepWork(
        order=order,
        phi_star=phi_star,
        u_star=u_star,
        mu_tilde_star=mu_tilde_star,
        e1h_star=e1h,
        b_star=nonlin / math.sqrt(e1h),
    )


def _histories(state: SimState, order: int):
    _, c_n, c_nm1 = _bdf(order)
    return (
        c_n * state.phi_n + c_nm1 * state.phi_nm1,
        c_n * state.u_n + c_nm1 * state.u_nm1,
        c_n * state.r_n + c_nm1 * state.r_nm1,
        c_n * state.q_n + c_nm1 * state.q_nm1,
    )


def solve_coupled(state: SimState, work: StepWork, params: Params):
    """Solve for ``(phi^{n+1}, u_hat, r^{n+1}, q^{n+1})``; fills the superposition parts of ``work``."""
    order = work.order
    lead = _bdf(order)[0]
    tau, eps, lam = params.tau, params.epsilon, params.lam
    grid = state.grid
    hist_phi, hist_u, hist_r, hist_q = _histories(state, order)

    # phase: phi = phi_0 + r phi_r + q phi_q
    adv_phi = ops.div_phi_u(work.phi_star, work.u_star)
    rhs = np.stack([hist_phi / tau, ops.laplacian_5pt(work.b_star), -adv_phi])
    phi_0, phi_r, phi_q = solve_phase(PhaseOperatorSpec(tau, eps, grid, lead), rhs)

    # momentum: u_hat = u_hat_0 + q u_hat_q
    vspec = VelocityOperatorSpec(tau, params.nu, grid, lead)
    tension = ops.mu_grad_phi(work.mu_tilde_star, work.phi_star)
    adv_u = ops.advect_velocity(work.u_star, work.u_star)
    u_hat_0 = solve_velocity(vspec, hist_u * (1.0 / tau) - ops.grad_cell(state.p_n))
    u_hat_q = solve_velocity(vspec, lam * tension - adv_u)

    # mu_tilde^{n+1} = M_0 + r M_r + q M_q
    b = work.b_star
    M_0 = -eps**2 * ops.laplacian_5pt(phi_0)
    M_r = b - eps**2 * ops.laplacian_5pt(phi_r)
    M_q = -eps**2 * ops.laplacian_5pt(phi_q)
    w = tension * -1.0 + adv_u * (1.0 / lam)

    # r-equation times tau, with <b, lead phi - hist_phi> / 2 expanded
    A = np.empty((2, 2))
    c = np.empty(2)
    A[0, 0] = lead - 0.5 * lead * ops.inner_cell(b, phi_r)
    A[0, 1] = -0.5 * lead * ops.inner_cell(b, phi_q)
    c[0] = hist_r + 0.5 * ops.inner_cell(b, lead * phi_0 - hist_phi)
    # q-equation times tau
    A[1, 0] = -tau * ops.inner_cell(adv_phi, M_r)
    A[1, 1] = lead - tau * (ops.inner_cell(adv_phi, M_q) + ops.inner_mac(w, u_hat_q))
    c[1] = hist_q + tau * (ops.inner_cell(adv_phi, M_0) + ops.inner_mac(w, u_hat_0))

    det = np.linalg.det(A)
    if not abs(det) >= 1e-12 * np.linalg.norm(A) ** 2:
        raise SingularClosureError(f"singular scalar closure (tau={tau}): A = {A.tolist()}")
    r_np1, q_np1 = np.linalg.solve(A, c)

    phi_np1 = phi_0 + r_np1 * phi_r + q_np1 * phi_q
    u_hat = u_hat_0 + q_np1 * u_hat_q
    work.phi_0, work.phi_r, work.phi_q = phi_0, phi_r, phi_q
    work.u_hat_0, work.u_hat_q = u_hat_0, u_hat_q
    work.mu_tilde_np1 = M_0 + r_np1 * M_r + q_np1 * M_q
    work.closure_matrix = A
    return phi_np1, u_hat, float(r_np1), float(q_np1)


def project(u_hat: MacVector, p_n: np.ndarray, tau: float, lead: float = 1.5):
    """Pressure-correction projection; returns ``(u^{n+1}, p^{n+1}, delta_p)``."""
    dp = solve_poisson_neumann((lead / tau) * ops.div_mac(u_hat))
    u_np1 = u_hat - ops.grad_cell(dp) * (tau / lead)
    return u_np1, p_n + dp, dp


def coupled_residuals(state: SimState, rec: StepRecord, params: Params) -> dict[str, float]:
    """Relative residuals of the phase, r, momentum and q equations.

    Each residual is ``max|lhs - rhs| / (1 + largest term)``, evaluated with
    the stencil operators, independently of the superposition used to solve.
    """
    work = rec.work
    lead, c_n, c_nm1 = _bdf(work.order)
    tau, eps, lam = params.tau, params.epsilon, params.lam

    def rel(res, *terms):
        scale = max(float(np.max(np.abs(t))) for t in terms)
        return float(np.max(np.abs(res))) / (1.0 + scale)

    dphi = (lead * rec.phi_np1 - c_n * state.phi_n - c_nm1 * state.phi_nm1) / tau
    adv_phi = ops.div_phi_u(work.phi_star, work.u_star)
    mu = rec.r_np1 * work.b_star - eps**2 * ops.laplacian_5pt(rec.phi_np1)
    lap_mu = ops.laplacian_5pt(mu)
    phase = rel(dphi + rec.q_np1 * adv_phi - lap_mu, dphi, rec.q_np1 * adv_phi, lap_mu)

    dr = (lead * rec.r_np1 - c_n * state.r_n - c_nm1 * state.r_nm1) / tau
    nonlin = work.phi_star**3 - work.phi_star
    r_rhs = ops.inner_cell(nonlin, dphi) / (2.0 * math.sqrt(work.e1h_star))
    r_eq = rel(dr - r_rhs, dr, r_rhs)

    du = (rec.u_hat * lead - state.u_n * c_n - state.u_nm1 * c_nm1) * (1.0 / tau)
    adv_u = ops.advect_velocity(work.u_star, work.u_star) * rec.q_np1
    grad_p = ops.grad_cell(state.p_n)
    visc = ops.laplacian_5pt(rec.u_hat) * params.nu
    tens = ops.mu_grad_phi(work.mu_tilde_star, work.phi_star) * (lam * rec.q_np1)
    res_u = du + adv_u + grad_p - visc - tens
    momentum = rel(_interior(res_u), *(_interior(t) for t in (du, adv_u, grad_p, visc, tens)))

    dq = (lead * rec.q_np1 - c_n * state.q_n - c_nm1 * state.q_nm1) / tau
    t1 = ops.inner_cell(adv_phi, mu)
    t2 = -ops.inner_mac(ops.mu_grad_phi(work.mu_tilde_star, work.phi_star), rec.u_hat)
    t3 = ops.inner_mac(ops.advect_velocity(work.u_star, work.u_star), rec.u_hat) / lam
    q_eq = rel(dq - (t1 + t2 + t3), dq, t1, t2, t3)
    return {"phase": phase, "r": r_eq, "momentum": momentum, "q": q_eq}


def _interior(v: MacVector) -> np.ndarray:
    # velocity unknowns only; wall-normal boundary edges are not solved for
    return np.concatenate([v.x[:, 1:-1].ravel(), v.y[1:-1, :].ravel()])


def step_detailed(state: SimState, params: Params, order: int = 2) -> tuple[SimState, StepRecord]:
    work = assemble_star(state, params, order)
    phi_np1, u_hat, r_np1, q_np1 = solve_coupled(state, work, params)
    u_np1, p_np1, dp = project(u_hat, state.p_n, params.tau, _bdf(order)[0])
    new = SimState(
        phi_n=phi_np1,
        phi_nm1=state.phi_n,
        u_n=u_np1,
        u_nm1=state.u_n,
        p_n=p_np1,
        r_n=r_np1,
        r_nm1=state.r_n,
        q_n=q_np1,
        q_nm1=state.q_n,
        step=state.step + 1,
        time=state.time + params.tau,
    )
    rec = StepRecord(work, phi_np1, u_hat, r_np1, q_np1, u_np1, p_np1, dp)
    return new, rec


def step(state: SimState, params: Params, order: int = 2, check: bool = False) -> SimState:
    """Advance one step.  With ``check=True`` invariant violations raise
    :class:`SchemeInvariantError`."""
    new, _ = step_detailed(state, params, order)
    if check:
        from .diagnostics import modified_energy

        drift = abs(cell_average(new.phi_n) - cell_average(state.phi_n))
        if drift > MASS_TOL:
            raise SchemeInvariantError(f"mass drift {drift:.3e} at step {new.step}")
        max_div = ops.norm_inf(ops.div_mac(new.u_n))
        if max_div > DIV_TOL:
            raise SchemeInvariantError(f"max |div u| = {max_div:.3e} at step {new.step}")
        if order == 2:
            e_old = modified_energy(state, params)
            e_new = modified_energy(new, params)
            if e_new > e_old + ENERGY_RTOL * (1.0 + abs(e_old)):
                raise SchemeInvariantError(
                    f"modified energy increased from {e_old!r} to {e_new!r} at step {new.step}"
                )
    return new


def integrate(state: SimState, params: Params, n_steps: int | None = None,
              startup: str = "copy_level", callback=None) -> SimState:
    """Run ``n_steps`` steps (default: up to ``params.t_end``).

    ``startup="first_order_step"`` takes the very first step (``state.step == 0``)
    with backward Euler instead of BDF2 on the copied level.
    ``callback(state, record)`` is called after every step.
    """
    if startup not in STARTUPS:
        raise ValueError(f"unknown startup {startup!r}; expected one of {STARTUPS}")
    n_steps = params.n_steps if n_steps is None else n_steps
    for _ in range(n_steps):
        order = 1 if (startup == "first_order_step" and state.step == 0) else 2
        state, rec = step_detailed(state, params, order)
        if callback is not None:
            callback(state, rec)
    return state
