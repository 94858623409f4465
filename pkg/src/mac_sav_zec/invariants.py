"""Invariant battery behind the ``check`` subcommand.

Every check returns a :class:`CheckResult`; :func:`run_battery` collects
them for a list of grid sizes.  Solvers can be swapped out so the harness
itself can be tested against a deliberately broken double.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import fastsolve, ops
from .diagnostics import SBP_TOL, check_sbp, projection_defects, random_wall_velocity
from .grid import GridSpec, MacVector
from .scheme import Params, init_state, project, step_detailed

SOLVER_TOL = 1e-10
PROJECTION_TOL = 1e-12
FIXED_POINT_TOL = 1e-12


@dataclass
class CheckResult:
    name: str
    n_cells: int
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        # NaN never passes
        return bool(self.value <= self.tolerance)


def apply_phase(spec: fastsolve.PhaseOperatorSpec, x: np.ndarray) -> np.ndarray:
    lap = ops.laplacian_5pt
    return (spec.lead / spec.tau) * x + spec.epsilon**2 * lap(lap(x))


def apply_velocity(spec: fastsolve.VelocityOperatorSpec, v: MacVector) -> MacVector:
    return v * (spec.lead / spec.tau) - ops.laplacian_5pt(v) * spec.nu


def _rel(res: np.ndarray, rhs: np.ndarray) -> float:
    return float(np.max(np.abs(res)) / max(np.max(np.abs(rhs)), np.finfo(float).tiny))


def _wall_interior(v: MacVector) -> np.ndarray:
    return np.concatenate([v.x[:, 1:-1].ravel(), v.y[1:-1, :].ravel()])


def solver_residuals(grid: GridSpec, rng: np.random.Generator, trials: int = 10,
                     solvers: dict[str, Callable] | None = None) -> list[CheckResult]:
    """Worst relative stencil residual of each fast solver over random right-hand sides."""
    s = {"phase": fastsolve.solve_phase, "velocity": fastsolve.solve_velocity,
         "poisson": fastsolve.solve_poisson_neumann}
    s.update(solvers or {})
    pspec = fastsolve.PhaseOperatorSpec(1e-3, 0.1, grid)
    vspec = fastsolve.VelocityOperatorSpec(1e-3, 1.0, grid)
    worst = {"phase": 0.0, "velocity": 0.0, "poisson": 0.0}
    for _ in range(trials):
        f = rng.standard_normal(grid.shape(0))
        x = s["phase"](pspec, f)
        worst["phase"] = max(worst["phase"], _rel(apply_phase(pspec, x) - f, f))

        g = random_wall_velocity(grid, rng)
        v = s["velocity"](vspec, g)
        res = _wall_interior(apply_velocity(vspec, v) - g)
        worst["velocity"] = max(worst["velocity"], _rel(res, _wall_interior(g)))

        f0 = f - f.mean()
        psi = s["poisson"](f0)
        worst["poisson"] = max(worst["poisson"], _rel(ops.laplacian_5pt(psi) - f0, f0))
    return [CheckResult(f"solver_{k}", grid.n_cells, v, SOLVER_TOL) for k, v in worst.items()]


def projection_checks(grid: GridSpec, rng: np.random.Generator, trials: int = 10,
                      tau: float = 1e-2) -> list[CheckResult]:
    """Pythagorean identities and divergence of the projection on random inputs."""
    worst = {"l2": 0.0, "h1": 0.0, "div": 0.0}
    for _ in range(trials):
        u_hat = random_wall_velocity(grid, rng)
        u, _, _ = project(u_hat, grid.zeros(0), tau)
        for k, d in projection_defects(u_hat, u).items():
            worst[k] = max(worst[k], d)
        worst["div"] = max(worst["div"], ops.norm_inf(ops.div_mac(u)))
    return [
        CheckResult("projection_l2", grid.n_cells, worst["l2"], PROJECTION_TOL),
        CheckResult("projection_h1", grid.n_cells, worst["h1"], PROJECTION_TOL),
        CheckResult("projection_div", grid.n_cells, worst["div"], fastsolve.COMPAT_TOL),
    ]


def fixed_point_drift(grid: GridSpec, value: float, n_steps: int = 100, tau: float = 1e-2) -> float:
    """Largest per-step change of a uniform phase at rest under the scheme."""
    params = Params(0.1, 1.0, 1.0, tau, grid.n_cells, n_steps * tau)
    state = init_state(np.full(grid.shape(0), float(value)))
    worst = 0.0
    for _ in range(n_steps):
        new, _ = step_detailed(state, params)
        change = max(
            float(np.max(np.abs(new.phi_n - state.phi_n))),
            (new.u_n - state.u_n).max_abs(),
            float(np.max(np.abs(new.p_n - state.p_n))),
            abs(new.r_n - state.r_n),
            abs(new.q_n - state.q_n),
        )
        worst = max(worst, change)
        state = new
    return worst


def run_battery(ns: Sequence[int] = (8, 16, 32), seed: int = 0,
                solvers: dict[str, Callable] | None = None) -> list[CheckResult]:
    results = []
    for n in ns:
        grid = GridSpec(n)
        rng = np.random.default_rng([seed, n])
        rep = check_sbp(grid, trials=20, seed=int(rng.integers(2**31)))
        results += [CheckResult(f"sbp_{k}", n, v, SBP_TOL) for k, v in rep.max_defects.items()]
        results += solver_residuals(grid, rng, solvers=solvers)
        results += projection_checks(grid, rng)
        for value in (1.0, -1.0):
            name = "fixed_point_plus" if value > 0 else "fixed_point_minus"
            results.append(CheckResult(name, n, fixed_point_drift(grid, value), FIXED_POINT_TOL))
    return results


def format_table(results: Sequence[CheckResult]) -> str:
    lines = [f"{'check':<32} {'N':>4} {'value':>11} {'tol':>8}  result"]
    for r in results:
        lines.append(f"{r.name:<32} {r.n_cells:>4} {r.value:>11.3e} {r.tolerance:>8.0e}  "
                     f"{'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines)
