"""Energies, conservation monitors and discrete-identity checkers."""

from __future__ import annotations

import csv
import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from . import ops
from .grid import GridSpec, MacVector, cell_average, enforce_no_penetration

#: Failure threshold for the summation-by-parts report.
SBP_TOL = 1e-12


def modified_energy(state, params) -> float:
    """Telescoping energy of the BDF2 scheme on the two stored levels."""
    eps2 = params.epsilon**2
    lam, tau = params.lam, params.tau
    phi_ext = 2.0 * state.phi_n - state.phi_nm1
    r_ext = 2.0 * state.r_n - state.r_nm1
    q_ext = 2.0 * state.q_n - state.q_nm1
    return (
        0.25 * eps2 * (ops.grad_norm_sq(state.phi_n) + ops.grad_norm_sq(phi_ext))
        + 0.5 * (state.r_n**2 + r_ext**2)
        + 0.25 * (state.q_n**2 + q_ext**2)
        + ops.inner_mac(state.u_n, state.u_n) / (2.0 * lam)
        + tau**2 / (3.0 * lam) * ops.grad_norm_sq(state.p_n)
    )


def original_energy(phi: np.ndarray, u: MacVector, params) -> float:
    """Discrete free energy plus kinetic energy of the unmodified model."""
    bulk = cell_average(0.25 * (phi**2 - 1.0) ** 2 + 1.0)
    return (
        bulk
        + 0.5 * params.epsilon**2 * ops.grad_norm_sq(phi)
        + ops.inner_mac(u, u) / (2.0 * params.lam)
    )


@dataclass
class DiagRecord:
    step: int
    time: float
    energy_modified: float
    energy_original: float
    mass: float
    max_div: float
    r: float
    q_minus_one: float
    grad_phi_l2: float

    @classmethod
    def header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def row(self) -> list[str]:
        return [str(v) if isinstance(v, int) else repr(float(v)) for v in astuple(self)]

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in astuple(self))


def diag_record(state, params) -> DiagRecord:
    return DiagRecord(
        step=state.step,
        time=state.time,
        energy_modified=modified_energy(state, params),
        energy_original=original_energy(state.phi_n, state.u_n, params),
        mass=cell_average(state.phi_n),
        max_div=ops.norm_inf(ops.div_mac(state.u_n)),
        r=state.r_n,
        q_minus_one=state.q_n - 1.0,
        grad_phi_l2=math.sqrt(ops.grad_norm_sq(state.phi_n)),
    )


class DiagWriter:
    """CSV sink for :class:`DiagRecord` rows; the header is written once."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._csv = csv.writer(self._fh, lineterminator="\n")
        self._csv.writerow(DiagRecord.header())

    def write(self, rec: DiagRecord) -> None:
        self._csv.writerow(rec.row())

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_diag_csv(path) -> list[DiagRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            DiagRecord(**{k: (int(v) if k == "step" else float(v)) for k, v in row.items()})
            for row in reader
        ]


def energy_bounds(state, params, e0: float) -> dict[str, tuple[float, float]]:
    """``(value, bound)`` pairs implied by modified-energy decay from ``e0``."""
    s = math.sqrt(e0)
    return {
        "grad_phi": (math.sqrt(ops.grad_norm_sq(state.phi_n)), 2.0 * s / params.epsilon),
        "r": (abs(state.r_n), math.sqrt(2.0) * s),
        "q": (abs(state.q_n), 2.0 * s),
        "u": (ops.norm(state.u_n), math.sqrt(2.0 * params.lam) * s),
    }


def projection_defects(u_hat: MacVector, u: MacVector) -> dict[str, float]:
    """Relative defects of the two Pythagorean identities of the projection.

    ``||u_hat||^2 = ||u||^2 + ||u_hat - u||^2`` in l2 and in the discrete
    H1 seminorm.
    """
    d = u_hat - u
    l2 = (ops.inner_mac(u_hat, u_hat), ops.inner_mac(u, u), ops.inner_mac(d, d))
    h1 = (ops.grad_norm_sq(u_hat), ops.grad_norm_sq(u), ops.grad_norm_sq(d))

    def rel(a, b, c):
        return abs(a - b - c) / a if a > 0 else abs(b + c)

    return {"l2": rel(*l2), "h1": rel(*h1)}


# -- summation-by-parts battery -------------------------------------------


def random_solenoidal(grid: GridSpec, rng: np.random.Generator) -> MacVector:
    """Discrete curl of a random nodal stream function vanishing on the walls.

    The result is divergence-free to roundoff and satisfies no-penetration.
    """
    n, h = grid.n_cells, grid.h
    psi = np.zeros((n + 1, n + 1))  # psi[j, i] at node (i h, j h)
    psi[1:-1, 1:-1] = rng.standard_normal((n - 1, n - 1))
    ux = -(psi[1:, :] - psi[:-1, :]) / h
    uy = (psi[:, 1:] - psi[:, :-1]) / h
    return MacVector(ux, uy)


def random_wall_velocity(grid: GridSpec, rng: np.random.Generator) -> MacVector:
    v = MacVector(
        rng.standard_normal(grid.shape(1)), rng.standard_normal(grid.shape(2))
    )
    return enforce_no_penetration(v)


def _rel_defect(lhs: float, rhs: float, scale: float) -> float:
    if scale == 0.0:
        return abs(lhs - rhs)
    return abs(lhs - rhs) / scale


def sbp_defects(f, g, u: MacVector, v: MacVector) -> dict[str, float]:
    """Relative defects of the three discrete integration-by-parts identities.

    ``u`` must be discretely solenoidal; ``v`` only needs no-penetration.
    Each defect is scaled by the Cauchy-Schwarz bound of the pairing, so it
    is invariant under rescaling the inputs.
    """
    grad_f = ops.grad_cell(f)
    a = ops.inner_mac(u, grad_f)
    scale_a = math.sqrt(ops.inner_mac(u, u) * ops.inner_mac(grad_f, grad_f))

    lhs_v = -ops.inner_mac(v, ops.laplacian_5pt(v))
    rhs_v = ops.grad_norm_sq(v)
    lhs_f = ops.inner_cell(f, ops.laplacian_5pt(f))
    rhs_f = -ops.grad_norm_sq(f)

    flux = ops.div_phi_u(f, v)
    lhs_c = -ops.inner_cell(g, flux)
    weighted = ops.mu_grad_phi(f, g)
    rhs_c = ops.inner_mac(v, weighted)
    scale_c = math.sqrt(ops.inner_mac(v, v) * ops.inner_mac(weighted, weighted))
    return {
        "solenoidal_gradient": _rel_defect(a, 0.0, scale_a),
        "velocity_laplacian": _rel_defect(lhs_v, rhs_v, abs(rhs_v)),
        "cell_laplacian": _rel_defect(lhs_f, rhs_f, abs(rhs_f)),
        "flux_divergence": _rel_defect(lhs_c, rhs_c, scale_c),
    }


@dataclass
class SBPReport:
    n_cells: int
    trials: int
    max_defects: dict[str, float]
    tol: float = SBP_TOL

    @property
    def passed(self) -> bool:
        return all(d <= self.tol for d in self.max_defects.values())


def check_sbp(grid: GridSpec, trials: int = 20, seed: int = 0, scale: float = 1.0) -> SBPReport:
    """Evaluate the summation-by-parts identities on seeded random fields."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {}
    for _ in range(trials):
        f = scale * rng.standard_normal(grid.shape(0))
        g = scale * rng.standard_normal(grid.shape(0))
        u = random_solenoidal(grid, rng) * scale
        v = random_wall_velocity(grid, rng) * scale
        for k, d in sbp_defects(f, g, u, v).items():
            worst[k] = max(worst.get(k, 0.0), d)
    return SBPReport(grid.n_cells, trials, worst)
