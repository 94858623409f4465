"""Cauchy refinement studies in time and in space.

No closed-form solution exists for the model, so errors are differences
between runs at successive resolutions (ratio 2).  All runs of a study are
compared at the same time ``T_eff``: the largest multiple of the coarsest
time step not exceeding ``T``, which every finer run also lands on.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import ops
from .fastsolve import fft_workers
from .grid import GridSpec, MacVector
from .runner import checked_integrate
from .scheme import Params, SimState, default_initial_phase, init_state

VARIABLES = ("phi_h1", "u_l2")
REFERENCES = ("successive", "finest")


@dataclass
class RateReport:
    variable: str
    levels: list[tuple[float, float]]  # (resolution, error)
    observed_orders: list[float]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["level", "resolution", "error", "order"])
            for k, (res, err) in enumerate(self.levels):
                order = "" if k == 0 else repr(self.observed_orders[k - 1])
                w.writerow([k, repr(res), repr(err), order])


def observed_orders(errors) -> list[float]:
    e = np.asarray(errors, dtype=float)
    return [float(v) for v in np.log2(e[:-1] / e[1:])]


def read_rates_csv(path) -> RateReport:
    """Rebuild a report from its CSV, recomputing orders from the error column."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    levels = [(float(r["resolution"]), float(r["error"])) for r in rows]
    return RateReport("", levels, observed_orders([e for _, e in levels]))


def restrict_cell(f: np.ndarray) -> np.ndarray:
    """Average 2x2 blocks of fine cells onto the coarse cell."""
    n = f.shape[0] // 2
    return f.reshape(n, 2, n, 2).mean(axis=(1, 3))


def restrict_mac(v: MacVector) -> MacVector:
    """Average the two fine edge values covering each coarse edge.

    A coarse x-edge at ``(I H, (J + 1/2) H)`` lies on the fine edge line
    ``i = 2I`` between the fine samples ``j = 2J`` and ``j = 2J + 1``; this
    is the face-flux average, so discrete divergence-freedom is preserved.
    """
    x = v.x[:, ::2]
    y = v.y[::2, :]
    return MacVector(0.5 * (x[0::2, :] + x[1::2, :]), 0.5 * (y[:, 0::2] + y[:, 1::2]))


def _restrict_to(state: SimState, n: int) -> tuple[np.ndarray, MacVector]:
    phi, u = state.phi_n, state.u_n
    while phi.shape[0] > n:
        phi, u = restrict_cell(phi), restrict_mac(u)
    return phi, u


def _errors(a: SimState, b: SimState, epsilon: float) -> dict[str, float]:
    """Error norms of ``a - b`` with ``b`` restricted to ``a``'s grid if finer."""
    n = a.phi_n.shape[0]
    phi_b, u_b = _restrict_to(b, n)
    return {
        "phi_h1": epsilon * math.sqrt(ops.grad_norm_sq(a.phi_n - phi_b)),
        "u_l2": ops.norm(a.u_n - u_b),
    }


def _job(args) -> SimState:
    params, n_steps, startup, init = args
    phi0 = init(params.grid)
    return checked_integrate(init_state(phi0), params, n_steps, startup)


def _run_all(jobs, parallel: int | None):
    if parallel and parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            return list(pool.map(_job, jobs))
    return [_job(j) for j in jobs]


def _default_parallel() -> int | None:
    w = fft_workers()
    return None if w in (None, -1) else w


def _reports(runs: list[SimState], resolutions, epsilon: float, reference: str):
    if reference not in REFERENCES:
        raise ValueError(f"reference must be one of {REFERENCES}, got {reference!r}")
    if reference == "successive":
        errs = [_errors(a, b, epsilon) for a, b in zip(runs[:-1], runs[1:])]
    else:
        errs = [_errors(a, runs[-1], epsilon) for a in runs[:-1]]
    out = {}
    for var in VARIABLES:
        e = [d[var] for d in errs]
        out[var] = RateReport(var, list(zip(resolutions[:-1], e)), observed_orders(e))
    return out


def convergence_time(base: Params, levels: int = 3, *, startup: str = "first_order_step",
                     reference: str = "successive",
                     init: Callable[[GridSpec], np.ndarray] = default_initial_phase,
                     parallel: int | None = None) -> dict[str, RateReport]:
    """Temporal refinement with ``tau, tau/2, ..., tau/2^levels`` on a fixed grid.

    Returns one :class:`RateReport` per variable with ``levels`` error entries.
    """
    if levels < 3:
        raise ValueError("levels must be >= 3")
    n_coarse = int(math.floor(base.t_end / base.tau + 1e-9))
    if n_coarse < 1:
        raise ValueError("t_end must cover at least one coarse time step")
    taus = [base.tau / 2**k for k in range(levels + 1)]
    jobs = [(replace(base, tau=t), n_coarse * 2**k, startup, init) for k, t in enumerate(taus)]
    runs = _run_all(jobs, parallel if parallel is not None else _default_parallel())
    return _reports(runs, taus, base.epsilon, reference)


def convergence_space(base: Params, levels: int = 3, *, startup: str = "first_order_step",
                      reference: str = "successive",
                      init: Callable[[GridSpec], np.ndarray] = default_initial_phase,
                      parallel: int | None = None) -> dict[str, RateReport]:
    """Spatial refinement with ``N, 2N, ..., 2^levels N`` at a fixed time step."""
    if levels < 3:
        raise ValueError("levels must be >= 3")
    ns = [base.n_cells * 2**k for k in range(levels + 1)]
    jobs = [(replace(base, n_cells=n), base.n_steps, startup, init) for n in ns]
    runs = _run_all(jobs, parallel if parallel is not None else _default_parallel())
    return _reports(runs, ns, base.epsilon, reference)
