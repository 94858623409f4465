"""Simulation driver: initial data, invariant monitoring, output files."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ops
from .config import RunConfig
from .diagnostics import DiagWriter, diag_record, modified_energy
from .grid import Placement, cell_average
from .scheme import (
    DIV_TOL,
    ENERGY_RTOL,
    MASS_TOL,
    SchemeInvariantError,
    SimState,
    default_initial_phase,
    init_state,
    step_detailed,
)
from .snapshot import is_field_file, load_checkpoint, load_field, save_checkpoint


@dataclass
class Violation:
    step: int
    kind: str
    value: float
    tolerance: float

    def to_json(self) -> str:
        return json.dumps({"step": self.step, "kind": self.kind,
                           "value": self.value, "tolerance": self.tolerance})


class Monitor:
    """Per-step invariant checks against the state the monitor was started on."""

    def __init__(self, state: SimState, params):
        self.params = params
        self.mass0 = cell_average(state.phi_n)
        self.energy = modified_energy(state, params)

    def check(self, state: SimState, order: int = 2) -> list[Violation]:
        out = []
        energy = modified_energy(state, self.params)
        fields_ok = np.all(np.isfinite(state.phi_n)) and state.u_n.isfinite() and math.isfinite(energy)
        if not fields_ok:
            return [Violation(state.step, "nan", float("nan"), 0.0)]
        drift = abs(cell_average(state.phi_n) - self.mass0)
        if drift > MASS_TOL:
            out.append(Violation(state.step, "mass_drift", drift, MASS_TOL))
        max_div = ops.norm_inf(ops.div_mac(state.u_n))
        if max_div > DIV_TOL:
            out.append(Violation(state.step, "divergence", max_div, DIV_TOL))
        # the energy law only covers BDF2 steps
        if order == 2:
            allowed = ENERGY_RTOL * (1.0 + abs(self.energy))
            if energy - self.energy > allowed:
                out.append(Violation(state.step, "energy_increase", energy - self.energy, allowed))
        self.energy = energy
        return out


def initial_state(config: RunConfig) -> SimState:
    grid = config.params.grid
    case = config.init_case
    if case == "default_smooth":
        return init_state(default_initial_phase(grid))
    if case == "equilibrium":
        return init_state(np.ones(grid.shape(Placement.CELL)))
    if case == "random":
        from .scheme import random_initial_phase

        return init_state(random_initial_phase(grid, config.seed))
    if case == "from_snapshot":
        path = config.snapshot_path
        if is_field_file(path):
            phi, placement = load_field(path)
            if placement is not Placement.CELL:
                raise ValueError(f"{path}: initial phase snapshot must be a cell field")
            state = init_state(phi)
        else:
            state = load_checkpoint(path)
        if state.phi_n.shape != grid.shape(Placement.CELL):
            raise ValueError(f"{path}: snapshot grid N={state.phi_n.shape[0]} "
                             f"does not match n_cells={grid.n_cells}")
        return state
    raise ValueError(f"unknown init_case {case!r}")


def checked_integrate(state: SimState, params, n_steps: int | None = None,
                      startup: str = "copy_level") -> SimState:
    """Integrate and raise :class:`SchemeInvariantError` on the first violation."""
    monitor = Monitor(state, params)
    n_steps = params.n_steps if n_steps is None else n_steps
    for _ in range(n_steps):
        order = 1 if (startup == "first_order_step" and state.step == 0) else 2
        state, _ = step_detailed(state, params, order)
        bad = monitor.check(state, order)
        if bad:
            v = bad[0]
            raise SchemeInvariantError(
                f"{v.kind} at step {v.step}: value {v.value:.3e}, tolerance {v.tolerance:.1e}"
            )
    return state


@dataclass
class RunResult:
    exit_status: int
    final_state: SimState
    output_dir: Path
    violations: list[Violation] = field(default_factory=list)


def run(config: RunConfig) -> RunResult:
    """Run one simulation, writing ``diag.csv``, ``violations.jsonl`` and snapshots.

    Exit status is 0 iff no violation record was written.  A non-finite
    state stops the run.
    """
    params = config.params
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    state = initial_state(config)
    monitor = Monitor(state, params)
    violations: list[Violation] = []
    start_step = state.step

    with DiagWriter(out / "diag.csv") as diag, open(out / "violations.jsonl", "w") as vfh:
        diag.write(diag_record(state, params))
        for _ in range(params.n_steps):
            order = 1 if (config.startup == "first_order_step" and state.step == 0) else 2
            try:
                state, _ = step_detailed(state, params, order)
            except (FloatingPointError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
                bad = [Violation(state.step + 1, f"solver_error: {exc}", float("nan"), 0.0)]
            else:
                bad = monitor.check(state, order)
            for v in bad:
                vfh.write(v.to_json() + "\n")
            violations.extend(bad)
            if any(v.kind == "nan" or v.kind.startswith("solver_error") for v in bad):
                break
            done = state.step - start_step
            if done % config.diag_every == 0 or done == params.n_steps:
                diag.write(diag_record(state, params))
            if config.snapshot_every and done % config.snapshot_every == 0:
                save_checkpoint(out / f"snap_{state.step}.macf", state)
    return RunResult(0 if not violations else 1, state, out, violations)
