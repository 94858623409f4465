"""Decoupled, energy-stable BDF2 scheme for the Cahn-Hilliard-Navier-Stokes
system on a MAC staggered grid, with fast trigonometric solvers."""

from .config import ConfigError, RunConfig, load_config, parse_config
from .diagnostics import DiagRecord, check_sbp, diag_record, modified_energy, original_energy
from .fastsolve import (
    IncompatibleRHSError,
    PhaseOperatorSpec,
    VelocityOperatorSpec,
    solve_phase,
    solve_poisson_neumann,
    solve_velocity,
)
from .grid import BoundaryConditionError, GridSpec, MacVector, Placement
from .runner import RunResult, checked_integrate, run
from .scheme import (
    Params,
    SchemeInvariantError,
    SimState,
    default_initial_phase,
    init_state,
    integrate,
    step,
)
from .studies import RateReport, convergence_space, convergence_time

__all__ = [
    "BoundaryConditionError", "ConfigError", "DiagRecord", "GridSpec", "IncompatibleRHSError",
    "MacVector", "Params", "PhaseOperatorSpec", "Placement", "RateReport", "RunConfig",
    "RunResult", "SchemeInvariantError", "SimState", "VelocityOperatorSpec", "check_sbp",
    "checked_integrate", "convergence_space", "convergence_time", "default_initial_phase",
    "diag_record", "init_state", "integrate", "load_config", "modified_energy",
    "original_energy", "parse_config", "run", "solve_phase", "solve_poisson_neumann",
    "solve_velocity", "step",
]
