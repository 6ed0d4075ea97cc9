"""1D compressible isentropic MHD: solver, diagnostics and resistivity-limit studies."""

from .core import (
    RHO_FLOOR,
    FieldScalar,
    Grid1D,
    PhysParams,
    State,
    constant_state,
    derivative,
    effective_viscous_flux,
    fast_speed,
    fast_speed_state,
    material_derivative,
    potential_energy,
    pressure,
)
from .diagnostics import (
    Accumulators,
    DiagnosticsRecord,
    energy_drift,
    flux_identity_residual,
    lp_norm,
    momentum_potential,
    nu_independence_report,
    sample,
    total_energy,
    weighted_energy,
    weighted_l2,
)
from .errors import BoundaryMonitorError, ConfigError, NumericalError, SimulationError
from .limit_study import (
    ConvergenceReport,
    SharedConfig,
    SweepResult,
    fit_rate,
    run_pair,
    sweep,
)
from .mms import manufactured_solution, mms_rhs, observed_orders, run_manufactured
from .scenario import (
    CompatibilityResult,
    ScenarioSpec,
    build_initial_state,
    compatibility_residual,
    weighted_moment_check,
)
from .solver import RhsOutput, SchemeConfig, rhs, run, stable_dt, step

__version__ = "0.1.0"
