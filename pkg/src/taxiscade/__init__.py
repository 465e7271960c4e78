"""Finite-difference simulator for a chemotaxis/haptotaxis cascade on a 2-D box.

The package integrates a parabolic cell-density equation coupled to a tactic
signal, a degradable static anchor field, and a diffusing proteolytic agent,
all under zero-flux boundary conditions.  Taxis terms are advanced explicitly
with an upwind flux split; diffusion is advanced implicitly with conjugate
gradients so the scheme keeps cell mass to rounding accuracy.

Entry points:

* :func:`taxiscade.runner.run_simulation` drives a full run from a
  :class:`taxiscade.config.RunConfig`.
* ``taxiscade`` (console script, see :mod:`taxiscade.cli`) exposes the same
  from the shell, plus a parameter-bound checker and a two-variant compare.
"""

# Bound before the submodule imports below: runner reads it back via
# ``from . import __version__`` while this module is still initialising.
__version__ = "0.1.0"

from .config import RunConfig, default_config, load_config
from .coefficients import (
    AssumptionBounds,
    BindingParams,
    GrowthParams,
    KineticParams,
    ReactionParams,
    TaxisParams,
    validate_assumptions,
)
from .diagnostics import functional_F, make_record, steady_state_reached
from .errors import (
    CFLViolation,
    ConvergenceError,
    SnapshotFormatError,
    TaxiscadeError,
    ValidationError,
)
from .grid import Field, FieldIC, GridSpec, State, build_initial_state, make_grid
from .integrator import SolverConfig, admissible_dt, imex_step, step_a_system
from .models import ModelParams, ModelVariant, parse_variant
from .runner import RunResult, run_simulation
from .snapshots import payload_sha256, read_snapshot, write_snapshot

__all__ = [
    "AssumptionBounds",
    "BindingParams",
    "CFLViolation",
    "ConvergenceError",
    "Field",
    "FieldIC",
    "GridSpec",
    "GrowthParams",
    "KineticParams",
    "ModelParams",
    "ModelVariant",
    "ReactionParams",
    "RunConfig",
    "RunResult",
    "SnapshotFormatError",
    "SolverConfig",
    "State",
    "TaxisParams",
    "TaxiscadeError",
    "ValidationError",
    "__version__",
    "admissible_dt",
    "build_initial_state",
    "default_config",
    "functional_F",
    "imex_step",
    "load_config",
    "make_grid",
    "make_record",
    "parse_variant",
    "payload_sha256",
    "read_snapshot",
    "run_simulation",
    "steady_state_reached",
    "step_a_system",
    "validate_assumptions",
    "write_snapshot",
]
