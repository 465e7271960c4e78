"""Exception types shared across the package.

Exit-code mapping used by the CLI: validation failures exit 2, numerical
failures (CFL, linear solver) exit 3, I/O and format failures exit 4.
"""


class TaxiscadeError(Exception):
    """Base class for all package errors."""


class ValidationError(TaxiscadeError):
    """Configuration or argument violates a documented constraint.

    ``violations`` holds one message per violated constraint so a config
    check can report everything at once.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class CFLViolation(TaxiscadeError):
    """Requested time step exceeds the advective stability bound."""

    def __init__(self, dt, admissible):
        self.dt = dt
        self.admissible = admissible
        super().__init__(
            f"dt={dt:g} exceeds the admissible advective step {admissible:g}"
        )


class ConvergenceError(TaxiscadeError):
    """Iterative linear solver failed to reach the requested residual."""

    def __init__(self, iterations, residual, tol, detail=""):
        self.iterations = iterations
        self.residual = residual
        self.tol = tol
        msg = (
            f"CG did not converge in {iterations} iterations "
            f"(residual {residual:.3e}, tol {tol:.3e})"
        )
        super().__init__(msg + (f": {detail}" if detail else ""))


class SnapshotFormatError(TaxiscadeError):
    """Snapshot file is malformed (magic, version, or shape mismatch)."""
