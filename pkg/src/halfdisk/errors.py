"""Exception hierarchy shared by all modules."""


class HalfDiskError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(HalfDiskError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(HalfDiskError, ValueError):
    """Inconsistent or infeasible configuration."""


class MeshIntegrityError(HalfDiskError):
    """The mesh violates a structural invariant (degenerate or untagged)."""


class ShiftCollisionError(HalfDiskError):
    """``A - sigma*B`` is numerically singular for the requested shift."""

    def __init__(self, sigma, suggestion=None):
        self.sigma = sigma
        self.suggestion = suggestion
        msg = f"shift {sigma!r} collides with the spectrum"
        if suggestion is not None:
            msg += f"; try sigma={suggestion!r}"
        super().__init__(msg)


class ConvergenceError(HalfDiskError):
    """The eigensolver did not reach the requested tolerance."""

    def __init__(self, message, best_residual=float("nan")):
        self.best_residual = best_residual
        super().__init__(f"{message} (best residual {best_residual:.3e})")


class BracketError(HalfDiskError, ValueError):
    """Root bracket does not straddle the target value."""


class VerificationError(HalfDiskError):
    """An exact-arithmetic verification step found a mismatch."""
