"""Error types shared across the package."""


class BotorusError(Exception):
    """Base class for all package errors."""


class ValidationError(BotorusError):
    """Bad user input or configuration (CLI exit code 2)."""


class NonZeroMean(ValidationError):
    """Operation requires a zero-mean field."""


class MeanMismatch(ValidationError):
    """Endpoints of a steering problem have different means."""


class GridMismatch(ValidationError):
    """Fields live on incompatible grids."""


class ZeroData(ValidationError):
    """An operation received identically zero data where it cannot proceed."""


class ParseError(ValidationError):
    """Malformed initial-data spec, config file, or snapshot file."""


class BlowUp(BotorusError):
    """Solution left the resolvable regime (CLI exit code 3)."""

    def __init__(self, step, t=None, message=None):
        self.step = step
        self.t = t
        msg = message or f"solution blew up at step {step}" + (
            f" (t = {t:.6g})" if t is not None else "")
        super().__init__(msg)


class NoConvergence(BotorusError):
    """An iteration failed to converge (CLI exit code 3)."""

    def __init__(self, iterations, residual=None, message=None):
        self.iterations = iterations
        self.residual = residual
        msg = message or (
            f"no convergence after {iterations} iterations"
            + (f" (residual {residual:.3e})" if residual is not None else ""))
        super().__init__(msg)
