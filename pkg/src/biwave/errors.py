"""Exception types shared across the package."""


class BiwaveError(Exception):
    """Base class for all package-specific errors."""


class OffManifold(BiwaveError):
    """A point violates the manifold constraint beyond tolerance."""


class TubeExceeded(BiwaveError):
    """A point left the tubular neighborhood where the retraction is defined."""


class NonFinite(BiwaveError):
    """NaN or Inf detected in field data."""


class GridMismatch(BiwaveError):
    """Two fields/states live on incompatible grids."""


class Degenerate(BiwaveError):
    """A diagnostic is undefined for this state (e.g. constant map)."""


class ConfigError(BiwaveError):
    """Base class for configuration problems."""


class ParseError(ConfigError):
    """Malformed config text; carries the 1-based line number."""

    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ValidationError(ConfigError):
    """A config field has an invalid or inconsistent value."""

    def __init__(self, field, message=""):
        super().__init__(f"{field}: {message}" if message else field)
        self.field = field


class DiscreteBlowup(BiwaveError):
    """The discrete solution blew up (left the tube or went non-finite).

    Carries the simulation time of the failure, the underlying cause, and
    the last finite diagnostics record if one was computed.
    """

    def __init__(self, time, cause=None, last_record=None):
        super().__init__(f"discrete blow-up at t={time:.6g}" + (f": {cause}" if cause else ""))
        self.time = time
        self.cause = cause
        self.last_record = last_record
