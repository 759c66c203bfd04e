"""Exception types shared across the package."""


class ThinflowError(Exception):
    """Base class for all package-specific failures."""


class BranchCutError(ThinflowError):
    """A map or field was evaluated on the slit without choosing a side."""


class DomainError(ThinflowError):
    """A point lies outside the domain of validity of an operation."""


class EndpointError(ThinflowError):
    """Evaluation exactly at a slit endpoint, where derivatives blow up."""


class SupportError(ThinflowError):
    """A vorticity bump or test-field support violates a placement rule."""


class QuadratureError(ThinflowError):
    """An adaptive quadrature failed to reach its tolerance."""


class ConfigError(ThinflowError):
    """Bad configuration file or CLI usage; carries the offending field path."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class CflError(ThinflowError):
    """Time step exceeds the advective stability limit; reports what would fit."""

    def __init__(self, dt, dt_required):
        self.dt = dt
        self.dt_required = dt_required
        super().__init__(
            f"time step {dt:.3e} exceeds the advective limit; need dt <= {dt_required:.3e}"
        )


class BlowupError(ThinflowError):
    """NaN or Inf detected in the evolving state; the run is aborted."""
