"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A parameter violates its documented domain (e.g. a cut-off radius <= 1)."""


class UnsupportedModelError(ValueError):
    """The requested operation is not defined for this model kind."""


class DegenerateIntensityError(ValueError):
    """A correlation quotient was requested at a point of zero intensity."""


class CollisionError(RuntimeError):
    """Two particles coincide exactly; the pair drift is singular there.

    Integrators catch this, reject the offending step and retry with a
    smaller time step.
    """


class KernelDiscretizationError(RuntimeError):
    """Nystrom spectrum left [0, 1] by more than the tolerance; grid too coarse."""


class InsufficientDataError(ValueError):
    """Too few samples / replicas to form the requested estimate."""


class NumericError(RuntimeError):
    """Unrecoverable numerical failure. Carries replay information."""

    def __init__(self, message: str, *, seed=None, replica=None):
        detail = message
        if seed is not None:
            detail += f" [seed={seed}]"
        if replica is not None:
            detail += f" [replica={replica}]"
        super().__init__(detail)
        self.seed = seed
        self.replica = replica


class ConfigError(ValueError):
    """Experiment configuration failed schema validation."""
