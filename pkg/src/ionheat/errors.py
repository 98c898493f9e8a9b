"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A physical or numerical parameter violates its contract."""


class SingularityError(RuntimeError):
    """Two ions got close enough that the Coulomb evaluation is meaningless."""


class BlowUpError(RuntimeError):
    """A trajectory produced a non-finite or absurdly large component."""

    def __init__(self, message, step=None, last_good_time=None):
        super().__init__(message)
        self.step = step
        self.last_good_time = last_good_time


class NoCoolingError(ValueError):
    """Bath temperature requested for a non-cooling (eta <= 0) beam."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance."""


class CheckpointError(RuntimeError):
    """Checkpoint file is corrupted or does not match the current run."""
