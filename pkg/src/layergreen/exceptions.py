"""Exception types shared across the package."""


class SingularEvaluationError(ValueError):
    """Raised when a field is requested at the source point itself."""


class AmbiguousSideError(ValueError):
    """Raised when a one-sided quantity is requested on the interface without a side."""


class SingularFrequencyError(ValueError):
    """Raised when the transformed profile is evaluated at zero frequency."""


class NonConvergenceError(RuntimeError):
    """Raised when an iterative or adaptive procedure misses its tolerance.

    The best available estimate and the achieved error are attached so callers
    can still report partial results.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error
