"""Exception types shared across the package."""


class PMSquareError(Exception):
    """Base class for all errors raised by this package."""


class AlgebraViolation(PMSquareError):
    """An exact operator identity failed; signals an implementation bug."""


class InvalidState(PMSquareError, ValueError):
    """A density matrix does not satisfy its contract (trace, positivity)."""


class DomainError(PMSquareError, ValueError):
    """A numeric argument is outside its admissible range."""


class DimensionMismatch(PMSquareError, ValueError):
    """Vector/matrix dimensions are incompatible."""


class NoConvergence(PMSquareError, RuntimeError):
    """An iterative solver hit its iteration cap before converging."""


class ConfigError(PMSquareError, ValueError):
    """An experiment or CLI configuration is inconsistent."""


class InsufficientData(PMSquareError):
    """A trajectory lacks the records needed for an estimate.

    ``contexts`` lists the context labels (1-6) with no usable records.
    """

    def __init__(self, contexts, message=None):
        self.contexts = tuple(contexts)
        if message is None:
            message = f"no post-burn-in records for contexts {sorted(self.contexts)}"
        super().__init__(message)
