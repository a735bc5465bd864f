"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid physical or numerical parameters."""


class FrameMismatchError(ValueError):
    """Amplitude state and operator live in different phase frames."""


class NormalizationError(RuntimeError):
    """A state could not be normalized (degenerate configuration)."""


class NumericalDecompositionError(RuntimeError):
    """Eigendecomposition failed or produced an unphysical spectrum.

    Carries diagnostics about the offending matrix in ``details``.
    """

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = dict(details or {})


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""
