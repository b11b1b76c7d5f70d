"""Exception types raised by qfdiv."""


class QfdivError(Exception):
    """Base class for all library errors."""


class ParameterError(QfdivError, ValueError):
    """Invalid parameter or violated precondition."""


class DimensionError(QfdivError, ValueError):
    pass


class HermiticityError(QfdivError, ValueError):
    pass


class NotPsdError(QfdivError, ValueError):
    """Operator has an eigenvalue below the PSD clamping window."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class DomainError(QfdivError, ValueError):
    """A scalar function was undefined at an eigenvalue."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class ConvergenceError(QfdivError, RuntimeError):
    """Jacobi sweeps hit the iteration cap."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class SupportViolationError(QfdivError, ValueError):
    pass


class NotAConjugationError(QfdivError, ValueError):
    """A black-box map is not of the form A -> U A U* or U conj(A) U*."""
