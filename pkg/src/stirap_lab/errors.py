"""Exception types raised across the package."""


class StirapLabError(Exception):
    """Base class for all package errors."""


class DomainError(StirapLabError, ValueError):
    """An input lies outside the domain of an operation."""


class IntegrationError(StirapLabError, RuntimeError):
    """The ODE integrator failed to reach the requested tolerance.

    Attributes
    ----------
    time : float
        Time (s) at which the integrator gave up.
    """

    def __init__(self, message, time):
        super().__init__(f"{message} (t = {time:.6e} s)")
        self.time = time


class ContinuationError(StirapLabError, RuntimeError):
    """Adiabatic branch tracking could not match eigenvectors between fields."""


class ConvergenceError(StirapLabError, RuntimeError):
    """A fit failed to converge or the data cannot support the model."""


class FitRejected(StirapLabError, ValueError):
    """The data are inconsistent with the model being fitted."""


class NoPeakError(StirapLabError, RuntimeError):
    """No resolvable peak where one was required."""
