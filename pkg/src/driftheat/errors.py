"""Exception types raised across the package."""


class DriftHeatError(Exception):
    """Base class for all package errors."""


class ConfigurationError(DriftHeatError, ValueError):
    """Invalid model, grid, quadrature or scenario configuration."""


class DomainError(DriftHeatError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class DivergenceError(DomainError):
    """A weighted integral does not converge.

    ``critical_gamma`` is the weight parameter at which integrability is lost,
    when such a threshold exists.
    """

    def __init__(self, message, critical_gamma=None):
        super().__init__(message)
        self.critical_gamma = critical_gamma
