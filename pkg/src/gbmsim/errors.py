"""Exception types shared across the package."""


class GbmsimError(Exception):
    """Base class for all package errors."""


class InvalidInitialDataError(GbmsimError):
    """Initial data violates the admissible box 0 <= T0, N0, Phi0 <= K."""


class IntegrationFailureError(GbmsimError):
    """A time step produced a non-finite state."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class SolverFailureError(GbmsimError):
    """An iterative linear solve did not reach its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class EigenFailureError(GbmsimError):
    """Eigenvalue iteration did not converge within the iteration cap."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ConfigError(GbmsimError):
    """Scenario configuration is invalid; carries every violation found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n" +
                         "\n".join(f"  - {v}" for v in self.violations))
