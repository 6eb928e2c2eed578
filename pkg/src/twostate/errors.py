"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the region where the operation is defined."""


class ParameterError(ValueError):
    """A parameter violates a structural precondition (zero denominator, wrong sign, ...)."""


class ConvergenceError(ArithmeticError):
    """An iterative evaluation failed to reach the requested accuracy."""


class IntegrationError(RuntimeError):
    """The ODE integrator failed (step-size underflow or solver-reported failure)."""


class SingularSystemError(RuntimeError):
    """A linear system that should be regular turned out numerically singular."""
