"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class NonConvergenceError(ArithmeticError):
    """An iterative routine hit its iteration cap before converging."""
