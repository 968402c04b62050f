"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class NumericsError(ArithmeticError):
    """A numerical routine met a non-finite value."""


class OracleResolutionError(RuntimeError):
    """The grid oracle cannot resolve the requested run with this configuration."""


class RegionViolation(RuntimeError):
    """A computed error-disturbance point fell outside the Stern-Gerlach region."""
