"""Exception hierarchy shared across the package."""


class GaussBCError(Exception):
    """Base class for all package errors."""


class DomainError(GaussBCError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class UnsupportedError(GaussBCError, ValueError):
    """A request is valid-looking but outside the supported envelope (e.g. K > 6)."""


class InfeasibleError(GaussBCError, RuntimeError):
    """A scenario or parameter set admits no feasible operating point."""


class ConfigError(GaussBCError, ValueError):
    """A configuration document failed schema validation."""


class NumericalError(GaussBCError, RuntimeError):
    """An internal numerical routine failed to converge or went out of range."""
