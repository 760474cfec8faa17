"""
Error Types
-----------
Exception hierarchy shared by the numerical core, the simulator and the CLI.
Every failure the library can report is a subclass of UdnError so callers
can catch one type and still get a precise class name in diagnostics.
"""

from typing import Any, Dict, Optional


class UdnError(Exception):
    """Base class for all errors raised by this package."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        """
        Initialize the error.

        Args:
            message: Human-readable description
            details: Optional structured diagnostics
        """
        super().__init__(message)
        self.message = message
        self.details = dict(details or {})

    def __str__(self) -> str:
        return self.message


class DomainError(UdnError, ValueError):
    """An input lies outside the domain of the requested operation."""


class ModelError(UdnError):
    """The path-loss model description is inconsistent or unknown."""


class DivergenceError(ModelError):
    """A tail integral or series does not converge for the given model."""


class NumericalError(UdnError):
    """Adaptive quadrature did not converge within its subdivision budget."""


class NoSolutionError(UdnError):
    """A design problem has no solution inside the scanned range."""

    def __init__(self, message: str, residual_gap: float,
                 details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.residual_gap = residual_gap
        self.details.setdefault("residual_gap", residual_gap)


class ConfigError(UdnError):
    """A run configuration could not be parsed or validated."""

    def __init__(self, message: str, path: Optional[str] = None,
                 line: Optional[int] = None,
                 details: Optional[Dict[str, Any]] = None):
        location = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{location}{message}", details)
        self.path = path
        self.line = line
