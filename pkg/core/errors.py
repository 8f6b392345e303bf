"""
Exception hierarchy shared by the estimation, classification and harness modules.
"""

from typing import Optional


class FuncGaussError(Exception):
    """Base class for every error raised by this package."""
    pass


class StructuralError(FuncGaussError):
    """Raised on shape, grid or bandwidth mismatches and empty inputs."""
    pass


class InsufficientDataError(FuncGaussError):
    """Raised when a class has too few curves for the requested estimate."""
    pass


class AdmissibilityError(FuncGaussError):
    """Raised when a pair of triangular specs violates a factor precondition."""
    pass


class SingularityError(FuncGaussError):
    """Raised when a denominator vanishes: the two measures may be mutually singular."""
    pass


class RegimeError(FuncGaussError):
    """Raised when the u(0)>0 estimator is asked to work on u(0)=0 data."""
    pass


class FitFailureError(FuncGaussError):
    """Raised when a parametric fit produces values outside the model's domain."""
    pass


class SelectionFailureError(FuncGaussError):
    """Raised when every cross-validation candidate errors out."""
    pass


class DegenerateProjectionError(FuncGaussError):
    """Raised when not even one PLS direction can be extracted."""
    pass


class ConfigError(FuncGaussError):
    """Raised on invalid experiment configurations."""
    pass


class IngestionError(FuncGaussError):
    """Raised when a curve CSV cannot be turned into a sample."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")

        if location:
            message = f"{message} ({', '.join(location)})"

        super().__init__(message)
        self.row = row
        self.column = column
