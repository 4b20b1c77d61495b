"""Exception hierarchy with machine-readable payloads."""

from typing import Any, Dict, Optional

import numpy as np


def _jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays inside error details to plain JSON types."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


class HomogenizationError(Exception):
    """Base class for all errors raised by the toolkit."""

    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = dict(details or {})

    def to_dict(self) -> Dict[str, Any]:
        """Return the ``{error, message, details}`` record written to stderr."""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": _jsonable(self.details),
        }


class ValidationError(HomogenizationError, ValueError):
    """Bad configuration or an input that violates an operation's preconditions."""

    exit_code = 2


class NumericalError(HomogenizationError):
    """A computation could not produce an admissible result."""

    exit_code = 3


class AdmissibilityError(NumericalError):
    """Height left the tubular band, the table range, or the time horizon."""


class ProjectionError(NumericalError):
    """Newton projection onto the interface did not converge."""


class ConvergenceError(NumericalError):
    """An iterative method hit its iteration cap."""


class MeshingError(NumericalError):
    """Mesh generation or tiling failed."""


class TableError(NumericalError):
    """Coefficient table is incompatible, corrupted or invalid."""
