"""
Custom exceptions for morse-witten-lab.

This module defines the exception hierarchy raised by the landscape,
topology and spectral layers, plus the two non-fatal warning categories.
Every exception carries an error code, structured details and the CLI exit
code it maps to.
"""

from typing import Any, Dict, List, Optional, Sequence


class MorseWittenError(Exception):
    """Base exception class for morse-witten-lab."""

    exit_code = 3

    def __init__(self, message: str, error_code: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to dictionary."""
        return {
            "error_type": self.__class__.__name__,
            "message": self.message,
            "error_code": self.error_code,
            "details": self.details,
        }


class ValidationError(MorseWittenError):
    """Raised when user supplied data fails validation."""

    exit_code = 2

    def __init__(self, message: str, field: Optional[str] = None, value: Optional[Any] = None):
        super().__init__(message, error_code="VALIDATION_ERROR")
        self.field = field
        self.value = value
        self.details.update({
            "field": field,
            "value": str(value) if value is not None else None,
        })


class ConfigurationError(MorseWittenError):
    """Raised when configuration is invalid."""

    exit_code = 2

    def __init__(self, message: str, config_key: Optional[str] = None):
        super().__init__(message, error_code="CONFIGURATION_ERROR")
        self.config_key = config_key
        self.details.update({"config_key": config_key})


# Landscape


class LandscapeError(MorseWittenError):
    """Raised when a Morse function or its critical set is unusable."""

    def __init__(self, message: str, error_code: str = "LANDSCAPE_ERROR", point_ids: Optional[Sequence[int]] = None):
        super().__init__(message, error_code=error_code)
        self.point_ids = list(point_ids or [])
        self.details.update({"point_ids": self.point_ids})


class DegenerateCriticalError(LandscapeError):
    """Raised when a converged critical point has a singular Hessian."""

    def __init__(self, message: str, position: Optional[Sequence[float]] = None, min_abs_eig: Optional[float] = None):
        super().__init__(message, error_code="DEGENERATE_CRITICAL")
        self.details.update({
            "position": list(position) if position is not None else None,
            "min_abs_eig": min_abs_eig,
        })


class NotSymmetricError(LandscapeError):
    """Raised when a matrix expected to be symmetric is not."""

    def __init__(self, message: str, asymmetry: float, tolerance: float):
        super().__init__(message, error_code="NOT_SYMMETRIC")
        self.details.update({"asymmetry": asymmetry, "tolerance": tolerance})


class HypothesisViolatedError(LandscapeError):
    """Raised when the excellent-Morse or distinct-gap hypotheses fail."""

    def __init__(self, message: str, violations: Optional[List[Any]] = None):
        super().__init__(message, error_code="HYPOTHESIS_VIOLATED")
        self.details.update({"violations": [str(v) for v in violations or []]})


# Topology


class TopologyError(MorseWittenError):
    """Raised by complex construction, reduction and matching."""

    def __init__(self, message: str, error_code: str = "TOPOLOGY_ERROR", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code=error_code, details=details)


class SizeExceededError(TopologyError):
    """Raised when a requested complex is larger than allowed."""

    def __init__(self, message: str, size: int, limit: int):
        super().__init__(message, error_code="SIZE_EXCEEDED", details={"size": size, "limit": limit})


class NonFiniteValueError(TopologyError):
    """Raised when vertex values contain NaN or infinity."""

    def __init__(self, message: str, indices: Optional[Sequence[int]] = None):
        super().__init__(message, error_code="NON_FINITE_VALUE", details={"indices": list(indices or [])[:20]})


class ComplexParseError(TopologyError):
    """Raised when a simplicial complex file cannot be parsed."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message, error_code="PARSE_ERROR", details={"path": path, "line": line})


class OrientationError(TopologyError):
    """Raised when declared top-simplex orientations conflict."""

    def __init__(self, message: str, edge: Optional[Sequence[int]] = None):
        super().__init__(message, error_code="ORIENTATION_ERROR", details={"edge": list(edge or [])})


class WindowOnCriticalValueError(TopologyError):
    """Raised when a window level coincides with a critical value."""

    def __init__(self, message: str, level: float, value: float):
        super().__init__(message, error_code="WINDOW_ON_CRITICAL_VALUE", details={"level": level, "value": value})


class UnmatchedEventError(TopologyError):
    """Raised when a significant persistence event has no critical value."""

    def __init__(self, message: str, cell_id: Optional[int] = None, value: Optional[float] = None, degree: Optional[int] = None):
        super().__init__(
            message,
            error_code="UNMATCHED_EVENT",
            details={"cell_id": cell_id, "value": value, "degree": degree},
        )


class AmbiguousMatchError(TopologyError):
    """Raised when two critical values match one persistence event."""

    def __init__(self, message: str, cell_id: int, candidates: Sequence[int]):
        super().__init__(
            message,
            error_code="AMBIGUOUS_MATCH",
            details={"cell_id": cell_id, "candidates": list(candidates)},
        )


class OracleSizeExceededError(TopologyError):
    """Raised when the brute-force rank oracle is asked for a large complex."""

    def __init__(self, message: str, size: int, limit: int):
        super().__init__(message, error_code="ORACLE_SIZE_EXCEEDED", details={"size": size, "limit": limit})


class PairingMismatchError(TopologyError):
    """Raised when reduction and the rank oracle disagree on a complex."""

    def __init__(self, message: str, differences: Sequence[Any]):
        super().__init__(message, error_code="PAIRING_MISMATCH", details={"differences": [str(d) for d in differences]})


# Spectral


class SpectralError(MorseWittenError):
    """Raised by prediction, assembly and eigen solves."""

    def __init__(self, message: str, error_code: str = "SPECTRAL_ERROR", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code=error_code, details=details)


class IndexMismatchError(SpectralError):
    """Raised when a lower/upper pair does not differ by one in index."""

    def __init__(self, message: str, lower_index: int, upper_index: int):
        super().__init__(
            message,
            error_code="INDEX_MISMATCH",
            details={"lower_index": lower_index, "upper_index": upper_index},
        )


class ZeroHessianEigenvalueError(SpectralError):
    """Raised when a prefactor needs a Hessian eigenvalue that is zero or missing."""

    def __init__(self, message: str, point_id: Optional[int] = None):
        super().__init__(message, error_code="ZERO_HESSIAN_EIGENVALUE", details={"point_id": point_id})


class PredictionUnavailableError(SpectralError):
    """Raised when a prediction without a prefactor is evaluated."""

    def __init__(self, message: str, point_id: int):
        super().__init__(message, error_code="PREDICTION_UNAVAILABLE", details={"point_id": point_id})


class WeightOverflowError(SpectralError):
    """Raised when conjugation weights across one cell become too large."""

    def __init__(self, message: str, ratio: float, guard: float):
        super().__init__(message, error_code="WEIGHT_OVERFLOW", details={"ratio": ratio, "guard": guard})


class BoundaryMismatchError(SpectralError):
    """Raised when a boundary condition does not fit the domain."""

    def __init__(self, message: str, domain_kind: Optional[str] = None):
        super().__init__(message, error_code="BOUNDARY_MISMATCH", details={"domain_kind": domain_kind})


class SolverStallError(SpectralError):
    """Raised when an eigen solve misses its residual target; carries partial results."""

    def __init__(self, message: str, partial: Optional[Any] = None, residual: Optional[float] = None):
        super().__init__(message, error_code="SOLVER_STALL", details={"residual": residual})
        self.partial = partial


class InsufficientDataError(SpectralError):
    """Raised when a fit gets too few rows."""

    def __init__(self, message: str, rows: int, required: int):
        super().__init__(message, error_code="INSUFFICIENT_DATA", details={"rows": rows, "required": required})


class FloorContaminationError(SpectralError):
    """Raised when a quantity to verify lies below the eigenvalue floor."""

    def __init__(self, message: str, h: Optional[float] = None, value: Optional[float] = None, floor: Optional[float] = None):
        super().__init__(
            message,
            error_code="FLOOR_CONTAMINATION",
            details={"h": h, "value": value, "floor": floor},
        )


# Warnings


class NoConvergenceWarning(UserWarning):
    """Newton seeds left part of the domain without a root."""


class NonManifoldWarning(UserWarning):
    """A simplicial input is not a closed surface."""
