"""
Validation utilities for morse-witten-lab.

This module provides the checks shared by experiment loading, complex
construction and operator assembly.
"""

from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .exceptions import NonFiniteValueError, NotSymmetricError, ValidationError


def validate_resolution(resolution: int, low_exp: int = 5, high_exp: int = 13) -> int:
    """
    Validate a grid resolution.

    Args:
        resolution: Number of grid nodes per periodic direction
        low_exp: Smallest allowed power of two
        high_exp: Largest allowed power of two

    Returns:
        The resolution, unchanged

    Raises:
        ValidationError: If it is not a power of two in range
    """
    if resolution <= 0 or resolution & (resolution - 1):
        raise ValidationError("resolution must be a power of two", field="resolution", value=resolution)
    if not (2 ** low_exp <= resolution <= 2 ** high_exp):
        raise ValidationError(
            f"resolution must lie between 2^{low_exp} and 2^{high_exp}",
            field="resolution",
            value=resolution,
        )
    return resolution


def validate_h_list(h_values: Iterable[float]) -> List[float]:
    """
    Validate a list of semiclassical parameters.

    Args:
        h_values: Values of h

    Returns:
        The values as floats, sorted descending

    Raises:
        ValidationError: If any value is not a positive finite number or
            if values repeat
    """
    values = [float(h) for h in h_values]
    for h in values:
        if not np.isfinite(h) or h <= 0:
            raise ValidationError("h values must be positive and finite", field="h_list", value=h)
    if len(set(values)) != len(values):
        raise ValidationError("h values must be distinct", field="h_list", value=values)
    return sorted(values, reverse=True)


def validate_window(a: float, b: float) -> Tuple[float, float]:
    """
    Validate window levels.

    Args:
        a: Lower level (may be -inf)
        b: Upper level (may be +inf)

    Returns:
        The pair (a, b)
    """
    if np.isnan(a) or np.isnan(b):
        raise ValidationError("window levels must not be NaN", field="window", value=(a, b))
    if not a < b:
        raise ValidationError("window requires a < b", field="window", value=(a, b))
    return float(a), float(b)


def validate_finite(values: Sequence[float], what: str = "values") -> np.ndarray:
    """Return ``values`` as a float array, raising if any entry is not finite."""
    arr = np.asarray(values, dtype=float)
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise NonFiniteValueError(f"{what} contain {bad.size} non-finite entries", indices=bad.tolist())
    return arr


def matrix_asymmetry(matrix) -> float:
    """Max absolute entry of A - A^T for dense or sparse input."""
    if sp.issparse(matrix):
        diff = (matrix - matrix.T).tocoo()
        return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0
    arr = np.asarray(matrix, dtype=float)
    return float(np.max(np.abs(arr - arr.T))) if arr.size else 0.0


def validate_symmetric(matrix, tolerance: float, scale: Optional[float] = None) -> float:
    """
    Check that a matrix is symmetric.

    Args:
        matrix: Dense or sparse square matrix
        tolerance: Allowed asymmetry, relative to ``scale`` when given
        scale: Optional norm the tolerance is relative to

    Returns:
        The measured asymmetry

    Raises:
        NotSymmetricError: If the asymmetry exceeds the tolerance
    """
    asym = matrix_asymmetry(matrix)
    limit = tolerance * (scale if scale else 1.0)
    if asym > limit:
        raise NotSymmetricError(f"matrix asymmetry {asym:.3e} exceeds {limit:.3e}", asymmetry=asym, tolerance=limit)
    return asym
