"""
Helper utilities for morse-witten-lab.

Small functions shared by the services: periodic geometry, float
formatting, hashing and provenance.
"""

import hashlib
import math
import platform
from importlib import metadata
from pathlib import Path
from typing import Dict, Iterable, Sequence, Union

import numpy as np


def periodic_delta(a: np.ndarray, b: np.ndarray, lengths: Sequence[float], periodic: Sequence[bool]) -> np.ndarray:
    """
    Componentwise difference a - b wrapped into [-L/2, L/2) on periodic axes.

    Args:
        a: Points, shape (..., d)
        b: Points, shape (..., d)
        lengths: Period per axis
        periodic: Whether each axis wraps

    Returns:
        Wrapped differences with the shape of ``a - b``
    """
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    for axis, (length, wraps) in enumerate(zip(lengths, periodic)):
        if wraps:
            diff[..., axis] = (diff[..., axis] + 0.5 * length) % length - 0.5 * length
    return diff


def periodic_distance(a: Sequence[float], b: Sequence[float], lengths: Sequence[float], periodic: Sequence[bool]) -> float:
    """Euclidean distance on a flat torus / circle / line product."""
    return float(np.linalg.norm(periodic_delta(np.asarray(a), np.asarray(b), lengths, periodic)))


def format_float(value: float, float_format: str = "%.17g") -> str:
    """Format a float reproducibly; infinities as ``inf``/``-inf``."""
    if value is None:
        return ""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float_format % value


def parse_float(text: str) -> float:
    """Inverse of :func:`format_float` for window levels and table cells."""
    text = text.strip().lower()
    if text in ("inf", "+inf", "infinity"):
        return math.inf
    if text in ("-inf", "-infinity"):
        return -math.inf
    return float(text)


def text_hash(text: Union[str, bytes]) -> str:
    """SHA-256 hex digest of a text."""
    data = text.encode("utf-8") if isinstance(text, str) else text
    return hashlib.sha256(data).hexdigest()


def file_hash(path: Union[str, Path]) -> str:
    """SHA-256 hex digest of a file's bytes."""
    return text_hash(Path(path).read_bytes())


def package_versions(names: Iterable[str] = ("morse-witten-lab", "numpy", "scipy", "pydantic", "pandas")) -> Dict[str, str]:
    """Installed versions of the packages that shape numeric output."""
    versions = {"python": platform.python_version()}
    for name in names:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "not installed"
    return versions


def ensure_dir(path: Union[str, Path]) -> Path:
    """Create ``path`` (and parents) if missing and return it."""
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def relative_error(measured: float, predicted: float) -> float:
    """|measured / predicted - 1|, or inf when the prediction is zero."""
    if predicted == 0:
        return 0.0 if measured == 0 else math.inf
    return abs(measured / predicted - 1.0)


ASSETS_DIR = Path(__file__).resolve().parent.parent / "assets"


def asset_path(name: str) -> Path:
    """Path of a bundled asset (simplicial surfaces, example experiments)."""
    return ASSETS_DIR / name
