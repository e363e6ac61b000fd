"""
Utilities for morse-witten-lab: exceptions, logging, validators and helpers.
"""

from .exceptions import MorseWittenError, NoConvergenceWarning, NonManifoldWarning
from .helpers import asset_path, ensure_dir, package_versions, parse_float, relative_error
from .logging import setup_logging
from .validators import validate_finite, validate_h_list, validate_symmetric, validate_window

__all__ = [
    "MorseWittenError",
    "NoConvergenceWarning",
    "NonManifoldWarning",
    "asset_path",
    "ensure_dir",
    "package_versions",
    "parse_float",
    "relative_error",
    "setup_logging",
    "validate_finite",
    "validate_h_list",
    "validate_symmetric",
    "validate_window",
]
