"""
morse-witten-lab - Morse-Barannikov complexes and Witten Laplacian spectra

Classifies the critical points of a Morse function by persistent homology,
predicts the exponentially small eigenvalues of the Witten Laplacian from
that classification, and checks the predictions against discrete operators.
"""

__version__ = "0.1.0"
__description__ = "Morse-Barannikov complexes and small eigenvalues of Witten Laplacians"

from .config import Settings, get_settings

__all__ = [
    "Settings",
    "get_settings",
    "__version__",
    "__description__",
]
