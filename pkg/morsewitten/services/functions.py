"""
Function evaluators supplying f, grad f and Hess f on flat domains.

Two kinds are provided: closed-form trigonometric polynomials (the named
built-ins) and cubic splines through sampled grid values, whose
derivatives come from fourth-order centered differences with the grid
spacing as step.
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import CubicSpline, RectBivariateSpline

from ..utils.exceptions import ConfigurationError, ValidationError
from ..utils.validators import validate_finite


@dataclass(frozen=True)
class TrigTerm:
    """coefficient * cos or sin of 2 pi (k . x / L)."""

    kind: str
    wave: Tuple[int, ...]
    coefficient: float

    def __post_init__(self) -> None:
        if self.kind not in ("cos", "sin"):
            raise ValidationError("trig term kind must be cos or sin", field="kind", value=self.kind)


# name -> terms; coefficients may be overridden positionally
BUILTIN_FUNCTIONS: Dict[str, Tuple[TrigTerm, ...]] = {
    "flat": (),
    "cosine": (TrigTerm("cos", (1,), 1.0),),
    "equal_maxima": (TrigTerm("cos", (2,), 1.0), TrigTerm("sin", (1,), 0.45)),
    "double_well": (
        TrigTerm("cos", (2,), 1.0),
        TrigTerm("sin", (1,), 1.2),
        TrigTerm("cos", (1,), 0.4),
    ),
    "torus_flat": (),
    "torus_cos": (TrigTerm("cos", (1, 0), 1.0), TrigTerm("cos", (0, 1), 1.0)),
    "torus_perturbed": (
        TrigTerm("cos", (1, 0), 1.0),
        TrigTerm("cos", (0, 1), 1.0),
        TrigTerm("sin", (1, 2), 0.3),
    ),
    "torus_double_well": (
        TrigTerm("cos", (2, 0), 1.0),
        TrigTerm("sin", (1, 0), 1.2),
        TrigTerm("cos", (1, 0), 0.4),
        TrigTerm("cos", (0, 1), 1.0),
        TrigTerm("sin", (1, 1), 0.05),
    ),
}


class TrigPolynomial:
    """
    Closed-form trigonometric polynomial on a flat circle or torus.

    Args:
        terms: Terms of the sum
        lengths: Period of each axis
    """

    def __init__(self, terms: Sequence[TrigTerm], lengths: Sequence[float]):
        self.lengths = tuple(float(length) for length in lengths)
        self.dimension = len(self.lengths)
        self.terms = tuple(terms)
        for term in self.terms:
            if len(term.wave) != self.dimension:
                raise ValidationError("wave vector does not match the domain dimension", field="wave", value=term.wave)
        if self.terms:
            self._waves = np.array(
                [[2 * math.pi * k / length for k, length in zip(term.wave, self.lengths)] for term in self.terms]
            )
        else:
            self._waves = np.zeros((0, self.dimension))
        self._coefs = np.array([term.coefficient for term in self.terms])
        self._is_cos = np.array([term.kind == "cos" for term in self.terms], dtype=bool)

    def _phase(self, x: np.ndarray) -> np.ndarray:
        return x @ self._waves.T

    def value(self, x: np.ndarray) -> np.ndarray:
        phase = self._phase(x)
        trig = np.where(self._is_cos, np.cos(phase), np.sin(phase))
        return trig @ self._coefs

    def gradient(self, x: np.ndarray) -> np.ndarray:
        phase = self._phase(x)
        dtrig = np.where(self._is_cos, -np.sin(phase), np.cos(phase)) * self._coefs
        return dtrig @ self._waves

    def hessian(self, x: np.ndarray) -> np.ndarray:
        phase = self._phase(x)
        d2trig = np.where(self._is_cos, -np.cos(phase), -np.sin(phase)) * self._coefs
        outer = np.einsum("ti,tj->tij", self._waves, self._waves)
        return np.einsum("nt,tij->nij", d2trig, outer)

    def describe(self) -> str:
        if not self.terms:
            return "0"
        parts = [f"{t.coefficient:g}*{t.kind}({','.join(str(k) for k in t.wave)})" for t in self.terms]
        return " + ".join(parts)


class SampledFunction:
    """
    Periodic cubic spline through grid samples.

    Values are row-major: node (i, j) holds sample ``j * nx + i``.
    """

    def __init__(self, samples: np.ndarray, lengths: Sequence[float]):
        self.lengths = tuple(float(length) for length in lengths)
        self.dimension = len(self.lengths)
        samples = validate_finite(samples, "samples")
        if self.dimension == 1:
            n = samples.size
            self.shape = (n, 1)
            self.spacing = (self.lengths[0] / n,)
            x = np.arange(n + 1) * self.spacing[0]
            self._spline = CubicSpline(x, np.append(samples, samples[0]), bc_type="periodic")
        else:
            n = int(round(math.sqrt(samples.size)))
            if n * n != samples.size:
                raise ValidationError("torus samples must form a square grid", field="samples", value=samples.size)
            self.shape = (n, n)
            grid = samples.reshape(n, n).T  # grid[i, j]
            self.spacing = (self.lengths[0] / n, self.lengths[1] / n)
            pad = 4
            padded = np.pad(grid, pad, mode="wrap")
            xs = (np.arange(-pad, n + pad)) * self.spacing[0]
            ys = (np.arange(-pad, n + pad)) * self.spacing[1]
            self._spline2 = RectBivariateSpline(xs, ys, padded, kx=3, ky=3, s=0)

    def _wrap(self, x: np.ndarray) -> np.ndarray:
        return np.mod(x, np.asarray(self.lengths))

    def value(self, x: np.ndarray) -> np.ndarray:
        x = self._wrap(x)
        if self.dimension == 1:
            return self._spline(x[:, 0])
        return self._spline2.ev(x[:, 0], x[:, 1])

    def _shifted(self, x: np.ndarray, axis: int, k: float) -> np.ndarray:
        shifted = x.copy()
        shifted[:, axis] += k * self.spacing[axis]
        return self.value(shifted)

    def _d1(self, x: np.ndarray, axis: int) -> np.ndarray:
        s = self.spacing[axis]
        return (
            -self._shifted(x, axis, 2) + 8 * self._shifted(x, axis, 1)
            - 8 * self._shifted(x, axis, -1) + self._shifted(x, axis, -2)
        ) / (12 * s)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return np.stack([self._d1(x, axis) for axis in range(self.dimension)], axis=1)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        n = x.shape[0]
        hess = np.zeros((n, self.dimension, self.dimension))
        for axis in range(self.dimension):
            s = self.spacing[axis]
            hess[:, axis, axis] = (
                -self._shifted(x, axis, 2) + 16 * self._shifted(x, axis, 1) - 30 * self.value(x)
                + 16 * self._shifted(x, axis, -1) - self._shifted(x, axis, -2)
            ) / (12 * s * s)
        if self.dimension == 2:
            sy = self.spacing[1]
            weights = {2: -1.0, 1: 8.0, -1: -8.0, -2: 1.0}
            mixed = np.zeros(n)
            for k, w in weights.items():
                shifted = x.copy()
                shifted[:, 1] += k * sy
                mixed += w * self._d1(shifted, 0)
            mixed /= 12 * sy
            hess[:, 0, 1] = hess[:, 1, 0] = mixed
        return hess

    def describe(self) -> str:
        return f"spline through {self.shape[0]}x{self.shape[1]} samples"


class NegatedFunction:
    """-f for the duality check."""

    def __init__(self, inner):
        self.inner = inner
        self.lengths = inner.lengths
        self.dimension = inner.dimension

    def value(self, x: np.ndarray) -> np.ndarray:
        return -self.inner.value(x)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return -self.inner.gradient(x)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        return -self.inner.hessian(x)

    def describe(self) -> str:
        return f"-({self.inner.describe()})"


def builtin(name: str, lengths: Sequence[float], coefficients: Optional[Sequence[float]] = None) -> TrigPolynomial:
    """
    Build a named trigonometric polynomial.

    Args:
        name: Key of :data:`BUILTIN_FUNCTIONS`
        lengths: Domain periods (one for circles, two for tori)
        coefficients: Optional replacement coefficients, in term order

    Returns:
        The evaluator
    """
    if name not in BUILTIN_FUNCTIONS:
        raise ConfigurationError(f"unknown function {name!r}; known: {sorted(BUILTIN_FUNCTIONS)}", config_key="function")
    terms = BUILTIN_FUNCTIONS[name]
    if coefficients is not None:
        if len(coefficients) != len(terms):
            raise ConfigurationError(
                f"function {name!r} takes {len(terms)} coefficients, got {len(coefficients)}",
                config_key="coefficients",
            )
        terms = tuple(TrigTerm(t.kind, t.wave, float(c)) for t, c in zip(terms, coefficients))
    expected_dim = len(terms[0].wave) if terms else len(lengths)
    if expected_dim != len(lengths):
        raise ConfigurationError(f"function {name!r} needs a {expected_dim}-dimensional domain", config_key="domain")
    return TrigPolynomial(terms, lengths)


def load_samples(path: Union[str, Path], lengths: Sequence[float]) -> SampledFunction:
    """Read a plain-text file with one value per grid node (row-major)."""
    try:
        values = np.loadtxt(path, dtype=float, ndmin=1).ravel()
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read samples file {path}: {exc}", config_key="samples_file") from exc
    return SampledFunction(values, lengths)
