"""
Morse functions on flat domains and their critical points.

Critical points are located by batched Newton iteration from a seed grid,
Hessian spectra come from cyclic Jacobi rotations, and the standing
hypotheses (nondegeneracy, distinct values, distinct gaps) are checked
and reported. Critical vertices of a filtered complex are found from the
local relative homology of each lower star.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, List, Optional, Protocol, Sequence, Tuple

import numpy as np
import structlog

from ..config import LandscapeSettings, get_settings
from ..models.landscape import (
    CriticalPoint,
    Domain,
    DomainKind,
    HypothesisReport,
    Violation,
)
from ..models.topology import BarannikovComplex, FilteredComplex
from ..utils.exceptions import (
    DegenerateCriticalError,
    LandscapeError,
    NoConvergenceWarning,
    ValidationError,
)
from ..utils.helpers import periodic_distance
from ..utils.validators import validate_symmetric
from .functions import NegatedFunction
from .rational import as_column, rank

logger = structlog.get_logger(__name__)


class Evaluator(Protocol):
    """Anything supplying f, grad f and Hess f on (n, d) point arrays."""

    lengths: Tuple[float, ...]
    dimension: int

    def value(self, x: np.ndarray) -> np.ndarray: ...

    def gradient(self, x: np.ndarray) -> np.ndarray: ...

    def hessian(self, x: np.ndarray) -> np.ndarray: ...

    def describe(self) -> str: ...


def _as_points(x, dimension: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim <= 1:
        arr = arr.reshape(-1, dimension)
    return arr


@dataclass(frozen=True)
class MorseFunction:
    """A smooth function on a flat domain, given by an evaluator."""

    evaluator: Evaluator
    domain: Domain
    name: str = "f"

    def __post_init__(self) -> None:
        if self.domain.kind == DomainKind.ABSTRACT_COMPLEX:
            raise ValidationError("Morse functions live on flat domains", field="domain", value=self.domain.kind.value)
        if len(self.domain.lengths) != self.evaluator.dimension:
            raise ValidationError(
                "evaluator dimension does not match the domain",
                field="domain",
                value=(self.evaluator.dimension, len(self.domain.lengths)),
            )

    @property
    def dimension(self) -> int:
        return self.evaluator.dimension

    def value(self, x) -> np.ndarray:
        return self.evaluator.value(_as_points(x, self.dimension))

    def gradient(self, x) -> np.ndarray:
        return self.evaluator.gradient(_as_points(x, self.dimension))

    def hessian(self, x) -> np.ndarray:
        return self.evaluator.hessian(_as_points(x, self.dimension))

    def grid_nodes(self, shape: Sequence[int]) -> np.ndarray:
        """Nodes ``(i * Lx / nx, j * Ly / ny)`` in row-major order (i fastest)."""
        axes = [np.arange(n) * (length / n) for n, length in zip(shape, self.domain.lengths)]
        if self.dimension == 1:
            return axes[0][:, None]
        xx, yy = np.meshgrid(axes[0], axes[1], indexing="xy")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def sample_grid(self, shape: Sequence[int]) -> np.ndarray:
        """Values at :meth:`grid_nodes`."""
        return self.value(self.grid_nodes(shape))

    def negated(self) -> "MorseFunction":
        domain = self.domain
        if domain.kind == DomainKind.INTERVAL and domain.window is not None:
            a, b = domain.window
            domain = Domain.interval(-b, -a, domain.lengths[0])
        return MorseFunction(NegatedFunction(self.evaluator), domain, name=f"-{self.name}")

    def check_periodicity(self, samples: int = 16, tolerance: float = 1e-9) -> float:
        """
        Largest |f(x + L e_i) - f(x)| over a few sample points.

        Raises:
            ValidationError: If the evaluator is not periodic within tolerance
        """
        rng = np.random.default_rng(0)
        lengths = np.asarray(self.domain.lengths)
        x = rng.uniform(0.0, 1.0, size=(samples, self.dimension)) * lengths
        base = self.value(x)
        worst = 0.0
        for axis in range(self.dimension):
            shifted = x.copy()
            shifted[:, axis] += lengths[axis]
            worst = max(worst, float(np.max(np.abs(self.value(shifted) - base))))
        scale = max(1.0, float(np.max(np.abs(base))))
        if worst > tolerance * scale:
            raise ValidationError("function is not periodic on the domain", field="evaluator", value=worst)
        return worst


def hessian_spectrum(
    matrix, settings: Optional[LandscapeSettings] = None, return_vectors: bool = False
):
    """
    Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.

    Args:
        matrix: d x d symmetric matrix
        settings: Landscape tolerances
        return_vectors: Also return the orthogonal eigenvector matrix

    Returns:
        Ascending eigenvalues (and the eigenvectors as columns)

    Raises:
        NotSymmetricError: If the asymmetry exceeds ``symmetry_tol``
    """
    settings = settings or get_settings().landscape
    a = np.array(matrix, dtype=float, ndmin=2)
    n = a.shape[0]
    norm = float(np.max(np.abs(a))) if a.size else 0.0
    validate_symmetric(a, settings.symmetry_tol, scale=max(norm, 1.0))
    original = 0.5 * (a + a.T)
    a = original.copy()
    vectors = np.eye(n)

    for _ in range(settings.jacobi_max_sweeps):
        off = math.sqrt(float(np.sum(np.triu(a, 1) ** 2)))
        if off <= np.finfo(float).eps * max(norm, np.finfo(float).tiny):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                vectors = vectors @ rot

    eigs = np.diag(a).copy()
    order = np.argsort(eigs, kind="stable")
    eigs, vectors = eigs[order], vectors[:, order]
    residual = float(np.max(np.abs(original - vectors @ np.diag(eigs) @ vectors.T))) if n else 0.0
    if residual > 1e-12 * max(norm, 1e-300):
        raise LandscapeError(
            f"Jacobi reconstruction residual {residual:.3e} too large", error_code="JACOBI_RESIDUAL"
        )
    if return_vectors:
        return eigs, vectors
    return eigs


def _seeds(function: MorseFunction, resolution: int) -> np.ndarray:
    shape = [resolution] * function.dimension
    return function.grid_nodes(shape)


def _newton(function: MorseFunction, x: np.ndarray, step_cap: float, settings: LandscapeSettings, tol: float):
    """Batched Newton with the step length capped at one seed spacing."""
    lengths = np.asarray(function.domain.lengths)
    converged = np.zeros(len(x), dtype=bool)
    for _ in range(settings.newton_max_iter):
        active = ~converged
        if not active.any():
            break
        xa = x[active]
        grad = function.gradient(xa)
        hess = function.hessian(xa)
        step = np.einsum("nij,nj->ni", np.linalg.pinv(hess), grad)
        length = np.linalg.norm(step, axis=1)
        scale = np.minimum(1.0, step_cap / np.maximum(length, 1e-300))
        xa = np.mod(xa - step * scale[:, None], lengths)
        x[active] = xa
        converged[active] = np.linalg.norm(function.gradient(xa), axis=1) < tol
    return x, converged


def _merge(points: np.ndarray, function: MorseFunction, tolerance: float) -> List[np.ndarray]:
    lengths = function.domain.lengths
    periodic = function.domain.periodic
    unique: List[np.ndarray] = []
    for x in points:
        if not any(periodic_distance(x, y, lengths, periodic) < tolerance for y in unique):
            unique.append(x)
    return unique


def find_critical_points(
    function: MorseFunction, seed_resolution: int = 64, settings: Optional[LandscapeSettings] = None
) -> List[CriticalPoint]:
    """
    Locate all critical points by Newton iteration from a seed grid.

    Args:
        function: The Morse function
        seed_resolution: Seeds per axis (at least 8)
        settings: Landscape tolerances

    Returns:
        Points sorted by value with ids 0..n-1, class unclassified

    Raises:
        ValidationError: If the seed resolution is too small
        DegenerateCriticalError: If a root has a (numerically) singular Hessian
    """
    settings = settings or get_settings().landscape
    if seed_resolution < 8:
        raise ValidationError("seed resolution must be at least 8", field="seed_resolution", value=seed_resolution)

    seeds = _seeds(function, seed_resolution)
    grad_scale = max(1.0, float(np.max(np.abs(function.gradient(seeds)))))
    tol = settings.newton_tol * grad_scale
    step_cap = min(function.domain.lengths) / seed_resolution
    roots, converged = _newton(function, seeds.copy(), step_cap, settings, tol)

    stalled = int(np.sum(~converged))
    if stalled:
        residuals = np.linalg.norm(function.gradient(roots[~converged]), axis=1)
        ridge = int(np.sum(residuals < 1e3 * tol))
        if ridge:
            message = f"{ridge} Newton seeds stalled near a residual ridge"
            logger.warning("newton_no_convergence", stalled=stalled, ridge=ridge)
            warnings.warn(message, NoConvergenceWarning, stacklevel=2)

    merged = _merge(roots[converged], function, settings.merge_factor * function.domain.diameter)
    found = []
    for x in merged:
        hess = function.hessian(x)[0]
        eigs = hessian_spectrum(hess, settings)
        max_entry = float(np.max(np.abs(hess)))
        min_abs = float(np.min(np.abs(eigs)))
        if min_abs < settings.degeneracy_factor * max(max_entry, 1e-300):
            raise DegenerateCriticalError(
                f"degenerate critical point at {tuple(np.round(x, 12))}", position=tuple(x), min_abs_eig=min_abs
            )
        value = float(function.value(x)[0])
        found.append((value, tuple(float(c) for c in x), tuple(float(e) for e in eigs)))

    if function.domain.kind == DomainKind.INTERVAL:
        a, b = function.domain.window
        found = [item for item in found if a < item[0] < b]

    found.sort()
    points = [
        CriticalPoint(
            id=i,
            position=position,
            value=value,
            morse_index=sum(1 for e in eigs if e < 0),
            hessian_eigs=eigs,
        )
        for i, (value, position, eigs) in enumerate(found)
    ]

    if function.domain.euler_characteristic is not None:
        chi = sum((-1) ** pt.morse_index for pt in points)
        if chi != function.domain.euler_characteristic:
            message = f"index alternating sum {chi} differs from the Euler characteristic; points were missed"
            logger.warning("euler_mismatch", chi=chi, expected=function.domain.euler_characteristic)
            warnings.warn(message, NoConvergenceWarning, stacklevel=2)

    logger.info(
        "critical_points_found",
        function=function.name,
        count=len(points),
        by_index=[sum(1 for pt in points if pt.morse_index == p) for p in range(function.dimension + 1)],
    )
    return points


def _value_tolerance(values: Iterable[float], settings: LandscapeSettings) -> float:
    values = list(values)
    span = (max(values) - min(values)) if values else 0.0
    return settings.value_factor * (span if span > 0 else 1.0)


def _close_neighbours(items: List[Tuple[float, Tuple[int, ...]]], tol: float) -> List[Violation]:
    items = sorted(items)
    return [
        Violation(point_ids=first[1] + second[1], description=f"values {first[0]:.12g} and {second[0]:.12g} coincide")
        for first, second in zip(items, items[1:])
        if second[0] - first[0] <= tol
    ]


def check_gaps(bc: BarannikovComplex, settings: Optional[LandscapeSettings] = None) -> Tuple[bool, List[Violation]]:
    """Whether the pair gaps f(upper) - f(lower) are pairwise distinct."""
    settings = settings or get_settings().landscape
    tol = _value_tolerance((pt.value for pt in bc.points), settings)
    items = [(gap, (upper, lower)) for upper, lower, gap in bc.gaps()]
    violations = _close_neighbours(items, tol)
    return not violations, violations


def check_hypotheses(
    points: Sequence[CriticalPoint],
    pairing: Optional[BarannikovComplex] = None,
    settings: Optional[LandscapeSettings] = None,
) -> HypothesisReport:
    """
    Check nondegeneracy, distinct critical values and (optionally) distinct gaps.

    Never raises; every failure becomes a violation in the report.
    """
    settings = settings or get_settings().landscape
    violations: List[Violation] = []

    nondegenerate = True
    for pt in points:
        if not pt.has_hessian:
            continue
        largest = max(abs(e) for e in pt.hessian_eigs)
        if min(abs(e) for e in pt.hessian_eigs) <= settings.degeneracy_factor * largest:
            nondegenerate = False
            violations.append(Violation(point_ids=(pt.id,), description="degenerate Hessian"))

    tol = _value_tolerance((pt.value for pt in points), settings)
    value_violations = _close_neighbours([(pt.value, (pt.id,)) for pt in points], tol)
    violations.extend(value_violations)

    distinct_gaps, gaps_checked = True, False
    if pairing is not None:
        gaps_checked = True
        distinct_gaps, gap_violations = check_gaps(pairing, settings)
        violations.extend(
            Violation(point_ids=v.point_ids, description=v.description.replace("values", "gaps")) for v in gap_violations
        )

    report = HypothesisReport(
        nondegenerate=nondegenerate,
        distinct_values=not value_violations,
        distinct_gaps=distinct_gaps,
        gaps_checked=gaps_checked,
        violations=violations,
    )
    logger.debug("hypotheses_checked", excellent=report.excellent, violations=len(violations))
    return report


def vertex_ranks(vertex_values: np.ndarray) -> np.ndarray:
    """Rank of each vertex in the (value, id) order."""
    n = len(vertex_values)
    order = np.lexsort((np.arange(n), vertex_values))
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = np.arange(n)
    return ranks


def _local_betti(fc: FilteredComplex, star: np.ndarray) -> List[int]:
    """Betti numbers of the relative chain complex spanned by one lower star."""
    members = set(int(c) for c in star)
    dims = fc.dims
    top = fc.max_dim
    ranks = [0] * (top + 2)
    for p in range(1, top + 1):
        columns = [
            as_column((face, sign) for face, sign in fc.boundaries[c] if face in members)
            for c in star
            if dims[c] == p
        ]
        ranks[p] = rank(columns)
    counts = [int(np.sum(dims[star] == p)) for p in range(top + 1)]
    return [counts[p] - ranks[p] - ranks[p + 1] for p in range(top + 1)]


def critical_points_from_complex(fc: FilteredComplex) -> List[CriticalPoint]:
    """
    Critical vertices of a lower-star filtration.

    A vertex is critical of index p when the relative homology of its lower
    star is one-dimensional and concentrated in degree p.

    Raises:
        DegenerateCriticalError: If a lower star carries more than one class
    """
    ranks = vertex_ranks(fc.vertex_values)
    active = np.flatnonzero(fc.active)
    by_vertex = {}
    for cell in active[np.argsort(fc.lower_vertex[active], kind="stable")]:
        by_vertex.setdefault(int(fc.lower_vertex[cell]), []).append(int(cell))

    found = []
    for vertex, cells in by_vertex.items():
        betti = _local_betti(fc, np.asarray(cells))
        total = sum(betti)
        if total == 0:
            continue
        if total > 1:
            position = tuple(fc.coordinates[vertex]) if fc.coordinates is not None else (float(vertex),)
            raise DegenerateCriticalError(
                f"vertex {vertex} carries local homology {betti}", position=position, min_abs_eig=0.0
            )
        degree = betti.index(1)
        found.append((int(ranks[vertex]), vertex, degree))

    found.sort()
    points = []
    for i, (_, vertex, degree) in enumerate(found):
        position = tuple(float(c) for c in fc.coordinates[vertex]) if fc.coordinates is not None else (float(vertex),)
        points.append(
            CriticalPoint(
                id=i,
                position=position,
                value=float(fc.vertex_values[vertex]),
                morse_index=degree,
                vertex=vertex,
            )
        )
    logger.info(
        "combinatorial_critical_points",
        count=len(points),
        by_index=[sum(1 for pt in points if pt.morse_index == p) for p in range(fc.max_dim + 1)],
    )
    return points
