"""
Brute-force classification of critical points from sublevel homology.

Independent of the persistence reduction: every decision is a rank
computation over the rationals on the chain complexes of the sublevel
sets just below and just above each critical value. A point of index p
with local generator z of H_p(f^{c+e}, f^{c-e}) is

* upper when H_p(f^{c+e}) -> H_p(f^{c+e}, f^{c-e}) vanishes, i.e. the
  boundary of z is not a boundary inside f^{c-e};
* lower when H_p(f^{c+e}, f^{c-e}) -> H_p(M, f^{c-e}) vanishes, i.e. z is
  a relative boundary of (M, f^{c-e});
* homological otherwise.

The partner of an upper point is the highest index p-1 point whose lower
level makes H_p(f^{c+e}, f^{lambda}) -> H_p(f^{c+e}, f^{c-e}) vanish.
"""

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..config import PersistenceSettings, get_settings
from ..models.landscape import CriticalPoint
from ..models.topology import BarannikovComplex, FilteredComplex
from ..utils.exceptions import (
    AmbiguousMatchError,
    OracleSizeExceededError,
    PairingMismatchError,
    UnmatchedEventError,
    ValidationError,
)
from .landscape import vertex_ranks
from .rational import Column, ColumnEchelon, as_column, axpy, kernel_basis, rank

logger = structlog.get_logger(__name__)


def _column(fc: FilteredComplex, cell: int, keep: np.ndarray) -> Column:
    return as_column((face, sign) for face, sign in fc.boundaries[cell] if keep[face])


def _boundary_of(fc: FilteredComplex, chain: Dict[int, Fraction]) -> Column:
    out: Column = {}
    for cell, coef in chain.items():
        for face, sign in fc.boundaries[cell]:
            axpy(out, coef, {face: Fraction(sign)})
    return out


def _cells(fc: FilteredComplex, p: int, mask: np.ndarray) -> np.ndarray:
    return np.flatnonzero((fc.dims == p) & mask)


def _betti(fc: FilteredComplex, keep: np.ndarray) -> List[int]:
    top = fc.max_dim
    ranks = [0] * (top + 2)
    for p in range(1, top + 1):
        ranks[p] = rank(_column(fc, int(c), keep) for c in _cells(fc, p, keep))
    counts = [len(_cells(fc, p, keep)) for p in range(top + 1)]
    return [counts[p] - ranks[p] - ranks[p + 1] for p in range(top + 1)]


def rational_betti(fc: FilteredComplex) -> List[int]:
    """Betti numbers of the whole complex (marks ignored), over the rationals."""
    return _betti(fc, np.ones(fc.n_cells, dtype=bool))


def relative_betti(fc: FilteredComplex) -> List[int]:
    """Ranks of the relative homology encoded by a window-marked complex."""
    return _betti(fc, fc.active & ~fc.quotiented)


class _Levels:
    """Membership masks of f^{c-e} and f^{c+e} for each critical point."""

    def __init__(self, fc: FilteredComplex, points: Sequence[CriticalPoint], epsilon: Optional[float]):
        self.fc = fc
        self.combinatorial = all(pt.vertex is not None for pt in points)
        if self.combinatorial:
            self.ranks = vertex_ranks(fc.vertex_values)
            self.key = self.ranks[fc.lower_vertex]
        elif epsilon is None or not epsilon > 0:
            raise ValidationError("points without vertices need a positive level offset", field="epsilon", value=epsilon)
        self.epsilon = epsilon

    def below(self, pt: CriticalPoint) -> np.ndarray:
        if self.combinatorial:
            mask = self.key < self.ranks[pt.vertex]
        else:
            mask = self.fc.values < pt.value - self.epsilon
        return mask & self.fc.active

    def upto(self, pt: CriticalPoint) -> np.ndarray:
        if self.combinatorial:
            mask = self.key <= self.ranks[pt.vertex]
        else:
            mask = self.fc.values < pt.value + self.epsilon
        return mask & self.fc.active

    def precedes(self, lower: CriticalPoint, upper: CriticalPoint) -> bool:
        if self.combinatorial:
            return self.ranks[lower.vertex] < self.ranks[upper.vertex]
        return lower.value < upper.value


def _local_generator(fc: FilteredComplex, pt: CriticalPoint, upto: np.ndarray, below: np.ndarray) -> Column:
    """The generator of H_p(f^{c+e}, f^{c-e}) as a p-chain on the window cells."""
    window = upto & ~below
    local = _betti(fc, window)
    if sum(local) == 0:
        raise UnmatchedEventError(f"no homology change at critical point {pt.id}", value=pt.value, degree=pt.morse_index)
    if sum(local) > 1 or local[pt.morse_index] != 1:
        raise AmbiguousMatchError(
            f"level window of point {pt.id} carries homology {local}", cell_id=-1, candidates=[pt.id]
        )
    p = pt.morse_index
    cells = _cells(fc, p, window)
    columns = [_column(fc, int(c), window) for c in cells]
    relative_boundaries = ColumnEchelon()
    relative_boundaries.extend(_column(fc, int(c), window) for c in _cells(fc, p + 1, window))
    for combo in kernel_basis(columns):
        chain = {int(cells[j]): coef for j, coef in combo.items()}
        if relative_boundaries.add(chain):
            return chain
    raise UnmatchedEventError(f"no relative cycle found for point {pt.id}", value=pt.value, degree=p)


def _span(fc: FilteredComplex, p: int, keep: np.ndarray) -> ColumnEchelon:
    echelon = ColumnEchelon()
    echelon.extend(_column(fc, int(c), keep) for c in _cells(fc, p, keep))
    return echelon


def classify_by_rank_oracle(
    fc: FilteredComplex,
    points: Sequence[CriticalPoint],
    epsilon: Optional[float] = None,
    settings: Optional[PersistenceSettings] = None,
) -> BarannikovComplex:
    """
    Classify critical points and recover the pairing from homology ranks.

    Args:
        fc: A small filtered complex
        points: Its critical points (combinatorial points carry a vertex)
        epsilon: Level offset around critical values for points without vertices
        settings: Persistence settings (size limit)

    Returns:
        The classified complex

    Raises:
        OracleSizeExceededError: If the complex is larger than the oracle limit
        PairingMismatchError: If the computed classes contradict each other
    """
    settings = settings or get_settings().persistence
    if fc.n_cells > settings.oracle_max_cells:
        raise OracleSizeExceededError(
            f"complex has {fc.n_cells} cells", size=fc.n_cells, limit=settings.oracle_max_cells
        )
    levels = _Levels(fc, points, epsilon)
    everything = fc.active.copy()

    pairing: Dict[int, int] = {}
    uppers: List[Tuple[CriticalPoint, Column, np.ndarray]] = []
    lowers = set()
    for pt in points:
        p = pt.morse_index
        below, upto = levels.below(pt), levels.upto(pt)
        z = _local_generator(fc, pt, upto, below)
        boundary = _boundary_of(fc, z)
        is_upper = bool(boundary) and not _span(fc, p, below).contains(boundary)
        is_lower = _span(fc, p + 1, everything & ~below).contains(z)
        if is_upper and is_lower:
            raise PairingMismatchError(f"point {pt.id} is both upper and lower", differences=[pt.id])
        if is_upper:
            uppers.append((pt, boundary, below))
        elif is_lower:
            lowers.add(pt.id)

    for upper, boundary, below in uppers:
        candidates = sorted(
            (pt for pt in points if pt.morse_index == upper.morse_index - 1 and levels.precedes(pt, upper)),
            key=lambda pt: (pt.value, pt.id),
            reverse=True,
        )
        for candidate in candidates:
            lower_level = levels.below(candidate)
            between = below & ~lower_level
            target = {face: coef for face, coef in boundary.items() if between[face]}
            if not _span(fc, upper.morse_index, between).contains(target):
                pairing[upper.id] = candidate.id
                break
        else:
            raise PairingMismatchError(f"no partner level found for upper point {upper.id}", differences=[upper.id])

    if set(pairing.values()) != lowers:
        raise PairingMismatchError(
            "partners of upper points differ from the lower points",
            differences=sorted(set(pairing.values()) ^ lowers),
        )
    bc = BarannikovComplex.assemble(list(points), pairing, fc.max_dim)
    logger.info("rank_oracle_classified", points=len(points), pairs=len(pairing), betti=bc.betti)
    return bc


def compare_classifications(first: BarannikovComplex, second: BarannikovComplex) -> List[str]:
    """Differences in classes and pairing between two classified complexes."""
    differences = []
    classes_a, classes_b = first.classes(), second.classes()
    for point_id in sorted(set(classes_a) | set(classes_b)):
        a, b = classes_a.get(point_id), classes_b.get(point_id)
        if a != b:
            differences.append(f"point {point_id}: {getattr(a, 'value', a)} vs {getattr(b, 'value', b)}")
    for upper in sorted(set(first.pairing) | set(second.pairing)):
        if first.pairing.get(upper) != second.pairing.get(upper):
            differences.append(f"partner of {upper}: {first.pairing.get(upper)} vs {second.pairing.get(upper)}")
    return differences
