"""
Persistence reduction and the Barannikov classification.

The boundary matrix is reduced column by column in filtration order over
the rationals, degrees top-down with clearing. Lowest nonzero entries give
the persistence pairs; pairs whose persistence exceeds the noise floor
and the essential classes are then matched to critical values, death
cells becoming upper points and birth cells lower points.
"""

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
import structlog

from ..models.landscape import CriticalPoint, PointClass
from ..models.topology import (
    BarannikovComplex,
    BasisReason,
    EssentialClass,
    FilteredComplex,
    PersistencePair,
    PersistencePairing,
    RelativeBasis,
    RelativeGenerator,
    WindowSpec,
)
from ..utils.exceptions import (
    AmbiguousMatchError,
    PairingMismatchError,
    UnmatchedEventError,
    WindowOnCriticalValueError,
)
from .rank_oracle import rational_betti
from .rational import Column, axpy

logger = structlog.get_logger(__name__)


def reduce(fc: FilteredComplex) -> PersistencePairing:
    """
    Reduce the boundary matrix of ``fc`` (relative cells only when marked).

    Rows and pivots are keyed by order index, so the pivot of a column is
    its latest face in the filtration.

    Returns:
        Pairs sorted by birth order and essentials sorted by order
    """
    keep = fc.active & ~fc.quotiented
    order = fc.order
    sorted_ids = fc.sorted_ids
    pivots: Dict[int, Column] = {}
    births: Set[int] = set()
    deaths: Set[int] = set()
    pairs: List[PersistencePair] = []

    for p in range(fc.max_dim, 0, -1):
        for cell in fc.ids_of_dim(p, relative=True):
            cell = int(cell)
            if cell in births:
                continue
            column: Column = {
                int(order[face]): Fraction(sign) for face, sign in fc.boundaries[cell] if keep[face]
            }
            while column:
                low = max(column)
                base = pivots.get(low)
                if base is None:
                    break
                axpy(column, -column[low], base)
            if not column:
                continue
            low = max(column)
            scale = column[low]
            pivots[low] = {row: value / scale for row, value in column.items()}
            birth = int(sorted_ids[low])
            births.add(birth)
            deaths.add(cell)
            pairs.append(
                PersistencePair(
                    birth=birth,
                    death=cell,
                    birth_value=float(fc.values[birth]),
                    death_value=float(fc.values[cell]),
                    degree=p - 1,
                )
            )

    essentials = [
        EssentialClass(cell=int(cell), value=float(fc.values[cell]), degree=int(fc.dims[cell]))
        for cell in sorted_ids
        if keep[cell] and int(cell) not in births and int(cell) not in deaths
    ]
    pairs.sort(key=lambda pair: order[pair.birth])
    logger.debug("boundary_reduced", pairs=len(pairs), essentials=len(essentials))
    return PersistencePairing(pairs=pairs, essentials=essentials)


def _claim(
    cell: int, value: float, degree: int, points: Sequence[CriticalPoint], match_tol: float, used: Dict[int, int]
) -> int:
    candidates = [pt.id for pt in points if pt.morse_index == degree and abs(pt.value - value) <= match_tol]
    if not candidates:
        raise UnmatchedEventError(
            f"event of cell {cell} at {value:.12g} (degree {degree}) matches no critical value",
            cell_id=cell,
            value=value,
            degree=degree,
        )
    if len(candidates) > 1:
        raise AmbiguousMatchError(f"event of cell {cell} matches several critical values", cell_id=cell, candidates=candidates)
    point_id = candidates[0]
    if point_id in used:
        raise AmbiguousMatchError(
            f"critical point {point_id} is claimed by cells {used[point_id]} and {cell}",
            cell_id=cell,
            candidates=[point_id],
        )
    used[point_id] = cell
    return point_id


def match_cells_to_points(
    pairing: PersistencePairing,
    points: Sequence[CriticalPoint],
    max_dim: int,
    noise_floor: float = 0.0,
    match_tol: float = 0.0,
) -> BarannikovComplex:
    """
    Translate significant persistence events into the Barannikov complex.

    Args:
        pairing: Reduction output
        points: Critical points to classify
        max_dim: Top dimension of the complex
        noise_floor: Pairs with persistence at most this are ignored
        match_tol: Largest |event value - critical value| accepted

    Raises:
        UnmatchedEventError: If an event or a critical point is left unmatched
        AmbiguousMatchError: If an event matches several points or a point several events
    """
    used: Dict[int, int] = {}
    bc_pairing: Dict[int, int] = {}
    for pair in pairing.significant_pairs(noise_floor):
        lower = _claim(pair.birth, pair.birth_value, pair.degree, points, match_tol, used)
        upper = _claim(pair.death, pair.death_value, pair.degree + 1, points, match_tol, used)
        bc_pairing[upper] = lower
    for ess in pairing.essentials:
        _claim(ess.cell, ess.value, ess.degree, points, match_tol, used)

    missing = [pt for pt in points if pt.id not in used]
    if missing:
        pt = missing[0]
        raise UnmatchedEventError(
            f"{len(missing)} critical points own no persistence event (first: {pt.id} at {pt.value:.12g})",
            value=pt.value,
            degree=pt.morse_index,
        )
    bc = BarannikovComplex.assemble(list(points), bc_pairing, max_dim)
    logger.info("points_classified", points=len(points), pairs=len(bc_pairing), betti=bc.betti)
    return bc


def betti(bc: BarannikovComplex) -> List[int]:
    """Number of homological points in each degree."""
    counts = [0] * (bc.dimension + 1)
    for pt in bc.of_class(PointClass.HOMOLOGICAL):
        counts[pt.morse_index] += 1
    return counts


def verify_betti(pairing: PersistencePairing, fc: FilteredComplex, expected: Optional[List[int]] = None) -> List[int]:
    """
    Check essential counts against Betti numbers of the complex.

    ``expected`` defaults to the rational Betti numbers computed from ``fc``.

    Raises:
        PairingMismatchError: If they differ
    """
    essential = pairing.essential_counts(fc.max_dim)
    exact = list(expected) if expected is not None else rational_betti(fc)
    if essential != exact:
        raise PairingMismatchError(
            f"essential classes {essential} differ from Betti numbers {exact}", differences=[essential, exact]
        )
    return exact


def check_window_levels(bc: BarannikovComplex, window: WindowSpec, value_tol: float) -> None:
    for level in (window.a, window.b):
        if not np.isfinite(level):
            continue
        for pt in bc.points:
            if abs(pt.value - level) <= value_tol:
                raise WindowOnCriticalValueError(
                    f"window level {level:g} coincides with critical value of point {pt.id}", level=level, value=pt.value
                )


def relative_basis(bc: BarannikovComplex, window: WindowSpec, value_tol: float = 0.0) -> RelativeBasis:
    """
    Critical points generating H_*(f^b, f^a).

    Homological points inside the window, upper points inside whose partner
    lies below a, and lower points inside whose partner lies above b.

    Raises:
        WindowOnCriticalValueError: If a or b is a critical value
    """
    check_window_levels(bc, window, value_tol)
    generators = []
    for pt in bc.points:
        if not window.contains(pt.value):
            continue
        reason: Optional[BasisReason] = None
        if pt.point_class == PointClass.HOMOLOGICAL:
            reason = BasisReason.HOMOLOGICAL_IN_M
        elif pt.point_class == PointClass.UPPER and bc.point(pt.partner).value < window.a:
            reason = BasisReason.UPPER_WITH_PARTNER_BELOW_A
        elif pt.point_class == PointClass.LOWER and bc.point(pt.partner).value > window.b:
            reason = BasisReason.LOWER_WITH_PARTNER_ABOVE_B
        if reason is not None:
            generators.append(RelativeGenerator(point_id=pt.id, reason=reason, degree=pt.morse_index))
    return RelativeBasis(window=window, generators=generators)
