"""
Closed-form predictions for the exponentially small eigenvalues.

Every lower point U of index p with partner U' of index p + 1 contributes
one eigenvalue in degrees p and p + 1::

    kappa^2 * C(U, U') * (h / pi) * exp(-2 (f(U') - f(U)) / h)

with C built from the Hessian spectra at both points. Homological points
contribute exact zeros.
"""

import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import structlog
from scipy.optimize import brentq

from ..config import AsymptoticsSettings, LandscapeSettings, SpectralSettings, get_settings
from ..models.landscape import CriticalPoint, PointClass
from ..models.spectral import PredictionKind, PredictionSet, SpectralPrediction
from ..models.topology import BarannikovComplex, WindowSpec
from ..utils.exceptions import (
    HypothesisViolatedError,
    IndexMismatchError,
    ZeroHessianEigenvalueError,
)
from .barannikov import check_window_levels
from .landscape import check_gaps, check_hypotheses

logger = structlog.get_logger(__name__)

Floor = Union[float, Callable[[float], float]]


def _check_pair(lower: CriticalPoint, upper: CriticalPoint) -> None:
    if upper.morse_index != lower.morse_index + 1:
        raise IndexMismatchError(
            f"points {lower.id} and {upper.id} are not in adjacent degrees",
            lower_index=lower.morse_index,
            upper_index=upper.morse_index,
        )
    for pt in (lower, upper):
        if not pt.has_hessian or any(e == 0 for e in pt.hessian_eigs):
            raise ZeroHessianEigenvalueError(f"point {pt.id} has no usable Hessian spectrum", point_id=pt.id)


def prefactor_coefficient(lower: CriticalPoint, upper: CriticalPoint) -> float:
    """
    h-independent factor of the eigenvalue attached to the pair (lower, upper).

    Returns:
        |prod of negative eigs at upper| / |prod of negative eigs at lower|
        * sqrt(|det Hess lower| / |det Hess upper|)

    Raises:
        IndexMismatchError: If the indices do not differ by one
        ZeroHessianEigenvalueError: If a Hessian spectrum is missing or singular
    """
    _check_pair(lower, upper)
    neg_upper = math.prod(abs(e) for e in upper.negative_eigs)
    neg_lower = math.prod(abs(e) for e in lower.negative_eigs)
    return neg_upper / neg_lower * math.sqrt(lower.abs_det / upper.abs_det)


def interaction_amplitude(lower: CriticalPoint, upper: CriticalPoint, h: float) -> float:
    """
    Amplitude A(h) of the coupling between the quasimodes of a pair.

    Built eigenvalue by eigenvalue, without the exponential factor; its
    square times pi / h equals :func:`prefactor_coefficient`.
    """
    _check_pair(lower, upper)
    amplitude = math.sqrt(h / math.pi)
    for e in upper.hessian_eigs:
        amplitude *= abs(e) ** (0.25 if e < 0 else -0.25)
    for e in lower.hessian_eigs:
        amplitude *= abs(e) ** (-0.25 if e < 0 else 0.25)
    return amplitude


def check_gap_hypothesis(
    bc: BarannikovComplex, settings: Optional[LandscapeSettings] = None
) -> Tuple[bool, List[float]]:
    """Whether all pair gaps are distinct, with the sorted gap list."""
    distinct, _ = check_gaps(bc, settings)
    return distinct, [gap for _, _, gap in bc.gaps()]


def _pair_prediction(
    point: CriticalPoint, lower: CriticalPoint, upper: CriticalPoint, kappa: float
) -> SpectralPrediction:
    coefficient = None
    if lower.has_hessian and upper.has_hessian:
        coefficient = prefactor_coefficient(lower, upper)
    return SpectralPrediction(
        point_id=point.id,
        degree=point.morse_index,
        kind=PredictionKind.PAIR,
        coefficient=coefficient,
        activation=2.0 * (upper.value - lower.value),
        kappa=kappa,
        partner_id=point.partner,
    )


def _zero(point: CriticalPoint) -> SpectralPrediction:
    return SpectralPrediction(point_id=point.id, degree=point.morse_index, kind=PredictionKind.ZERO)


def _sort_key(pred: SpectralPrediction):
    return (not pred.is_zero, -pred.activation, pred.coefficient or 0.0, pred.point_id)


def h_validity(
    predictions: Sequence[SpectralPrediction],
    floor: Optional[Floor] = None,
    settings: Optional[AsymptoticsSettings] = None,
    spectral: Optional[SpectralSettings] = None,
) -> Tuple[float, float]:
    """
    Recommended h range for a set of predictions.

    The upper end is ``h_max_factor`` times the smallest activation; the lower
    end is where the smallest prediction meets the eigenvalue floor.

    Args:
        predictions: Predictions to cover
        floor: Constant or h-dependent eigenvalue floor (default: relative floor of a unit-norm operator)
    """
    settings = settings or get_settings().asymptotics
    spectral = spectral or get_settings().spectral
    pairs = [pred for pred in predictions if not pred.is_zero]
    if not pairs:
        return (0.0, math.inf)
    h_max = settings.h_max_factor * min(pred.activation for pred in pairs)
    floor_fn: Callable[[float], float]
    if floor is None:
        floor_fn = lambda h: spectral.eig_floor_factor  # noqa: E731
    elif callable(floor):
        floor_fn = floor
    else:
        floor_fn = lambda h: float(floor)  # noqa: E731

    lower_ends = []
    for pred in pairs:
        coefficient = pred.coefficient if pred.coefficient is not None else 1.0

        def gap(h: float) -> float:
            return math.log(pred.kappa ** 2 * coefficient * h / math.pi) - pred.activation / h - math.log(floor_fn(h))

        lo = h_max * 1e-3
        if gap(h_max) <= 0:
            lower_ends.append(h_max)
        elif gap(lo) < 0:
            lower_ends.append(brentq(gap, lo, h_max, xtol=1e-14))
        else:
            lower_ends.append(0.0)

    # intersection of the per-pair windows
    h_min = max(lower_ends)
    floor_bound = [pred.point_id for pred, end in zip(pairs, lower_ends) if end >= h_max]
    if floor_bound:
        logger.warning("h_validity_empty", h_max=h_max, floor_bound=floor_bound)
    return (min(h_min, h_max), h_max)


def predict_spectrum(
    bc: BarannikovComplex,
    kappa_table: Optional[Dict[Tuple[int, int], float]] = None,
    floor: Optional[Floor] = None,
    settings: Optional[AsymptoticsSettings] = None,
) -> PredictionSet:
    """
    One prediction per critical point.

    Homological points give zeros; a lower point and its upper partner share
    one pair prediction.

    Raises:
        HypothesisViolatedError: If the landscape is not excellent or two gaps coincide
    """
    settings = settings or get_settings().asymptotics
    report = check_hypotheses(bc.points, bc)
    if not report.ok:
        raise HypothesisViolatedError("standing hypotheses fail", violations=[str(v) for v in report.violations])
    kappa_table = kappa_table or {}

    by_degree: Dict[int, List[SpectralPrediction]] = {p: [] for p in range(bc.dimension + 1)}
    for pt in bc.points:
        if pt.point_class == PointClass.HOMOLOGICAL:
            pred = _zero(pt)
        else:
            partner = bc.point(pt.partner)
            lower, upper = (pt, partner) if pt.point_class == PointClass.LOWER else (partner, pt)
            kappa = kappa_table.get((upper.id, lower.id), settings.default_kappa)
            pred = _pair_prediction(pt, lower, upper, kappa)
        by_degree.setdefault(pt.morse_index, []).append(pred)

    for preds in by_degree.values():
        preds.sort(key=_sort_key)
    all_preds = [pred for preds in by_degree.values() for pred in preds]
    validity = h_validity(all_preds, floor, settings)
    result = PredictionSet(by_degree=by_degree, h_validity=validity)
    logger.info(
        "spectrum_predicted",
        zeros=[result.zero_count(p) for p in sorted(by_degree)],
        pairs=len(bc.pairing),
        h_validity=validity,
    )
    return result


def predict_relative(
    bc: BarannikovComplex,
    window: WindowSpec,
    h: Optional[float] = None,
    kappa_table: Optional[Dict[Tuple[int, int], float]] = None,
    value_tol: float = 0.0,
    floor: Optional[Floor] = None,
    settings: Optional[AsymptoticsSettings] = None,
) -> PredictionSet:
    """
    Predictions for the window operator on (f^b, f^a).

    Only points inside (a, b) contribute. A pair survives when both of its
    ends lie inside; a point whose partner lies outside becomes a zero.

    Raises:
        WindowOnCriticalValueError: If a or b is a critical value
    """
    check_window_levels(bc, window, value_tol)
    full = predict_spectrum(bc, kappa_table, floor, settings)
    inside = {pt.id for pt in bc.points if window.contains(pt.value)}

    by_degree: Dict[int, List[SpectralPrediction]] = {p: [] for p in range(bc.dimension + 1)}
    for pt in bc.points:
        if pt.id not in inside:
            continue
        pred = full.for_point(pt.id)
        if not pred.is_zero and pred.partner_id not in inside:
            pred = _zero(pt)
        by_degree[pt.morse_index].append(pred)
    for preds in by_degree.values():
        preds.sort(key=_sort_key)

    validity = h_validity([pred for preds in by_degree.values() for pred in preds], floor, settings)
    if h is not None and not validity[0] <= h <= validity[1]:
        logger.warning("h_outside_validity", h=h, h_validity=validity)
    return PredictionSet(by_degree=by_degree, h_validity=validity)


def mirror(predictions: PredictionSet, dimension: int) -> PredictionSet:
    """Relabel degrees p -> dimension - p, as the predictions of -f are indexed."""
    by_degree = {
        dimension - p: [pred.model_copy(update={"degree": dimension - p}) for pred in preds]
        for p, preds in predictions.by_degree.items()
    }
    return PredictionSet(by_degree=by_degree, h_validity=predictions.h_validity)


def compare_predictions(first: PredictionSet, second: PredictionSet, rtol: float = 1e-9) -> List[str]:
    """Degree-wise differences between two prediction sets, ignoring point ids."""
    differences = []
    for p in sorted(set(first.by_degree) | set(second.by_degree)):
        a, b = first.degree(p), second.degree(p)
        if len(a) != len(b):
            differences.append(f"degree {p}: {len(a)} vs {len(b)} predictions")
            continue
        for pa, pb in zip(sorted(a, key=_sort_key), sorted(b, key=_sort_key)):
            if not pa.same_value(pb, rtol):
                differences.append(f"degree {p}: point {pa.point_id} vs {pb.point_id}")
    return differences
