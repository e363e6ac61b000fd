"""
h sweeps and Arrhenius fits.

Each h value assembles and solves its own operator; the solves are
independent and run on a thread pool (numpy and scipy release the GIL in
their kernels). Rows come back in decreasing h.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
import structlog
from scipy import linalg, stats

from ..config import SpectralSettings, get_settings
from ..models.spectral import FitResult, SweepRow
from ..utils.exceptions import FloorContaminationError, InsufficientDataError
from ..utils.validators import validate_h_list
from .spectral import low_spectrum
from .witten_numerics import AssemblyConfig

logger = structlog.get_logger(__name__)

MIN_FIT_ROWS = 4

Selector = Union[int, Callable[[SweepRow], float]]


def _solve_one(config: AssemblyConfig, h: float, degree: int, k: int, settings: SpectralSettings) -> SweepRow:
    op = config.build(h, degree)
    result = low_spectrum(op, k, settings)
    return SweepRow(
        h=h,
        degree=degree,
        eigenvalues=tuple(float(v) for v in result.eigenvalues),
        count_below_h32=result.count_below_h32,
        residual_max=result.residual_max,
        scheme=op.scheme,
        solver=result.solver,
        norm=result.norm,
        floor=result.floor,
    )


def sweep_h(
    config: AssemblyConfig,
    h_list: Sequence[float],
    degree: int,
    k: int,
    settings: Optional[SpectralSettings] = None,
    max_workers: Optional[int] = None,
) -> List[SweepRow]:
    """
    Lowest k eigenvalues of the degree-p operator at every h.

    Args:
        config: Fixed grid, samples, scheme and boundary
        h_list: Distinct positive h values
        degree: Form degree
        k: Eigenpairs per h (m_p plus a few extra)
        max_workers: Thread pool size (default from harness settings)

    Returns:
        One row per h, largest h first
    """
    settings = settings or get_settings().spectral
    h_values = validate_h_list(h_list)
    workers = max_workers or get_settings().harness.max_workers
    logger.info("sweep_started", p=degree, h_values=h_values, k=k, workers=workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda h: _solve_one(config, h, degree, k, settings), h_values))
    logger.info("sweep_finished", p=degree, rows=len(rows))
    return rows


def _select(row: SweepRow, selector: Selector) -> float:
    if callable(selector):
        return float(selector(row))
    return float(row.eigenvalues[selector])


def fit_arrhenius(rows: Sequence[SweepRow], selector: Selector, linear_correction: bool = False) -> FitResult:
    """
    Least-squares line through (1/h, log(lambda/h)) for one eigenvalue per row.

    With ``linear_correction`` the model is log(lambda/h) = c0 + slope/h + c1*h,
    which absorbs the first-order term of the prefactor expansion so the
    intercept is not biased by it.

    Args:
        rows: Sweep rows
        selector: Index into each row's eigenvalues, or a callable picking the value
        linear_correction: Fit the extra term proportional to h

    Raises:
        InsufficientDataError: With fewer than four rows
        FloorContaminationError: If a selected eigenvalue is at or below its row's floor
    """
    if len(rows) < MIN_FIT_ROWS:
        raise InsufficientDataError(
            f"an Arrhenius fit needs {MIN_FIT_ROWS} rows, got {len(rows)}", rows=len(rows), required=MIN_FIT_ROWS
        )
    points = []
    for row in rows:
        value = _select(row, selector)
        if not value > row.floor:
            raise FloorContaminationError(
                f"eigenvalue {value:.3g} at h={row.h:g} is below the floor {row.floor:.3g}",
                h=row.h,
                value=value,
                floor=row.floor,
            )
        points.append((row.h, value))
    x = np.array([1.0 / h for h, _ in points])
    y = np.array([math.log(value / h) for h, value in points])
    if linear_correction:
        design = np.column_stack([np.ones_like(x), x, 1.0 / x])
        coef, _, _, _ = linalg.lstsq(design, y)
        residual = y - design @ coef
        r2 = 1.0 - float(residual @ residual) / float(np.sum((y - y.mean()) ** 2))
        fit = FitResult(
            slope=float(coef[1]), log_prefactor=float(coef[0]), r2=r2, points_used=points, correction=float(coef[2])
        )
    else:
        line = stats.linregress(x, y)
        fit = FitResult(
            slope=float(line.slope), log_prefactor=float(line.intercept), r2=float(line.rvalue ** 2), points_used=points
        )
    logger.info(
        "arrhenius_fitted", slope=fit.slope, log_prefactor=fit.log_prefactor, correction=fit.correction, r2=fit.r2
    )
    return fit
