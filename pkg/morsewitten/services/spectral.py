"""
Lowest eigenpairs of assembled Witten Laplacians.

Small operators are solved densely: conjugated operators through the
singular values of the stacked coboundaries ``[D_p; D_{p-1}^T]``, whose
squares are the eigenvalues and are accurate far below the eigenvalue
floor of a direct symmetric solve. Large operators go through ARPACK in
shift-invert mode around a tiny negative shift, the inner systems solved
by Jacobi-preconditioned conjugate gradients.
"""

from typing import Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
import structlog

from ..config import SpectralSettings, get_settings
from ..models.spectral import Scheme, SolverKind, SpectrumResult, WittenOperator
from ..utils.exceptions import SolverStallError, SpectralError, ValidationError

logger = structlog.get_logger(__name__)


def choose_solver(op: WittenOperator, settings: Optional[SpectralSettings] = None) -> SolverKind:
    settings = settings or get_settings().spectral
    if op.size > settings.dense_max_unknowns:
        return SolverKind.SHIFT_INVERT
    if op.scheme == Scheme.CONJUGATED_DEC and op.up is not None and op.down is not None:
        return SolverKind.DENSE_SVD
    if op.is_tridiagonal:
        return SolverKind.DENSE_TRIDIAGONAL
    return SolverKind.DENSE_SYMMETRIC


def _stacked(op: WittenOperator) -> np.ndarray:
    return sp.vstack([op.up, op.down.T]).toarray()


def _dense_svd(op: WittenOperator, k: int):
    stacked = _stacked(op)
    n = op.size
    if stacked.shape[0] == 0:
        return np.zeros(k), np.eye(n)[:, :k], 0.0
    _, s, vt = la.svd(stacked, full_matrices=True, lapack_driver="gesdd")
    values = np.zeros(n)
    values[: len(s)] = s
    ascending = np.argsort(values)[:k]
    sigma_max = float(s[0]) if len(s) else 0.0
    return values[ascending] ** 2, vt.T[:, ascending], sigma_max


def _dense_tridiagonal(op: WittenOperator, k: int):
    d = op.matrix.diagonal()
    e = op.matrix.diagonal(1)
    if op.size == 1:
        return d.copy(), np.ones((1, 1))
    return la.eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1))


def _dense_symmetric(op: WittenOperator, k: int):
    return la.eigh(op.matrix.toarray(), subset_by_index=[0, k - 1])


class _ShiftedSolver:
    """
    Applies (A - sigma I)^{-1} by preconditioned CG, falling back to sparse LU.

    A CG solve is accepted only if it reports convergence and its true
    residual |(A - sigma I)x - b| is within ``cg_residual_tol`` of |b|. The
    first rejected solve factorizes the shifted matrix once; every later
    solve uses the factors.
    """

    def __init__(self, matrix: sp.csr_matrix, sigma: float, settings: SpectralSettings):
        self.shifted = (matrix - sigma * sp.identity(matrix.shape[0], format="csr")).tocsc()
        diagonal = self.shifted.diagonal()
        self.preconditioner = sp.diags(1.0 / np.where(diagonal > 0, diagonal, 1.0))
        self.settings = settings
        self.lu = None
        self.cg_solves = 0
        self.lu_solves = 0

    def __call__(self, rhs: np.ndarray) -> np.ndarray:
        if self.lu is None:
            solution, info = spla.cg(
                self.shifted,
                rhs,
                rtol=self.settings.cg_rtol,
                maxiter=self.settings.max_iterations,
                M=self.preconditioner,
            )
            residual = float(np.linalg.norm(self.shifted @ solution - rhs))
            bound = self.settings.cg_residual_tol * float(np.linalg.norm(rhs))
            if info == 0 and residual <= bound:
                self.cg_solves += 1
                return solution
            logger.warning("cg_not_converged", info=info, residual=residual, bound=bound, fallback="splu")
            self.lu = spla.splu(self.shifted)
        self.lu_solves += 1
        return self.lu.solve(rhs)


def _shift_invert(op: WittenOperator, k: int, settings: SpectralSettings):
    n = op.size
    if k >= n - 1:
        raise ValidationError("too many eigenpairs requested for an iterative solve", field="k", value=k)
    sigma = -settings.shift_factor * op.norm
    solver = _ShiftedSolver(op.matrix, sigma, settings)
    inverse = spla.LinearOperator((n, n), matvec=solver, dtype=float)
    try:
        values, vectors = spla.eigsh(
            op.matrix, k=k, sigma=sigma, which="LM", OPinv=inverse, maxiter=settings.max_iterations
        )
    except spla.ArpackNoConvergence as exc:
        values, vectors = exc.eigenvalues, exc.eigenvectors
        partial = _result(op, values, vectors, SolverKind.SHIFT_INVERT, settings, converged=False)
        raise SolverStallError(
            f"ARPACK returned {len(values)} of {k} eigenpairs", partial=partial, residual=partial.residual_max
        ) from exc
    logger.debug("shift_invert_done", cg_solves=solver.cg_solves, lu_solves=solver.lu_solves)
    ascending = np.argsort(values)
    return values[ascending], vectors[:, ascending]


def _result(
    op: WittenOperator,
    values: np.ndarray,
    vectors: np.ndarray,
    solver: SolverKind,
    settings: SpectralSettings,
    converged: bool = True,
    floor: Optional[float] = None,
) -> SpectrumResult:
    values = np.asarray(values, dtype=float)
    if vectors.size:
        residuals = np.linalg.norm(op.matrix @ vectors - vectors * values, axis=0)
    else:
        residuals = np.zeros(0)
    return SpectrumResult(
        eigenvalues=values,
        residuals=residuals,
        solver=solver,
        count_below_h32=int(np.sum(values < op.h ** 1.5)),
        norm=op.norm,
        floor=settings.eig_floor_factor * op.norm if floor is None else floor,
        h=op.h,
        degree=op.degree,
        converged=converged,
    )


def low_spectrum(
    op: WittenOperator,
    k: int,
    settings: Optional[SpectralSettings] = None,
    solver: Optional[SolverKind] = None,
) -> SpectrumResult:
    """
    The k lowest eigenvalues of ``op`` with residual certificates.

    Args:
        op: Assembled operator
        k: Number of eigenpairs (capped at the operator size for dense solves)
        settings: Spectral settings
        solver: Force a solver instead of choosing by size and structure

    Returns:
        Ascending eigenvalues, residuals, the count below h^(3/2), the
        operator norm and the eigenvalue floor of the solver used

    Raises:
        SolverStallError: If the residual target is missed; ``partial`` holds what was computed
        SpectralError: If the spectrum is not positive semidefinite within tolerance
    """
    settings = settings or get_settings().spectral
    if k < 1:
        raise ValidationError("k must be positive", field="k", value=k)
    solver = solver or choose_solver(op, settings)
    floor = None
    if solver == SolverKind.SHIFT_INVERT:
        values, vectors = _shift_invert(op, k, settings)
    else:
        k = min(k, op.size)
        if solver == SolverKind.DENSE_SVD:
            values, vectors, sigma_max = _dense_svd(op, k)
            floor = (settings.eig_floor_factor * sigma_max) ** 2
        elif solver == SolverKind.DENSE_TRIDIAGONAL:
            values, vectors = _dense_tridiagonal(op, k)
        else:
            values, vectors = _dense_symmetric(op, k)

    result = _result(op, values, vectors, solver, settings, floor=floor)
    target = settings.residual_factor * max(op.norm, 1e-300)
    if result.residual_max > target:
        result.converged = False
        raise SolverStallError(
            f"residual {result.residual_max:.3g} above target {target:.3g}", partial=result, residual=result.residual_max
        )
    lowest = float(result.eigenvalues[0]) if result.eigenvalues.size else 0.0
    if lowest < -(settings.psd_factor * op.norm + op.kernel_defect):
        raise SpectralError(
            f"operator has a negative eigenvalue {lowest:.3g}",
            error_code="NOT_SEMIDEFINITE",
            details={"eigenvalue": lowest, "norm": op.norm},
        )
    logger.info(
        "spectrum_computed",
        p=op.degree,
        h=op.h,
        solver=solver.value,
        size=op.size,
        lowest=result.eigenvalues[: min(4, len(result.eigenvalues))].tolist(),
        residual=result.residual_max,
    )
    return result


def kernel_dimension(result: SpectrumResult, settings: Optional[SpectralSettings] = None) -> int:
    """Eigenvalues below the kernel tolerance, relative to the operator norm."""
    settings = settings or get_settings().spectral
    return int(np.sum(result.eigenvalues <= settings.kernel_factor * result.norm))
