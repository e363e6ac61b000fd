"""
Unit tests for low spectrum solvers.
"""

import math

import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from morsewitten.config import SpectralSettings
from morsewitten.models.spectral import BoundarySpec, GridSpec, Scheme, SolverKind, WittenOperator
from morsewitten.services.spectral import _ShiftedSolver, choose_solver, kernel_dimension, low_spectrum
from morsewitten.services.witten_numerics import AssemblyConfig
from morsewitten.utils.exceptions import SolverStallError, ValidationError


def _operator(matrix, h=1.0):
    n = matrix.shape[0]
    return WittenOperator(
        matrix=sp.csr_matrix(matrix),
        degree=0,
        h=h,
        scheme=Scheme.DIRECT_STENCIL,
        boundary=BoundarySpec.none(),
        grid=GridSpec(shape=(n, 1), spacing=(1.0, 1.0), periodic=(True, False)),
        f_data=np.zeros(n),
        cells=np.arange(n),
    )


def _cycle(n):
    return sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(n, n)).tolil()


def _cycle_operator(n, h=1.0):
    lap = _cycle(n)
    lap[0, n - 1] = lap[n - 1, 0] = -1.0
    return _operator(lap.tocsr(), h)


class TestSolverChoice:
    """Test solver selection by size and structure"""

    def test_tridiagonal(self):
        """Path Laplacians are tridiagonal"""
        assert choose_solver(_operator(_cycle(6).tocsr())) == SolverKind.DENSE_TRIDIAGONAL

    def test_symmetric(self):
        """Wrap-around entries break the tridiagonal band"""
        assert choose_solver(_cycle_operator(6)) == SolverKind.DENSE_SYMMETRIC

    def test_svd_for_conjugated(self, cosine):
        """Conjugated operators are solved through their coboundaries"""
        op = AssemblyConfig.from_function(cosine, (64,)).build(0.5, 0)

        assert choose_solver(op) == SolverKind.DENSE_SVD

    def test_large_operators(self):
        """Operators above the dense limit use shift-invert"""
        settings = SpectralSettings(dense_max_unknowns=8)

        assert choose_solver(_cycle_operator(16), settings) == SolverKind.SHIFT_INVERT


class TestLowSpectrum:
    """Test eigenvalues, certificates and failure modes"""

    def test_identity(self):
        """The identity has every eigenvalue one"""
        result = low_spectrum(_operator(sp.identity(5)), 3)

        assert result.solver == SolverKind.DENSE_TRIDIAGONAL
        assert result.eigenvalues == pytest.approx([1.0, 1.0, 1.0])
        assert result.count_below_h32 == 0
        assert result.residual_max == pytest.approx(0.0, abs=1e-14)

    def test_cycle(self):
        """Cycle graph spectrum 2 - 2 cos(2 pi k / n)"""
        n = 9
        first = 2 - 2 * math.cos(2 * math.pi / n)

        result = low_spectrum(_cycle_operator(n), 3)

        assert result.solver == SolverKind.DENSE_SYMMETRIC
        assert result.eigenvalues == pytest.approx([0.0, first, first], abs=1e-12)
        assert kernel_dimension(result) == 1

    def test_count_below_h32(self):
        """Eigenvalues under h^1.5 are counted"""
        wide = low_spectrum(_cycle_operator(9, h=1.0), 5)
        narrow = low_spectrum(_cycle_operator(9, h=0.5), 5)

        assert wide.count_below_h32 == 3
        assert narrow.count_below_h32 == int(np.sum(narrow.eigenvalues < 0.5 ** 1.5)) == 1

    def test_k_is_capped(self):
        """Dense solves never return more values than unknowns"""
        assert len(low_spectrum(_cycle_operator(4), 10).eigenvalues) == 4

    def test_shift_invert(self):
        """The iterative solver agrees with the dense one"""
        op = _cycle_operator(200)

        iterative = low_spectrum(op, 3, solver=SolverKind.SHIFT_INVERT)
        dense = low_spectrum(op, 3, solver=SolverKind.DENSE_SYMMETRIC)

        assert iterative.solver == SolverKind.SHIFT_INVERT
        assert iterative.eigenvalues == pytest.approx(dense.eigenvalues, abs=1e-9)

    def test_shift_invert_needs_room(self):
        """ARPACK cannot return almost every eigenpair"""
        with pytest.raises(ValidationError):
            low_spectrum(_cycle_operator(6), 5, solver=SolverKind.SHIFT_INVERT)

    def test_svd_floor(self, cosine):
        """The singular value route sets a floor far below the operator norm"""
        op = AssemblyConfig.from_function(cosine, (128,)).build(0.2, 0)

        result = low_spectrum(op, 3)

        assert result.solver == SolverKind.DENSE_SVD
        assert 0 < result.floor < 1e-12 * result.norm
        assert result.eigenvalues[0] == pytest.approx(0.0, abs=1e-12 * result.norm)

    def test_k_must_be_positive(self):
        """At least one eigenpair is requested"""
        with pytest.raises(ValidationError):
            low_spectrum(_cycle_operator(5), 0)

    def test_residual_target(self):
        """Missing the residual target raises with the partial result"""
        settings = SpectralSettings(residual_factor=1e-300)

        with pytest.raises(SolverStallError) as excinfo:
            low_spectrum(_cycle_operator(9), 3, settings=settings)

        assert excinfo.value.partial is not None
        assert not excinfo.value.partial.converged
        assert len(excinfo.value.partial.eigenvalues) == 3

    def test_rejected_cg_falls_back_to_lu(self, mocker):
        """A solve whose true residual misses the bound switches to one LU factorization"""
        op = _cycle_operator(50)
        settings = SpectralSettings(cg_residual_tol=1e-300)
        split = mocker.spy(spla, "splu")
        solver = _ShiftedSolver(op.matrix, -1e-3, settings)
        rhs = np.random.default_rng(0).standard_normal(50)

        first = solver(rhs)
        second = solver(2 * rhs)

        assert split.call_count == 1
        assert (solver.cg_solves, solver.lu_solves) == (0, 2)
        assert np.linalg.norm(solver.shifted @ first - rhs) < 1e-10 * np.linalg.norm(rhs)
        assert second == pytest.approx(2 * first, rel=1e-10)


class TestWittenSpectra:
    """Test spectra of assembled operators"""

    def test_cosine_one_small_eigenvalue(self, cosine):
        """A single minimum gives a single exponentially small eigenvalue"""
        config = AssemblyConfig.from_function(cosine, (512,))

        for p in (0, 1):
            result = low_spectrum(config.build(0.2, p), 3)
            assert result.count_below_h32 == 1
            assert kernel_dimension(result) == 1

    @pytest.mark.parametrize("cg_residual_tol", [1e-9, 1e-300])
    def test_torus_one_forms_by_shift_invert(self, torus_perturbed, cg_residual_tol):
        """Harmonic one-forms of the torus survive the iterative route with or without CG"""
        settings = SpectralSettings(dense_max_unknowns=100, cg_residual_tol=cg_residual_tol)
        config = AssemblyConfig.from_function(torus_perturbed, (24, 24), settings=settings)
        op = config.build(0.4, 1)

        iterative = low_spectrum(op, 4, settings=settings)
        dense = low_spectrum(op, 4, settings=settings, solver=SolverKind.DENSE_SVD)

        assert iterative.solver == SolverKind.SHIFT_INVERT
        assert iterative.converged
        assert iterative.count_below_h32 == 2
        assert np.all(iterative.eigenvalues[:2] <= 1e-9 * iterative.norm)
        assert iterative.eigenvalues[2] > 0.4 ** 1.5
        assert iterative.eigenvalues == pytest.approx(dense.eigenvalues, abs=1e-8 * iterative.norm)
