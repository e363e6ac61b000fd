"""
Discrete Witten Laplacians on cubical grids of circles, intervals and flat tori.

Conjugated scheme: the Witten coboundary on p-cochains is

    (D_p w)_s = h * sum_t C[s, t] * exp((f_t - f_s) / h) * w_t

with f taken at cell barycenters, written in the orthonormal basis of the
diagonal Hodge stars (dual over primal volume). Only value differences of
incident cells are exponentiated. The Laplacian is
``D_p^T D_p + D_{p-1} D_{p-1}^T``; since D_p D_{p-1} = 0 exactly the
spectrum splits supersymmetrically across degrees.

Direct scheme: the 0-form stencil -h^2 D2 + |grad f|^2 - h Lap f with
second-order centered differences.

TN windows use the relative complex of (f^b, f^a): cells at or below a are
removed (Dirichlet at a) and cells above b are dropped, which leaves the
natural Robin condition at b. The direct scheme imposes the Robin relation
h du/dn + (df/dn) u = 0 through a ghost node instead.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import structlog

from ..config import SpectralSettings, get_settings
from ..models.landscape import Domain, DomainKind
from ..models.spectral import BoundarySpec, GridSpec, Scheme, WittenOperator
from ..models.topology import FilteredComplex
from ..utils.exceptions import BoundaryMismatchError, ValidationError, WeightOverflowError
from ..utils.validators import validate_finite, validate_symmetric
from .filtration import build_cubical, restrict_window

logger = structlog.get_logger(__name__)


def grid_spec(fc: FilteredComplex) -> GridSpec:
    """Shape, spacing and periodicity of a grid complex."""
    if fc.grid is None:
        raise ValidationError("Witten operators need a grid complex", field="complex", value=fc.domain.kind.value)
    nx, ny = fc.grid.shape
    lengths = fc.domain.lengths
    if len(lengths) == 2:
        spacing = (lengths[0] / nx, lengths[1] / ny)
    elif len(lengths) == 1:
        spacing = (lengths[0] / nx, 1.0)
    else:
        spacing = (1.0, 1.0)
    return GridSpec(shape=(nx, ny), spacing=spacing, periodic=fc.grid.periodic)


def hodge_stars(fc: FilteredComplex, grid: GridSpec) -> np.ndarray:
    """Diagonal Hodge star of every cell: dual volume over primal volume."""
    dx, dy = grid.spacing
    nx, ny = grid.shape
    stars = np.empty(fc.n_cells)
    if grid.dimension == 1:
        stars[fc.dims == 0] = dx
        stars[fc.dims == 1] = 1.0 / dx
        return stars
    n_vertices = nx * ny
    ex = nx if grid.periodic[0] else nx - 1
    n_x_edges = ex * ny
    stars[fc.dims == 0] = dx * dy
    edges = np.flatnonzero(fc.dims == 1)
    is_x = edges < n_vertices + n_x_edges
    stars[edges[is_x]] = dy / dx
    stars[edges[~is_x]] = dx / dy
    stars[fc.dims == 2] = 1.0 / (dx * dy)
    return stars


def _coboundary(
    fc: FilteredComplex,
    q: int,
    keep: np.ndarray,
    f_bary: np.ndarray,
    stars: np.ndarray,
    h: float,
    guard: float,
) -> sp.csr_matrix:
    """Orthonormalised Witten coboundary from kept q-cells to kept (q+1)-cells."""
    cols = np.flatnonzero((fc.dims == q) & keep)
    rows = np.flatnonzero((fc.dims == q + 1) & keep)
    position = np.full(fc.n_cells, -1, dtype=np.int64)
    position[cols] = np.arange(len(cols))

    r_idx, c_idx, signs, faces, cofaces = [], [], [], [], []
    for i, cell in enumerate(rows):
        for face, sign in fc.boundaries[cell]:
            j = position[face]
            if j >= 0:
                r_idx.append(i)
                c_idx.append(j)
                signs.append(sign)
                faces.append(face)
                cofaces.append(cell)
    faces_arr = np.asarray(faces, dtype=np.int64)
    cofaces_arr = np.asarray(cofaces, dtype=np.int64)
    diff = f_bary[faces_arr] - f_bary[cofaces_arr]
    ratio = float(np.max(np.abs(diff))) / h if diff.size else 0.0
    if ratio > guard:
        raise WeightOverflowError(
            f"value jump {ratio:.3g} h across one incidence exceeds the guard", ratio=ratio, guard=guard
        )
    data = h * np.asarray(signs, dtype=float) * np.exp(diff / h) * np.sqrt(stars[cofaces_arr] / stars[faces_arr])
    return sp.csr_matrix((data, (r_idx, c_idx)), shape=(len(rows), len(cols)))


def _check_operator(matrix: sp.csr_matrix, norm: float, settings: SpectralSettings) -> None:
    validate_symmetric(matrix, settings.symmetry_factor, scale=max(norm, 1e-300))


def assemble_conjugated(
    fc: FilteredComplex,
    barycenter_values: np.ndarray,
    p: int,
    h: float,
    boundary: Optional[BoundarySpec] = None,
    settings: Optional[SpectralSettings] = None,
) -> WittenOperator:
    """
    Assemble the conjugated DEC Witten Laplacian on p-cochains.

    Args:
        fc: Cubical grid complex of the domain
        barycenter_values: f at the barycenter of every cell
        p: Form degree, 0 <= p <= dimension
        h: Semiclassical parameter
        boundary: None for the closed domain, or TN(a, b)
        settings: Spectral settings

    Raises:
        WeightOverflowError: If f varies too much across one cell for this h
        BoundaryMismatchError: If a TN window is requested on an abstract complex or is empty
    """
    settings = settings or get_settings().spectral
    boundary = boundary or BoundarySpec.none()
    grid = grid_spec(fc)
    if not 0 <= p <= fc.max_dim:
        raise ValidationError("form degree out of range", field="p", value=p)
    if not h > 0:
        raise ValidationError("h must be positive", field="h", value=h)
    f_bary = validate_finite(barycenter_values, "barycenter values")

    if boundary.is_tn:
        if fc.domain.kind == DomainKind.ABSTRACT_COMPLEX:
            raise BoundaryMismatchError("TN windows need a circle or torus grid", domain_kind=fc.domain.kind.value)
        fc = restrict_window(fc, boundary.window)
    keep = fc.active & ~fc.quotiented
    if not np.any(keep & (fc.dims == p)):
        raise BoundaryMismatchError(f"window {boundary.describe()} leaves no {p}-cells", domain_kind=fc.domain.kind.value)

    stars = hodge_stars(fc, grid)
    n_p = int(np.sum(keep & (fc.dims == p)))
    up = _coboundary(fc, p, keep, f_bary, stars, h, settings.weight_guard) if p < fc.max_dim else sp.csr_matrix((0, n_p))
    down = (
        _coboundary(fc, p - 1, keep, f_bary, stars, h, settings.weight_guard)
        if p > 0
        else sp.csr_matrix((n_p, 0))
    )
    matrix = (up.T @ up + down @ down.T).tocsr()
    cells = np.flatnonzero(keep & (fc.dims == p))
    op = WittenOperator(
        matrix=matrix,
        degree=p,
        h=h,
        scheme=Scheme.CONJUGATED_DEC,
        boundary=boundary,
        grid=grid,
        f_data=f_bary[cells],
        cells=cells,
        down=down.tocsr(),
        up=up.tocsr(),
    )
    _check_operator(op.matrix, op.norm, settings)
    logger.debug("operator_assembled", scheme="dec", p=p, h=h, size=op.size, boundary=boundary.describe())
    return op


def supersymmetry_defect(op: WittenOperator) -> float:
    """
    Largest relative mismatch between the nonzero spectra of D^T D and D D^T.

    Uses the coboundary leaving the operator's degree (or the one entering
    it for top degree). Dense; meant for moderate sizes.
    """
    factor = op.up if op.up is not None and op.up.shape[0] else op.down
    if factor is None or factor.shape[0] == 0 or factor.shape[1] == 0:
        return 0.0
    dense = factor.toarray()
    left = np.linalg.eigvalsh(dense.T @ dense)
    right = np.linalg.eigvalsh(dense @ dense.T)
    scale = max(float(np.max(np.abs(left))), 1e-300)
    cut = 1e-10 * scale
    left_nz, right_nz = np.sort(left[left > cut]), np.sort(right[right > cut])
    if len(left_nz) != len(right_nz):
        return float("inf")
    if not len(left_nz):
        return 0.0
    return float(np.max(np.abs(left_nz - right_nz)) / scale)


def _neighbours(grid: GridSpec, node: int):
    """(neighbour node or None, axis) pairs of a grid node, None past a non-periodic edge."""
    nx, ny = grid.shape
    i, j = node % nx, node // nx
    axes = [(0, nx, i)] + ([(1, ny, j)] if grid.dimension == 2 else [])
    for axis, n, k in axes:
        for step in (-1, 1):
            m = k + step
            if not 0 <= m < n:
                if not grid.periodic[axis]:
                    yield None, axis
                    continue
                m %= n
            yield (m + nx * j if axis == 0 else i + nx * m), axis


def assemble_direct_0form(
    grid: GridSpec,
    f_samples: np.ndarray,
    h: float,
    boundary: Optional[BoundarySpec] = None,
    gradient: Optional[np.ndarray] = None,
    laplacian: Optional[np.ndarray] = None,
    settings: Optional[SpectralSettings] = None,
) -> WittenOperator:
    """
    Finite-difference Witten Laplacian on functions.

    Args:
        grid: Node grid
        f_samples: f at the nodes (row-major)
        h: Semiclassical parameter
        boundary: None, or TN(a, b) with Dirichlet at a and Robin at b
        gradient: |grad f| at the nodes, shape (n, d); centered differences when omitted
        laplacian: Lap f at the nodes; centered differences when omitted

    The kernel defect recorded on the operator is max |V - V_gs| where V_gs
    is the potential for which the sampled exp(-f/h) is an exact null vector.
    """
    settings = settings or get_settings().spectral
    boundary = boundary or BoundarySpec.none()
    f = validate_finite(f_samples, "f samples").ravel()
    if f.size != grid.n_nodes:
        raise ValidationError("samples do not match the grid", field="f_samples", value=f.size)
    nx, ny = grid.shape
    field2d = f.reshape(ny, nx)
    spacing = grid.spacing[: grid.dimension]

    if gradient is None or laplacian is None:
        grads, lap = [], np.zeros_like(field2d)
        for axis, step in zip((1, 0), spacing):
            forward, backward = np.roll(field2d, -1, axis=axis), np.roll(field2d, 1, axis=axis)
            grads.append(((forward - backward) / (2 * step)).ravel())
            lap += (forward - 2 * field2d + backward) / step ** 2
        gradient = np.column_stack(grads) if gradient is None else gradient
        laplacian = lap.ravel() if laplacian is None else laplacian
    gradient = np.asarray(gradient, dtype=float).reshape(f.size, -1)
    potential = np.sum(gradient ** 2, axis=1) - h * np.asarray(laplacian, dtype=float).ravel()

    if boundary.is_tn:
        a, b = boundary.window.a, boundary.window.b
        inside = (f > a) & (f < b)
        if not inside.any():
            raise BoundaryMismatchError(f"window {boundary.describe()} contains no nodes")
    else:
        inside = np.ones(f.size, dtype=bool)
    nodes = np.flatnonzero(inside)
    position = np.full(f.size, -1, dtype=np.int64)
    position[nodes] = np.arange(len(nodes))

    rows, cols, data = [], [], []
    kernel_defect = 0.0
    for r, node in enumerate(nodes):
        diag = potential[node]
        v_gs = 0.0
        for neighbour, axis in _neighbours(grid, node):
            coupling = h ** 2 / spacing[axis] ** 2
            diag += coupling
            if neighbour is None:
                v_gs -= coupling
                continue
            v_gs += coupling * (np.exp(-(f[neighbour] - f[node]) / h) - 1.0)
            c = position[neighbour]
            if c >= 0:
                rows.append(r)
                cols.append(c)
                data.append(-coupling)
            elif boundary.is_tn and f[neighbour] >= boundary.window.b:
                jump = f[neighbour] - f[node]
                rho = (h - jump / 2) / (h + jump / 2)
                diag -= coupling * rho
        rows.append(r)
        cols.append(r)
        data.append(diag)
        kernel_defect = max(kernel_defect, abs(potential[node] - v_gs))

    matrix = sp.csr_matrix((data, (rows, cols)), shape=(len(nodes), len(nodes)))
    op = WittenOperator(
        matrix=matrix,
        degree=0,
        h=h,
        scheme=Scheme.DIRECT_STENCIL,
        boundary=boundary,
        grid=grid,
        f_data=f[nodes],
        cells=nodes,
        kernel_defect=kernel_defect,
    )
    _check_operator(op.matrix, op.norm, settings)
    logger.debug("operator_assembled", scheme="stencil", h=h, size=op.size, kernel_defect=kernel_defect)
    return op


def ground_state_residual(op: WittenOperator) -> float:
    """||A u|| / ||u|| for the sampled u = exp(-(f - min f) / h)."""
    u = np.exp(-(op.f_data - np.min(op.f_data)) / op.h)
    return float(np.linalg.norm(op.matrix @ u) / np.linalg.norm(u))


@dataclass
class AssemblyConfig:
    """
    Everything needed to assemble the operator at any h.

    Built once per sweep so the grid and samples stay fixed across h values.
    """

    scheme: Scheme
    complex: FilteredComplex
    barycenter_values: np.ndarray
    gradient: Optional[np.ndarray] = None
    laplacian: Optional[np.ndarray] = None
    boundary: BoundarySpec = field(default_factory=BoundarySpec.none)
    settings: Optional[SpectralSettings] = None

    @classmethod
    def from_function(
        cls,
        function,
        shape: Sequence[int],
        scheme: Scheme = Scheme.CONJUGATED_DEC,
        boundary: Optional[BoundarySpec] = None,
        settings: Optional[SpectralSettings] = None,
    ) -> "AssemblyConfig":
        """Sample a :class:`MorseFunction` on a periodic grid of ``shape`` nodes."""
        nx = int(shape[0])
        ny = int(shape[1]) if len(shape) > 1 else 1
        nodes = function.grid_nodes((nx, ny)[: function.dimension])
        vertex_values = function.value(nodes)
        fc = build_cubical(
            nx, ny, (True, True), vertex_values, lengths=function.domain.lengths, domain=_ambient(function.domain)
        )
        barycenters = fc.barycenters[:, : function.dimension]
        values = function.value(barycenters)
        values[: fc.n_vertices] = vertex_values
        gradient = laplacian = None
        if scheme == Scheme.DIRECT_STENCIL:
            gradient = function.gradient(nodes)
            laplacian = np.trace(function.hessian(nodes), axis1=1, axis2=2)
        return cls(
            scheme=scheme,
            complex=fc,
            barycenter_values=values,
            gradient=gradient,
            laplacian=laplacian,
            boundary=boundary or BoundarySpec.none(),
            settings=settings,
        )

    @property
    def grid(self) -> GridSpec:
        return grid_spec(self.complex)

    def build(self, h: float, p: int = 0) -> WittenOperator:
        if self.scheme == Scheme.DIRECT_STENCIL:
            if p != 0:
                raise ValidationError("the direct stencil acts on functions only", field="p", value=p)
            return assemble_direct_0form(
                self.grid,
                self.complex.vertex_values,
                h,
                self.boundary,
                gradient=self.gradient,
                laplacian=self.laplacian,
                settings=self.settings,
            )
        return assemble_conjugated(self.complex, self.barycenter_values, p, h, self.boundary, self.settings)


def _ambient(domain: Domain) -> Domain:
    """Grids are always built on the closed ambient domain; windows come from the boundary."""
    if domain.kind == DomainKind.INTERVAL:
        return Domain.circle(domain.lengths[0])
    return domain
