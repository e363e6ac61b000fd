"""
Filtered cell complexes realising sublevel sets of a function.

Cubical complexes come from (periodic or bounded) grids, simplicial ones
from the plain-text surface format::

    dim nv ns
    x y z value        (nv lines)
    v0 v1 ... v_dim    (ns lines, oriented top simplices)

Every cell takes the largest value of its vertices (lower star), with ties
broken by vertex id, and cells are totally ordered by that symbolic value,
then by dimension, then by id.
"""

import itertools
import warnings
from collections import defaultdict
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
import structlog

from ..config import PersistenceSettings, get_settings
from ..models.landscape import Domain
from ..models.topology import FilteredComplex, GridInfo, WindowSpec
from ..utils.exceptions import (
    ComplexParseError,
    NonManifoldWarning,
    OrientationError,
    SizeExceededError,
    ValidationError,
    WindowOnCriticalValueError,
)
from ..utils.validators import validate_finite

logger = structlog.get_logger(__name__)

Boundary = Tuple[Tuple[int, int], ...]


def _lower_star(
    dims: np.ndarray, cell_vertices: Sequence[Sequence[int]], vertex_values: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cell values, lower vertices and the total order of a lower-star filtration."""
    n_vertices = len(vertex_values)
    vertex_order = np.lexsort((np.arange(n_vertices), vertex_values))
    vertex_rank = np.empty(n_vertices, dtype=np.int64)
    vertex_rank[vertex_order] = np.arange(n_vertices)

    n_cells = len(dims)
    lower_vertex = np.empty(n_cells, dtype=np.int64)
    for dim in np.unique(dims):
        ids = np.flatnonzero(dims == dim)
        verts = np.array([cell_vertices[c] for c in ids], dtype=np.int64)
        pick = np.argmax(vertex_rank[verts], axis=1)
        lower_vertex[ids] = verts[np.arange(len(ids)), pick]

    values = vertex_values[lower_vertex]
    ids = np.arange(n_cells)
    sorted_ids = np.lexsort((ids, dims, vertex_rank[lower_vertex], values))
    order = np.empty(n_cells, dtype=np.int64)
    order[sorted_ids] = ids
    return values, lower_vertex, order


def build_cubical(
    nx: int,
    ny: int,
    periodic: Tuple[bool, bool],
    vertex_values: Sequence[float],
    lengths: Optional[Sequence[float]] = None,
    domain: Optional[Domain] = None,
    settings: Optional[PersistenceSettings] = None,
) -> FilteredComplex:
    """
    Cubical complex of an ``nx`` by ``ny`` grid with lower-star values.

    Ids: vertices ``i + nx * j``, then x-edges, then y-edges, then squares.
    Edges point toward increasing coordinate; squares are counterclockwise.
    ``ny == 1`` builds a 1D complex (circle or path).

    Args:
        nx, ny: Grid size
        periodic: Periodicity of each axis
        vertex_values: Row-major vertex values (node ``i + nx * j``)
        lengths: Physical size of the domain; unit spacing when omitted
        domain: Domain tag; inferred from periodicity when omitted
        settings: Persistence settings (size limit)

    Raises:
        SizeExceededError: If the grid exceeds the configured limit
        NonFiniteValueError: If a vertex value is not finite
    """
    settings = settings or get_settings().persistence
    if nx < 1 or ny < 1:
        raise ValidationError("grid sizes must be positive", field="shape", value=(nx, ny))
    if nx * ny > settings.max_grid_cells:
        raise SizeExceededError(f"grid {nx}x{ny} exceeds the size limit", size=nx * ny, limit=settings.max_grid_cells)
    values = validate_finite(vertex_values, "vertex values").ravel()
    if values.size != nx * ny:
        raise ValidationError("vertex values do not match the grid", field="vertex_values", value=values.size)
    one_d = ny == 1
    px, py = bool(periodic[0]), bool(periodic[1]) and not one_d
    for n, flag in ((nx, px), (ny, py)):
        if flag and n < 3:
            raise ValidationError("periodic axes need at least 3 nodes", field="shape", value=(nx, ny))

    spacing = (
        tuple(float(length) / n for length, n in zip(lengths, (nx, ny)))
        if lengths is not None
        else (1.0, 1.0)
    )
    if len(spacing) == 1:
        spacing = (spacing[0], 1.0)

    def vid(i: int, j: int) -> int:
        return (i % nx) + nx * (j % ny)

    dims: List[int] = []
    boundaries: List[Boundary] = []
    cell_vertices: List[Tuple[int, ...]] = []
    lattice: List[Tuple[float, float]] = []

    for j in range(ny):
        for i in range(nx):
            dims.append(0)
            boundaries.append(())
            cell_vertices.append((vid(i, j),))
            lattice.append((i, j))

    ex = nx if px else nx - 1
    x_edge: Dict[Tuple[int, int], int] = {}
    for j in range(ny):
        for i in range(ex):
            x_edge[(i, j)] = len(dims)
            tail, head = vid(i, j), vid(i + 1, j)
            dims.append(1)
            boundaries.append(((head, 1), (tail, -1)))
            cell_vertices.append((tail, head))
            lattice.append((i + 0.5, j))

    if not one_d:
        ey = ny if py else ny - 1
        y_edge: Dict[Tuple[int, int], int] = {}
        for j in range(ey):
            for i in range(nx):
                y_edge[(i, j)] = len(dims)
                tail, head = vid(i, j), vid(i, j + 1)
                dims.append(1)
                boundaries.append(((head, 1), (tail, -1)))
                cell_vertices.append((tail, head))
                lattice.append((i, j + 0.5))
        for j in range(ey):
            for i in range(ex):
                dims.append(2)
                boundaries.append(
                    (
                        (x_edge[(i, j)], 1),
                        (y_edge[((i + 1) % nx, j)], 1),
                        (x_edge[(i, (j + 1) % ny)], -1),
                        (y_edge[(i, j)], -1),
                    )
                )
                cell_vertices.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)))
                lattice.append((i + 0.5, j + 0.5))

    dims_arr = np.asarray(dims, dtype=np.int64)
    cell_values, lower_vertex, order = _lower_star(dims_arr, cell_vertices, values)
    scale = np.asarray(spacing)
    lattice_arr = np.asarray(lattice, dtype=float) * scale
    if one_d:
        lattice_arr = lattice_arr[:, :1]
    coordinates = lattice_arr[: nx * ny]

    if domain is None:
        if one_d and px:
            domain = Domain.circle(nx * spacing[0])
        elif px and py:
            domain = Domain.flat_torus(nx * spacing[0], ny * spacing[1])
        else:
            domain = Domain.abstract("grid")

    fc = FilteredComplex(
        dims=dims_arr,
        values=cell_values,
        boundaries=tuple(boundaries),
        order=order,
        vertex_values=values,
        lower_vertex=lower_vertex,
        domain=domain,
        coordinates=coordinates,
        barycenters=lattice_arr,
        grid=GridInfo(shape=(nx, ny), periodic=(px, py)),
    )
    logger.debug("cubical_complex_built", shape=(nx, ny), periodic=(px, py), counts=fc.counts())
    return fc


def _permutation_sign(seq: Sequence[int]) -> int:
    sign = 1
    items = list(seq)
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if items[i] > items[j]:
                sign = -sign
    return sign


def _parse_simplicial(path: Path):
    try:
        raw = path.read_text().splitlines()
    except OSError as exc:
        raise ComplexParseError(f"cannot read complex file: {exc}", path=str(path)) from exc
    lines = [(n + 1, line.split()) for n, line in enumerate(raw) if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise ComplexParseError("empty complex file", path=str(path))

    line_no, header = lines[0]
    try:
        dim, nv, ns = (int(tok) for tok in header)
    except ValueError as exc:
        raise ComplexParseError("header must be 'dim nv ns'", path=str(path), line=line_no) from exc
    if dim < 1 or dim > 2:
        raise ComplexParseError("only curves and surfaces are supported", path=str(path), line=line_no)
    if len(lines) != 1 + nv + ns:
        raise ComplexParseError(f"expected {nv} vertex and {ns} simplex lines", path=str(path))

    coords, values = [], []
    for line_no, tokens in lines[1 : 1 + nv]:
        if len(tokens) != 4:
            raise ComplexParseError("vertex lines are 'x y z value'", path=str(path), line=line_no)
        try:
            x, y, z, value = (float(tok) for tok in tokens)
        except ValueError as exc:
            raise ComplexParseError("vertex line is not numeric", path=str(path), line=line_no) from exc
        coords.append((x, y, z))
        values.append(value)

    simplices = []
    for line_no, tokens in lines[1 + nv :]:
        try:
            simplex = tuple(int(tok) for tok in tokens)
        except ValueError as exc:
            raise ComplexParseError("simplex line is not integer", path=str(path), line=line_no) from exc
        if len(simplex) != dim + 1 or len(set(simplex)) != dim + 1:
            raise ComplexParseError(f"simplex needs {dim + 1} distinct vertices", path=str(path), line=line_no)
        if min(simplex) < 0 or max(simplex) >= nv:
            raise ComplexParseError("vertex id out of range", path=str(path), line=line_no)
        simplices.append(simplex)
    return dim, np.asarray(coords), np.asarray(values), simplices


def load_simplicial(path: Union[str, Path]) -> FilteredComplex:
    """
    Load an oriented simplicial curve or surface and build its face closure.

    Raises:
        ComplexParseError: On malformed input
        NonFiniteValueError: If a vertex value is not finite
        OrientationError: If two triangles induce the same direction on an edge
    """
    path = Path(path)
    dim, coords, vertex_values, tops = _parse_simplicial(path)
    vertex_values = validate_finite(vertex_values, "vertex values")
    nv = len(vertex_values)

    orientation: Dict[Tuple[int, ...], int] = {}
    for simplex in tops:
        key = tuple(sorted(simplex))
        if key in orientation:
            raise ComplexParseError(f"duplicate simplex {simplex}", path=str(path))
        orientation[key] = _permutation_sign(simplex)

    faces_by_dim: List[set] = [set() for _ in range(dim + 1)]
    faces_by_dim[0] = {(v,) for v in range(nv)}
    for key in orientation:
        for k in range(1, dim + 1):
            faces_by_dim[k].update(itertools.combinations(key, k + 1))

    ids: Dict[Tuple[int, ...], int] = {}
    cell_vertices: List[Tuple[int, ...]] = []
    dims: List[int] = []
    for k in range(dim + 1):
        for face in sorted(faces_by_dim[k]):
            ids[face] = len(cell_vertices)
            cell_vertices.append(face)
            dims.append(k)

    boundaries: List[Boundary] = []
    incidences: Dict[int, List[int]] = defaultdict(list)
    for face in cell_vertices:
        k = len(face) - 1
        if k == 0:
            boundaries.append(())
            continue
        sign = orientation.get(face, 1) if k == dim else 1
        entries = tuple(
            (ids[face[:i] + face[i + 1 :]], sign * (-1) ** i) for i in range(k + 1)
        )
        boundaries.append(entries)
        if k == dim == 2:
            for edge, coef in entries:
                incidences[edge].append(coef)

    if dim == 2:
        irregular = 0
        for edge, coefs in incidences.items():
            if len(coefs) != 2:
                irregular += 1
            elif coefs[0] == coefs[1]:
                raise OrientationError(
                    f"triangles induce the same orientation on edge {cell_vertices[edge]}", edge=cell_vertices[edge]
                )
        if irregular:
            logger.warning("non_manifold_edges", path=str(path), edges=irregular)
            warnings.warn(f"{irregular} edges are not shared by exactly two triangles", NonManifoldWarning, stacklevel=2)

    dims_arr = np.asarray(dims, dtype=np.int64)
    values, lower_vertex, order = _lower_star(dims_arr, cell_vertices, vertex_values)
    barycenters = np.array([coords[list(face)].mean(axis=0) for face in cell_vertices])
    fc = FilteredComplex(
        dims=dims_arr,
        values=values,
        boundaries=tuple(boundaries),
        order=order,
        vertex_values=vertex_values,
        lower_vertex=lower_vertex,
        domain=Domain.abstract(path.stem),
        coordinates=coords,
        barycenters=barycenters,
    )
    logger.info("simplicial_complex_loaded", path=str(path), counts=fc.counts(), euler=fc.euler_characteristic)
    return fc


def boundary_matrix(fc: FilteredComplex, p: int, relative: bool = False) -> sp.csc_matrix:
    """
    Signed boundary matrix from p-cells to (p-1)-cells, both in filtration order.

    With ``relative`` only active, non-quotiented cells index rows and columns.
    """
    if not 1 <= p <= fc.max_dim:
        raise ValidationError("boundary degree out of range", field="p", value=p)
    rows_ids = fc.ids_of_dim(p - 1, relative)
    col_ids = fc.ids_of_dim(p, relative)
    position = np.full(fc.n_cells, -1, dtype=np.int64)
    position[rows_ids] = np.arange(len(rows_ids))
    rows, cols, data = [], [], []
    for j, cell in enumerate(col_ids):
        for face, sign in fc.boundaries[cell]:
            i = position[face]
            if i >= 0:
                rows.append(i)
                cols.append(j)
                data.append(sign)
    return sp.csc_matrix(
        (np.asarray(data, dtype=np.int64), (rows, cols)), shape=(len(rows_ids), len(col_ids))
    )


def check_chain_complex(fc: FilteredComplex) -> List[str]:
    """
    Structural checks of a filtered complex.

    Returns:
        Descriptions of every failed check (empty when valid)
    """
    problems: List[str] = []
    if fc.max_dim >= 1:
        # augmentation: every edge boundary has coefficients summing to zero
        column_sums = np.asarray(boundary_matrix(fc, 1).sum(axis=0)).ravel()
        if np.any(column_sums):
            problems.append(f"augmentation of an edge boundary is nonzero ({int(np.count_nonzero(column_sums))} edges)")
    for p in range(1, fc.max_dim):
        product = (boundary_matrix(fc, p) @ boundary_matrix(fc, p + 1)).tocoo()
        product.eliminate_zeros()
        if product.nnz:
            problems.append(f"boundary of boundary is nonzero in degree {p + 1} ({product.nnz} entries)")
    for cell, entries in enumerate(fc.boundaries):
        for face, _ in entries:
            if fc.dims[face] != fc.dims[cell] - 1:
                problems.append(f"cell {cell} has a face of the wrong dimension")
                break
            if fc.values[face] > fc.values[cell]:
                problems.append(f"cell {cell} precedes its face {face} in value")
                break
            if fc.order[face] > fc.order[cell]:
                problems.append(f"cell {cell} precedes its face {face} in the order")
                break
    ordered = fc.values[fc.sorted_ids]
    if np.any(np.diff(ordered) < 0):
        problems.append("total order does not refine the filtration values")
    return problems


def restrict_window(
    fc: FilteredComplex,
    window: WindowSpec,
    critical_values: Optional[Sequence[float]] = None,
    value_tol: float = 0.0,
) -> FilteredComplex:
    """
    Encode the pair (f^b, f^a) by marking cells.

    Cells with value <= a are quotiented, cells with value > b are dropped;
    ids and order are unchanged.

    Raises:
        WindowOnCriticalValueError: If a or b lies within ``value_tol`` of a critical value
            or of a vertex value
    """
    for level in (window.a, window.b):
        if not np.isfinite(level):
            continue
        for value in critical_values or ():
            if abs(value - level) <= value_tol:
                raise WindowOnCriticalValueError(
                    f"window level {level:g} coincides with critical value {value:g}", level=level, value=value
                )
        on_vertex = np.flatnonzero(np.abs(fc.vertex_values - level) <= value_tol)
        if on_vertex.size:
            vertex = int(on_vertex[0])
            raise WindowOnCriticalValueError(
                f"window level {level:g} equals the value of vertex {vertex}",
                level=level,
                value=float(fc.vertex_values[vertex]),
            )
    quotiented = fc.values <= window.a
    active = fc.values <= window.b
    restricted = fc.with_marks(quotiented=quotiented, active=active, window=window)
    logger.debug(
        "window_restricted",
        window=str(window),
        quotiented=int(quotiented.sum()),
        dropped=int((~active).sum()),
    )
    return restricted


def cell_vertex_sets(fc: FilteredComplex) -> List[Tuple[int, ...]]:
    """Sorted vertex ids of every cell, collected through the boundaries (vertex cells come first)."""
    vertex_sets: List[Tuple[int, ...]] = [()] * fc.n_cells
    for cell in np.argsort(fc.dims, kind="stable"):
        cell = int(cell)
        if fc.dims[cell] == 0:
            vertex_sets[cell] = (cell,)
        else:
            vertex_sets[cell] = tuple(sorted({v for face, _ in fc.boundaries[cell] for v in vertex_sets[face]}))
    return vertex_sets


def with_vertex_values(fc: FilteredComplex, vertex_values: Sequence[float]) -> FilteredComplex:
    """
    The same cells filtered by new vertex values.

    Marks are dropped; restrict the result again if a window is needed.
    """
    values = validate_finite(vertex_values, "vertex values").ravel()
    if values.size != fc.n_vertices:
        raise ValidationError("one value per vertex is required", field="vertex_values", value=values.size)
    cell_values, lower_vertex, order = _lower_star(fc.dims, cell_vertex_sets(fc), values)
    return replace(
        fc,
        values=cell_values,
        lower_vertex=lower_vertex,
        order=order,
        vertex_values=values,
        quotiented=None,
        active=None,
        window=None,
    )
