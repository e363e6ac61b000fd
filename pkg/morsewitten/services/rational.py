"""
Exact sparse linear algebra over the rationals.

Columns are dicts ``row -> Fraction`` with no stored zeros. Elimination
always pivots on the largest row key, the same convention as the
persistence reduction, so ranks, span membership and kernels are exact.
"""

from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

Column = Dict[int, Fraction]


def as_column(entries: Iterable[Tuple[int, int]]) -> Column:
    """Column from (row, coefficient) pairs; repeated rows are summed."""
    column: Column = {}
    for row, coef in entries:
        value = column.get(row, Fraction(0)) + Fraction(coef)
        if value:
            column[row] = value
        else:
            column.pop(row, None)
    return column


def axpy(target: Column, factor: Fraction, source: Mapping[int, Fraction]) -> None:
    """target += factor * source, in place, dropping zeros."""
    for row, value in source.items():
        new = target.get(row, Fraction(0)) + factor * value
        if new:
            target[row] = new
        else:
            target.pop(row, None)


class ColumnEchelon:
    """
    Incremental column echelon form.

    Each stored column has a distinct pivot (its largest row key) and is
    normalised so the pivot coefficient is one.
    """

    def __init__(self) -> None:
        self.pivots: Dict[int, Column] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, column: Mapping[int, Fraction]) -> Column:
        """Remainder of ``column`` after eliminating against stored pivots."""
        col = dict(column)
        while col:
            low = max(col)
            basis = self.pivots.get(low)
            if basis is None:
                break
            axpy(col, -col[low], basis)
        return col

    def add(self, column: Mapping[int, Fraction]) -> bool:
        """Insert ``column``; returns False when it was already in the span."""
        remainder = self.reduce(column)
        if not remainder:
            return False
        low = max(remainder)
        scale = remainder[low]
        self.pivots[low] = {row: value / scale for row, value in remainder.items()}
        return True

    def extend(self, columns: Iterable[Mapping[int, Fraction]]) -> int:
        return sum(1 for column in columns if self.add(column))

    def contains(self, column: Mapping[int, Fraction]) -> bool:
        return not self.reduce(column)


def rank(columns: Iterable[Mapping[int, Fraction]]) -> int:
    """Rank of the matrix with the given columns."""
    echelon = ColumnEchelon()
    echelon.extend(columns)
    return echelon.rank


def kernel_basis(columns: Sequence[Mapping[int, Fraction]]) -> List[Column]:
    """
    Basis of the kernel of the matrix whose j-th column is ``columns[j]``.

    Returns:
        Kernel vectors as dicts ``column index -> coefficient``
    """
    pivots: Dict[int, Tuple[Column, Column]] = {}
    kernel: List[Column] = []
    for j, column in enumerate(columns):
        col = dict(column)
        combo: Column = {j: Fraction(1)}
        while col:
            low = max(col)
            entry = pivots.get(low)
            if entry is None:
                break
            base_col, base_combo = entry
            factor = -col[low] / base_col[low]
            axpy(col, factor, base_col)
            axpy(combo, factor, base_combo)
        if col:
            pivots[max(col)] = (col, combo)
        else:
            kernel.append(combo)
    return kernel


def combine(vectors: Mapping[int, Fraction], columns: Sequence[Mapping[int, Fraction]]) -> Column:
    """Linear combination sum_j vectors[j] * columns[j]."""
    out: Column = {}
    for j, coef in vectors.items():
        axpy(out, coef, columns[j])
    return out


def restrict(column: Mapping[int, Fraction], keep) -> Column:
    """Entries of ``column`` whose row satisfies ``keep(row)``."""
    return {row: value for row, value in column.items() if keep(row)}


def first_nonzero(column: Mapping[int, Fraction]) -> Optional[int]:
    return max(column) if column else None
