"""Partial, full and improper Latin squares.

Cells are stored in a square numpy array of unsigned 16-bit integers.
Symbols are ``1..n`` and ``0`` marks a blank cell, so orders up to 65535
fit.  Rows and columns are indexed from 0 in the Python API.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DuplicateInColumn,
    DuplicateInRow,
    NonSquareInput,
    OrderMismatch,
    SymbolOutOfRange,
)

SYMBOL_DTYPE = np.uint16
MAX_ORDER = np.iinfo(SYMBOL_DTYPE).max

# rows per block when scanning big squares, keeps temporaries small
_BLOCK = 256


def _as_grid(cells) -> np.ndarray:
    """Coerce nested lists (``None``/``0``/``'.'`` for blanks) or arrays."""
    if isinstance(cells, np.ndarray):
        arr = cells
    else:
        rows = [list(r) for r in cells]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise NonSquareInput("every row must have as many entries as there are rows")
        arr = np.zeros((n, n), dtype=np.int64)
        for i, row in enumerate(rows):
            for j, v in enumerate(row):
                arr[i, j] = 0 if v is None or v == "." else int(v)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NonSquareInput(f"expected an n x n array, got shape {arr.shape}")
    n = arr.shape[0]
    if n == 0:
        raise NonSquareInput("order must be positive")
    if n > MAX_ORDER:
        raise NonSquareInput(f"order {n} exceeds {MAX_ORDER}")
    if arr.dtype != SYMBOL_DTYPE:
        bad = (arr < 0) | (arr > n)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise SymbolOutOfRange(int(i) + 1, int(j) + 1, int(arr[i, j]), n)
        arr = arr.astype(SYMBOL_DTYPE)
    else:
        over = arr > n
        if over.any():
            i, j = np.argwhere(over)[0]
            raise SymbolOutOfRange(int(i) + 1, int(j) + 1, int(arr[i, j]), n)
    return arr


def _first_duplicate(arr: np.ndarray):
    """Return the first repeated entry in row-major order, or None.

    The result is ``("row", r, s)`` or ``("column", c, s)`` with 0-based
    line index.  A cell repeating both its row and its column reports the row.
    """
    n = arr.shape[0]
    seen = np.zeros((n, n + 1), dtype=bool)  # seen[c, s]: s already met in column c
    cols = np.arange(n)
    for r in range(n):
        row = arr[r]
        filled = row > 0
        if not filled.any():
            continue
        c_f = cols[filled]
        s_f = row[filled].astype(np.intp)
        _, first = np.unique(s_f, return_index=True)
        row_dup = np.ones(len(s_f), dtype=bool)
        row_dup[first] = False
        col_dup = seen[c_f, s_f]
        bad = row_dup | col_dup
        if bad.any():
            k = int(np.argmax(bad))
            kind = "row" if row_dup[k] else "column"
            return (kind, r if kind == "row" else int(c_f[k]), int(s_f[k]))
        seen[c_f, s_f] = True
    return None


@dataclass(frozen=True)
class DensityProfile:
    """Usage statistics of a partial square.

    ``max_line`` is the largest number of filled cells in any row, column
    or symbol class; ``eps`` and ``delta`` are the normalised forms.
    """

    n: int
    max_line: int
    fill: int

    @property
    def eps(self) -> float:
        return self.max_line / self.n

    @property
    def delta(self) -> float:
        return self.fill / (self.n * self.n)

    @property
    def eps_exact(self) -> Fraction:
        return Fraction(self.max_line, self.n)

    @property
    def delta_exact(self) -> Fraction:
        return Fraction(self.fill, self.n * self.n)


class PartialLatinSquare:
    """An n x n grid of optional symbols with no repeats in rows or columns."""

    __slots__ = ("cells",)

    def __init__(self, cells, *, validate: bool = True):
        arr = _as_grid(cells)
        if validate:
            dup = _first_duplicate(arr)
            if dup is not None:
                kind, idx, s = dup
                if kind == "row":
                    raise DuplicateInRow(idx + 1, s)
                raise DuplicateInColumn(idx + 1, s)
        self.cells = arr

    @classmethod
    def empty(cls, n: int) -> "PartialLatinSquare":
        return cls(np.zeros((n, n), dtype=SYMBOL_DTYPE), validate=False)

    @property
    def order(self) -> int:
        return self.cells.shape[0]

    @property
    def fill(self) -> int:
        return int(np.count_nonzero(self.cells))

    def __getitem__(self, rc):
        v = int(self.cells[rc])
        return v or None

    def filled_cells(self):
        """Filled cells as ``(rows, cols, symbols)`` arrays in row-major order."""
        r, c = np.nonzero(self.cells)
        return r, c, self.cells[r, c]

    def to_lists(self):
        return [[int(v) or None for v in row] for row in self.cells]

    def __eq__(self, other):
        if not isinstance(other, PartialLatinSquare):
            return NotImplemented
        return self.cells.shape == other.cells.shape and bool(np.array_equal(self.cells, other.cells))

    def __repr__(self):
        return f"PartialLatinSquare(order={self.order}, fill={self.fill})"


class LatinSquare(PartialLatinSquare):
    """A completely filled partial square."""

    __slots__ = ()

    def __init__(self, cells, *, validate: bool = True):
        arr = _as_grid(cells)
        if validate and not is_latin(arr):
            super().__init__(arr)  # raises the precise duplicate error if there is one
            raise ValueError("square has blank cells")
        self.cells = arr


def validate_partial(cells) -> PartialLatinSquare:
    return PartialLatinSquare(cells)


def is_latin(square) -> bool:
    """True iff every row and every column is a permutation of ``1..n``."""
    try:
        arr = _as_grid(square.cells if isinstance(square, PartialLatinSquare) else square)
    except (NonSquareInput, SymbolOutOfRange):
        return False
    n = arr.shape[0]
    want = np.arange(1, n + 1, dtype=SYMBOL_DTYPE)
    for lo in range(0, n, _BLOCK):
        if not (np.sort(arr[lo:lo + _BLOCK], axis=1) == want).all():
            return False
        if not (np.sort(arr[:, lo:lo + _BLOCK].T, axis=1) == want).all():
            return False
    return True


def line_counts(P: PartialLatinSquare):
    """Filled-cell counts per row, per column and per symbol (index s-1)."""
    cells = P.cells
    n = P.order
    filled = cells > 0
    rows = np.count_nonzero(filled, axis=1)
    cols = np.count_nonzero(filled, axis=0)
    syms = np.zeros(n + 1, dtype=np.int64)
    for lo in range(0, n, _BLOCK):
        syms += np.bincount(cells[lo:lo + _BLOCK].ravel(), minlength=n + 1)
    return rows, cols, syms[1:]


def density(P: PartialLatinSquare) -> DensityProfile:
    rows, cols, syms = line_counts(P)
    max_line = int(max(rows.max(), cols.max(), syms.max()))
    return DensityProfile(P.order, max_line, int(rows.sum()))


def disagreement_cells(P: PartialLatinSquare, L: PartialLatinSquare):
    """Filled cells of ``P`` where ``L`` holds a different symbol, row-major."""
    if P.order != L.order:
        raise OrderMismatch(f"orders differ: {P.order} vs {L.order}")
    r, c, s = P.filled_cells()
    bad = L.cells[r, c] != s
    return [(int(i), int(j)) for i, j in zip(r[bad], c[bad])]


class ImproperSquare:
    """Signed symbol multisets per cell, held as an ``(n, n, n)`` int8 cube.

    ``cube[r, c, s - 1]`` is the coefficient of symbol ``s`` in cell (r, c).
    """

    __slots__ = ("cube",)

    def __init__(self, cube: np.ndarray):
        cube = np.asarray(cube, dtype=np.int8)
        if cube.ndim != 3 or len(set(cube.shape)) != 1:
            raise NonSquareInput(f"expected an n x n x n cube, got {cube.shape}")
        self.cube = cube

    @classmethod
    def from_square(cls, P: PartialLatinSquare) -> "ImproperSquare":
        n = P.order
        cube = np.zeros((n, n, n), dtype=np.int8)
        r, c, s = P.filled_cells()
        cube[r, c, s.astype(np.intp) - 1] = 1
        return cls(cube)

    @classmethod
    def from_terms(cls, grid) -> "ImproperSquare":
        """Build from nested lists whose entries are ints, None, or ``[(sym, coef), ...]``."""
        n = len(grid)
        cube = np.zeros((n, n, n), dtype=np.int8)
        for i, row in enumerate(grid):
            for j, v in enumerate(row):
                if v is None:
                    continue
                terms = [(v, 1)] if isinstance(v, (int, np.integer)) else v
                for s, k in terms:
                    cube[i, j, s - 1] += k
        return cls(cube)

    @property
    def order(self) -> int:
        return self.cube.shape[0]

    def terms(self, r: int, c: int):
        """Nonzero ``(symbol, coefficient)`` pairs of a cell, positives first."""
        v = self.cube[r, c]
        idx = np.nonzero(v)[0]
        out = [(int(s) + 1, int(v[s])) for s in idx]
        out.sort(key=lambda t: (-t[1], t[0]))
        return out

    def improper_cells(self):
        """Cells whose multiset is not a single +1 symbol."""
        cube = self.cube
        single = ((cube == 1).sum(axis=2) == 1) & ((cube != 0).sum(axis=2) == 1)
        occupied = (cube != 0).any(axis=2)
        return [(int(i), int(j)) for i, j in np.argwhere(occupied & ~single)]

    def is_proper(self) -> bool:
        return not self.improper_cells()

    def to_square(self) -> PartialLatinSquare:
        if not self.is_proper():
            raise ValueError("square still has improper cells")
        cube = self.cube
        occupied = (cube != 0).any(axis=2)
        cells = np.where(occupied, np.argmax(cube, axis=2) + 1, 0)
        return PartialLatinSquare(cells.astype(SYMBOL_DTYPE))

    def copy(self) -> "ImproperSquare":
        return ImproperSquare(self.cube.copy())

    def __eq__(self, other):
        if not isinstance(other, ImproperSquare):
            return NotImplemented
        return bool(np.array_equal(self.cube, other.cube))


def validate_improper(square: ImproperSquare, partial: bool = False) -> bool:
    """Check the signed line sums of an improper square.

    Every symbol must sum to 1 along each row and each column, or to 0 or 1
    when ``partial`` is set.  In the full variant every cell must hold a
    nonempty multiset.
    """
    cube = square.cube.astype(np.int32)
    row_sums = cube.sum(axis=1)  # (r, s)
    col_sums = cube.sum(axis=0)  # (c, s)
    if partial:
        return bool(np.isin(row_sums, (0, 1)).all() and np.isin(col_sums, (0, 1)).all())
    if not (cube != 0).any(axis=2).all():
        return False
    return bool((row_sums == 1).all() and (col_sums == 1).all())
