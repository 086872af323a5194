"""Latin squares built from circulant blocks, rich in 2x2 subsquares.

An even order ``n = 2k`` square has the block form ``[[A, B], [B^T, A^T]]``
where ``A`` is the k x k circulant with first row ``1..k`` and ``B`` is the
same circulant shifted up by ``k``.  Every cell of it lies in exactly
``n/2`` intercalates.  Odd orders are obtained by prolongation along a
transversal of a slightly smaller even square.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OddOrder, RowMismatch, SameQuadrant, UnsupportedOrder
from .squares import SYMBOL_DTYPE, LatinSquare

_CHUNK = 512


def circulant_cell(i: int, j: int, k: int) -> int:
    """Symbol of the even core of order ``2k`` at 0-based (i, j)."""
    top, left = i < k, j < k
    diff = (j - i) if top else (i - j)
    return diff % k + 1 + (0 if top == left else k)


def _even_core(n: int) -> np.ndarray:
    k = n // 2
    out = np.empty((n, n), dtype=SYMBOL_DTYPE)
    j = np.arange(n, dtype=np.int32)
    cross = (j >= k).astype(np.int32) * k
    for lo in range(0, n, _CHUNK):
        i = np.arange(lo, min(lo + _CHUNK, n), dtype=np.int32)[:, None]
        top = i < k
        diff = np.where(top, j - i, i - j) % k + 1
        out[lo:lo + len(i)] = diff + np.where(top, cross, k - cross)
    return out


@dataclass
class StructuredSquare:
    """A constructed square plus what is known about its block structure.

    ``half`` is k for an even core of order 2k.  ``flagged`` holds the
    cells (row, col) whose contents do not follow the circulant formula,
    including any appended row and column.
    """

    square: LatinSquare
    half: int
    flagged: frozenset = field(default_factory=frozenset)

    @property
    def order(self) -> int:
        return self.square.order

    @property
    def cells(self) -> np.ndarray:
        return self.square.cells

    def quadrant(self, r: int, c: int):
        """'A', 'B', 'Bt', 'At' for cells of the even core, None outside it."""
        k = self.half
        if r >= 2 * k or c >= 2 * k:
            return None
        return (("A", "B"), ("Bt", "At"))[r >= k][c >= k]

    def column_half(self, c: int):
        return None if c >= 2 * self.half else int(c >= self.half)


def build_even(n: int) -> StructuredSquare:
    if n < 2 or n % 2:
        raise OddOrder(f"build_even needs an even order >= 2, got {n}")
    return StructuredSquare(LatinSquare(_even_core(n), validate=False), n // 2)


def _swap_intercalate(L: np.ndarray, cells):
    """Swap the symbols of a 2x2 subsquare given as its four corners."""
    (r1, c1), (r2, c2) = cells[0], cells[3]
    a, b = L[r1, c1], L[r1, c2]
    assert L[r2, c2] == a and L[r2, c1] == b, "not an intercalate"
    L[r1, c1], L[r1, c2], L[r2, c1], L[r2, c2] = b, a, a, b


def _row_intercalate(L: np.ndarray, r: int, s: int, t: int):
    """The 2x2 subsquare through the cells of row r holding s and t."""
    c1 = int(np.nonzero(L[r] == s)[0][0])
    c2 = int(np.nonzero(L[r] == t)[0][0])
    r2 = int(np.nonzero(L[:, c1] == t)[0][0])
    if L[r2, c2] != s:
        raise AssertionError(f"cells of row {r} holding {s}, {t} are not in an intercalate")
    return [(r, c1), (r, c2), (r2, c1), (r2, c2)]


def transversal_cells(n: int):
    """The prolongation transversal (0-based cells) for odd ``n >= 5``."""
    if n % 4 == 1:
        k = (n - 1) // 4
        one = [(i, 2 * i - 1) for i in range(1, k + 1)]
        one += [(k + j, 2 * k + 2 * j - 1) for j in range(1, k + 1)]
        one += [(2 * k + j, 2 * k + 2 * j) for j in range(1, k + 1)]
        one += [(3 * k + j, 2 * j) for j in range(1, k + 1)]
    else:
        k = (n + 1) // 4
        one = [(i, 2 * i - 1) for i in range(1, k + 1)]
        one += [(k + j, 2 * k + 2 * j - 2) for j in range(1, k)]
        one += [(2 * k + j - 1, 2 * k + 2 * j - 1) for j in range(1, k)]
        one += [(3 * k - 2 + j, 2 * j) for j in range(1, k)]
        one += [(4 * k - 2, 4 * k - 2)]
    return [(r - 1, c - 1) for r, c in one]


def build_odd(n: int) -> StructuredSquare:
    if n % 2 == 0:
        raise UnsupportedOrder(f"build_odd needs an odd order, got {n}")
    if n < 5:
        raise UnsupportedOrder(f"order {n} has no structured construction")
    m = n - 1
    core = _even_core(m)
    L = core.copy()
    if n % 4 == 3:
        h = m // 2
        _swap_intercalate(L, _row_intercalate(L, m - 1, 2, m))
        cells = _row_intercalate(L.T, m - 1, h, m)
        _swap_intercalate(L, [(c, r) for r, c in cells])
        _swap_intercalate(L, [(m - 2, m - 2), (m - 2, m - 1), (m - 1, m - 2), (m - 1, m - 1)])
    tv = transversal_cells(n)
    out = np.empty((n, n), dtype=SYMBOL_DTYPE)
    out[:m, :m] = L
    for r, c in tv:
        s = L[r, c]
        out[m, c] = s
        out[r, m] = s
        out[r, c] = n
    out[m, m] = n
    diff = np.argwhere(out[:m, :m] != core)
    flagged = {(int(r), int(c)) for r, c in diff}
    flagged.update((m, j) for j in range(n))
    flagged.update((i, m) for i in range(n))
    return StructuredSquare(LatinSquare(out, validate=False), m // 2, frozenset(flagged))


def build(n: int) -> StructuredSquare:
    """Structured square of any order the construction supports (n != 1, 3)."""
    if n % 2 == 0:
        return build_even(n)
    return build_odd(n)


def subsquare_partner(S: StructuredSquare, cell1, cell2):
    """The intercalate through two cells of one row in opposite column halves.

    Returns the four cells ``[(r, c1), (r, c2), (x, c1), (x, c2)]`` or None
    when a cell involved is flagged or the expected subsquare is not there.
    """
    (r, c1), (r_b, c2) = cell1, cell2
    if r != r_b:
        raise RowMismatch(f"cells {cell1} and {cell2} are in different rows")
    h1, h2 = S.column_half(c1), S.column_half(c2)
    if h1 is not None and h1 == h2:
        raise SameQuadrant(f"columns {c1} and {c2} lie in the same half")
    L = S.cells
    if cell1 in S.flagged or cell2 in S.flagged:
        return None
    x = int(np.nonzero(L[:, c1] == L[r, c2])[0][0])
    if L[x, c2] != L[r, c1]:
        return None
    quad = [(r, c1), (r, c2), (x, c1), (x, c2)]
    if any(q in S.flagged for q in quad):
        return None
    return quad


def count_subsquares(S, cell) -> int:
    """Number of 2x2 subsquares of the current square containing ``cell``."""
    L = S.cells if hasattr(S, "cells") else np.asarray(S)
    r, c = cell
    n = L.shape[0]
    col = L[:, c].astype(np.intp)
    row_of = np.empty(n + 1, dtype=np.intp)
    row_of[col] = np.arange(n)
    others = np.array([j for j in range(n) if j != c], dtype=np.intp)
    x = row_of[L[r, others].astype(np.intp)]  # row of L(r, c2) in column c
    return int(np.count_nonzero(L[x, others] == L[r, c]))
