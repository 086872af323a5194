from fractions import Fraction

import numpy as np
import pytest

from latinfill.errors import DuplicateInColumn, DuplicateInRow, NonSquareInput, SymbolOutOfRange
from latinfill.squares import (
    ImproperSquare,
    LatinSquare,
    PartialLatinSquare,
    density,
    disagreement_cells,
    is_latin,
    line_counts,
    validate_improper,
)

SMALL = [[1, 2, None], [None, 3, None], [None, None, 2]]


def test_small_partial_square():
    P = PartialLatinSquare(SMALL)
    assert P.order == 3 and P.fill == 4
    assert P[0, 1] == 2 and P[0, 2] is None
    r, c, s = P.filled_cells()
    assert list(zip(r, c, s)) == [(0, 0, 1), (0, 1, 2), (1, 1, 3), (2, 2, 2)]
    assert P.to_lists() == SMALL


def test_dot_and_zero_mean_blank():
    assert PartialLatinSquare([[".", 0], [0, 1]]).fill == 1


def test_duplicate_reported_one_based():
    with pytest.raises(DuplicateInRow) as e:
        PartialLatinSquare([[1, 1], [None, None]])
    assert e.value.row == 1 and e.value.symbol == 1
    with pytest.raises(DuplicateInColumn) as e:
        PartialLatinSquare([[None, 2], [None, 2]])
    assert e.value.col == 2


def test_shape_and_range_errors():
    with pytest.raises(NonSquareInput):
        PartialLatinSquare([[1, 2]])
    with pytest.raises(SymbolOutOfRange) as e:
        PartialLatinSquare([[1, 3], [None, None]])
    assert (e.value.row, e.value.col, e.value.symbol) == (1, 2, 3)


def test_is_latin():
    assert is_latin(LatinSquare([[1, 2, 3], [2, 3, 1], [3, 1, 2]]))
    assert not is_latin(PartialLatinSquare(SMALL))
    assert not is_latin(np.array([[1, 2], [1, 2]]))


def test_density_counts_symbols_too():
    P = PartialLatinSquare([[1, None, None], [None, 1, None], [None, None, 1]])
    rows, cols, syms = line_counts(P)
    assert rows.tolist() == [1, 1, 1] and syms.tolist() == [3, 0, 0]
    d = density(P)
    assert d.max_line == 3 and d.eps_exact == 1 and d.delta_exact == Fraction(1, 3)


def test_disagreements():
    P = PartialLatinSquare(SMALL)
    L = LatinSquare([[1, 2, 3], [2, 3, 1], [3, 1, 2]])
    assert disagreement_cells(P, L) == []
    L2 = LatinSquare([[2, 1, 3], [1, 3, 2], [3, 2, 1]])
    assert disagreement_cells(P, L2) == [(0, 0), (0, 1), (2, 2)]


def test_improper_terms_and_line_sums():
    I = ImproperSquare.from_terms([[[(3, 1), (2, 1), (1, -1)], 1, 2], [1, 2, 3], [2, 3, 1]])
    assert I.terms(0, 0) == [(2, 1), (3, 1), (1, -1)]
    assert I.improper_cells() == [(0, 0)]
    assert not I.is_proper()
    L = LatinSquare([[1, 2, 3], [2, 3, 1], [3, 1, 2]])
    assert validate_improper(ImproperSquare.from_square(L))
    assert ImproperSquare.from_square(L).to_square() == L
