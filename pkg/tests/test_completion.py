from fractions import Fraction

import numpy as np
import pytest

from latinfill.completion import (
    FIX_BUDGET,
    CompletionStats,
    DisturbanceLedger,
    complete,
    fix_feasible,
    completion_feasible,
)
from latinfill.construction import build
from latinfill.errors import Infeasible, TinyOrderFallbackFailed
from latinfill.instances import gen_instance
from latinfill.squares import PartialLatinSquare, density, is_latin


def _extends(P, L):
    r, c, s = P.filled_cells()
    return bool((L.cells[r, c] == s).all())


def test_completion_bound_by_hand():
    # n=8192, one symbol per line: (8192 - 12 - 20)/12 = 680, and
    # 69 f + 3n + 7 <= 680^2 holds up to f = 6345
    n = 8192
    eps = Fraction(1, n)
    assert completion_feasible(n, eps, Fraction(6345, n * n))
    assert not completion_feasible(n, eps, Fraction(6346, n * n))
    assert not completion_feasible(100, 0, 0)


def test_single_repair_bound():
    assert fix_feasible(4096, Fraction(1, 4096), Fraction(1, 1000))
    assert not fix_feasible(4096, Fraction(1, 4096), Fraction(1, 100))


def test_empty_input_gives_structured_square():
    L = complete(PartialLatinSquare.empty(32), "practical")
    assert np.array_equal(L.cells, build(32).cells)


def test_strict_rejects_dense_input():
    P = gen_instance(64, 0.1, 0.01, 1)
    with pytest.raises(Infeasible):
        complete(P, "strict")


def test_strict_sparse_instance():
    n = 1024
    P = gen_instance(n, 1 / n, 50 / n ** 2, 3)
    assert density(P).max_line == 1
    st = CompletionStats()
    L = complete(P, "strict", stats=st)
    assert is_latin(L) and _extends(P, L)
    assert st.max_fix_cells <= FIX_BUDGET
    assert st.ledger_total <= 3 * n + 7 + 69 * P.fill
    assert st.fixes <= P.fill


@pytest.mark.parametrize("n, seed", [(40, 0), (64, 1), (101, 2), (256, 3)])
def test_practical_instances(n, seed):
    P = gen_instance(n, 0.05, 0.01, seed)
    L = complete(P, "practical")
    assert is_latin(L) and _extends(P, L)


def test_tiny_orders_use_search():
    P = PartialLatinSquare([[1, 2, None], [None, 3, None], [None, None, 2]])
    st = CompletionStats()
    L = complete(P, stats=st)
    assert is_latin(L) and _extends(P, L) and st.fallback == "exhaustive"
    with pytest.raises(TinyOrderFallbackFailed):
        complete(PartialLatinSquare([[1, None], [None, 2]]))


def test_ledger_counts_each_cell_once():
    led = DisturbanceLedger(8)
    led.mark(2, 3, 5)
    led.mark(2, 3, 5)
    led.mark(2, 3, 6)
    assert led.total == 1 and led.rows[2] == 1 and led.cols[3] == 1
    # the symbol counters see each (cell, symbol) pair once
    assert led.syms[5] == 1 and led.syms[6] == 1
    assert led.overloaded_count("row", 0.1) == 1


def test_ledger_starts_with_flagged_cells():
    S = build(13)
    assert DisturbanceLedger.for_square(S).total == len(S.flagged)
