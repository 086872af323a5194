from fractions import Fraction

import numpy as np
import pytest

from latinfill.completion import CompletionStats
from latinfill.construction import build
from latinfill.errors import NotABijection, OrderMismatch
from latinfill.instances import gen_instance
from latinfill.probabilistic import (
    PermutationTriple,
    apply_permutations,
    complete_probabilistic,
    harvest,
    harvest_conflict_bound,
    randomized_feasible,
    trade_cells,
)
from latinfill.squares import PartialLatinSquare, is_latin


def test_permutation_triple():
    rng = np.random.default_rng(1)
    t = PermutationTriple.random(9, rng)
    P = gen_instance(9, 0.4, 0.2, 2)
    Q = apply_permutations(P, t)
    r, c, s = P.filled_cells()
    assert (Q.cells[t.rows[r], t.cols[c]] == t.syms[s - 1] + 1).all()
    assert np.array_equal(apply_permutations(Q, t.inverse()).cells, P.cells)
    u = PermutationTriple.random(9, rng)
    assert np.array_equal(apply_permutations(Q, u).cells, apply_permutations(P, t.then(u)).cells)
    with pytest.raises(NotABijection):
        PermutationTriple(np.array([0, 0]), np.arange(2), np.arange(2))
    with pytest.raises(OrderMismatch):
        apply_permutations(P, PermutationTriple.identity(4))


def test_harvest_trades_are_intercalates_and_disjoint():
    n = 128
    P = gen_instance(n, 4 / n, 200 / n ** 2, 7)
    L = build(n).cells
    rep = harvest(P, L)
    assert rep.disagreeing == int(((P.cells > 0) & (P.cells != L)).sum())
    used = set()
    for t in rep.selected:
        r1, c1, r2, c2, s_old, s_new = t
        assert L[r1, c1] == s_old and P.cells[r1, c1] == s_new
        assert L[r1, c2] == s_new and L[r2, c1] == s_new and L[r2, c2] == s_old
        cells = set(trade_cells(t))
        assert not cells & used
        used |= cells
    assert len(rep.selected) <= rep.eligible


def test_bounds():
    assert harvest_conflict_bound(1000, 0) == pytest.approx(390)
    assert randomized_feasible(8192, Fraction(1, 8192), Fraction(0))
    assert not randomized_feasible(8192, Fraction(1, 100), Fraction(0))


@pytest.mark.parametrize("n, seed", [(64, 0), (200, 1)])
def test_randomized_completion(n, seed):
    P = gen_instance(n, 3 / n, 40 / n ** 2, seed)
    st = CompletionStats()
    L = complete_probabilistic(P, np.random.default_rng(seed), "practical", stats=st)
    r, c, s = P.filled_cells()
    assert is_latin(L) and (L.cells[r, c] == s).all()
    assert st.relabel is not None


def test_randomized_empty():
    L = complete_probabilistic(PartialLatinSquare.empty(32), np.random.default_rng(0), "practical")
    assert is_latin(L)
