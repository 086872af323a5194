import numpy as np
import pytest

from latinfill.construction import build
from latinfill.errors import NotUniform, OverlappingTriangles, TooLarge
from latinfill.exact import complete_exact, count_triangle_decompositions
from latinfill.instances import gen_instance
from latinfill.reductions import (
    TripartiteGraph,
    colbourn_reduce,
    defect,
    dense_gadget,
    gadget_density_bound,
    gadget_fillings,
    square_to_triangulation,
    triangulation_to_square,
    uniform_graphs,
)
from latinfill.squares import PartialLatinSquare, is_latin
from latinfill.triangulation import is_triangulation


def test_defect_of_small_square():
    P = PartialLatinSquare([[1, None], [None, None]])
    G = defect(P)
    assert G.edge_count() == 12 - 3
    assert not G.has_edge(("R", 0), ("C", 0))
    assert not G.has_edge(("S", 0), ("R", 0))
    assert not G.has_edge(("C", 0), ("S", 0))
    assert G.is_uniform()
    assert defect(build(4).square).edge_count() == 0


def test_graph_edges_and_equality():
    G = TripartiteGraph.from_edges(2, [(("C", 1), ("R", 0)), (("S", 0), ("C", 1))])
    assert G.edges() == [(("R", 0), ("C", 1)), (("C", 1), ("S", 0))]
    assert G.has_edge(("R", 0), ("C", 1)) and G.has_edge(("C", 1), ("R", 0))
    assert not G.is_uniform()
    assert G.complement().complement() == G
    with pytest.raises(ValueError):
        G.add_edge(("R", 0), ("R", 1))


def test_triangle_round_trip():
    P = gen_instance(12, 0.3, 0.15, 4)
    T = square_to_triangulation(P)
    assert len(T) == P.fill
    assert np.array_equal(triangulation_to_square(T, 12).cells, P.cells)
    with pytest.raises(OverlappingTriangles):
        triangulation_to_square([(0, 0, 0), (0, 1, 0)], 2)


@pytest.mark.parametrize("seed", range(4))
def test_colbourn_embedding(seed):
    n = 6
    P = gen_instance(n, 0.5, 0.2, seed)
    G = defect(P)
    Q = colbourn_reduce(G)
    N = 2 * n
    assert Q.order == N
    cells = Q.cells
    # G's RC edges are exactly the blanks; every other cell of the first n rows is set
    assert np.array_equal(cells[:n, :n] == 0, G.rc)
    assert (cells[:n, n:] > 0).all() and (cells[n:] > 0).all()
    L = complete_exact(cells)
    assert L is not None and is_latin(L)
    tris = [(int(r), int(c), int(L[r, c]) - 1) for r, c in zip(*np.nonzero(G.rc))]
    # the completion restricted to the blanks triangulates G
    assert is_triangulation(G, tris)


def test_reduce_rejects_unbalanced():
    G = TripartiteGraph.from_edges(2, [(("R", 0), ("C", 0))])
    with pytest.raises(NotUniform):
        colbourn_reduce(G)


def test_empty_graph_reduces_to_full_square():
    Q = colbourn_reduce(TripartiteGraph.empty(3))
    assert Q.fill == 36 and is_latin(Q)


def test_gadget_small():
    G = TripartiteGraph.complete(2)
    g = dense_gadget(G)
    assert g.square.order == 16
    assert len(g.kept_symbols) >= 2 * 8 - 3 * 4 - 2
    assert max(g.line_fill()) <= gadget_density_bound(2)
    assert g.row_deleted.isdisjoint(g.col_deleted)
    assert len(gadget_fillings(g)) == count_triangle_decompositions(G.edges())


def test_gadget_too_large():
    with pytest.raises(TooLarge):
        dense_gadget(TripartiteGraph.empty(7))


def test_uniform_graph_enumeration():
    graphs = list(uniform_graphs(2))
    assert all(g.is_uniform() for g in graphs)
    assert len({g.rc.tobytes() + g.rs.tobytes() + g.cs.tobytes() for g in graphs}) == len(graphs)
    assert any(g == TripartiteGraph.complete(2) for g in graphs)
    assert any(g.edge_count() == 0 for g in graphs)
