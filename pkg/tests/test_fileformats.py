import io

import pytest

from latinfill.errors import ParseError
from latinfill.fileformats import emit_graph, emit_square, emit_trade_log, parse_graph, parse_square, write_square
from latinfill.reductions import TripartiteGraph
from latinfill.squares import ImproperSquare, PartialLatinSquare
from latinfill.trades import swap_trade

SMALL = "pls 3\n1 2 .\n. 3 .\n. . 2\n"


def test_small_square_round_trip():
    P = parse_square(SMALL)
    assert P.to_lists() == [[1, 2, None], [None, 3, None], [None, None, 2]]
    assert emit_square(P) == SMALL
    buf = io.StringIO()
    write_square(P, buf)
    assert buf.getvalue() == SMALL


def test_comments_and_blank_lines():
    P = parse_square("# a comment\n\npls 2\n1 .\n\n. 1\n")
    assert P.fill == 2


def test_improper_cells():
    text = "pls 3\n3+2-1 1 2\n1 2 3\n2 3 1\n"
    I = parse_square(text)
    assert isinstance(I, ImproperSquare)
    assert I.terms(0, 0) == [(2, 1), (3, 1), (1, -1)]
    again = parse_square(emit_square(I))
    assert again == I
    with pytest.raises(ParseError):
        parse_square(text, allow_improper=False)


@pytest.mark.parametrize(
    "text, line, col",
    [
        ("", 1, 1),
        ("square 3\n", 1, 1),
        ("pls 2\n1 x\n. .\n", 2, 3),
        ("pls 2\n1 3\n. .\n", 2, 3),
        ("pls 2\n1 . .\n. .\n", 2, 5),
        ("pls 2\n1 .\n", 3, 1),
        ("pls 2\n1 .\n. 1\n1 .\n", 4, 1),
    ],
)
def test_parse_errors_have_positions(text, line, col):
    with pytest.raises(ParseError) as e:
        parse_square(text)
    assert (e.value.line, e.value.column) == (line, col)


def test_graph_round_trip():
    text = "tri 2\nR1 C1\nC1 S2\nR2 S1\n"
    G = parse_graph(text)
    assert G.edge_count() == 3 and G.has_edge(("S", 1), ("C", 0))
    assert emit_graph(G) == text
    assert parse_graph(emit_graph(TripartiteGraph.complete(3))) == TripartiteGraph.complete(3)


@pytest.mark.parametrize(
    "text, reason",
    [
        ("tri 2\nR1 R2\n", "same part"),
        ("tri 2\nR1 C1\nC1 R1\n", "duplicate"),
        ("tri 2\nR3 C1\n", "outside"),
        ("tri 2\nR1 X1\n", "bad vertex"),
        ("tri 2\nR1\n", "two vertices"),
    ],
)
def test_graph_errors(text, reason):
    with pytest.raises(ParseError, match=reason):
        parse_graph(text)


def test_trade_log_lines():
    t = swap_trade(((0, 0), (0, 1), (1, 0), (1, 1)), (1, 2))
    assert emit_trade_log([t]) == "1 1 -1 +2\n1 2 -2 +1\n2 1 -2 +1\n2 2 -1 +2\n"
