"""Plain-text formats for squares, graphs and trade logs.

Square file::

    pls 3
    1 2 .
    . 3 .
    . . 2

Tokens are symbols 1..n, ``.`` for a blank, or a signed list such as
``3+2-1`` for a cell of an improper square.  Graph file::

    tri 2
    R1 C1
    C1 S2

Indices in both formats are 1-based.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import ParseError
from .reductions import TripartiteGraph
from .squares import SYMBOL_DTYPE, ImproperSquare, PartialLatinSquare

_SIGNED = re.compile(r"[+-]?\d+(?:[+-]\d+)*\Z")
_TERM = re.compile(r"([+-]?)(\d+)")
_VERTEX = re.compile(r"([RCS])(\d+)\Z")


def _tokens(line: str):
    """(column, token) pairs, columns 1-based."""
    return [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", line)]


def _header(lines, kind: str):
    for lineno, raw in enumerate(lines, 1):
        toks = _tokens(raw)
        if not toks or toks[0][1].startswith("#"):
            continue
        if toks[0][1] != kind:
            raise ParseError(lineno, toks[0][0], f"expected header '{kind} <n>'")
        if len(toks) != 2 or not toks[1][1].isdigit():
            col = toks[1][0] if len(toks) > 1 else len(raw) + 1
            raise ParseError(lineno, col, "header needs exactly one non-negative integer")
        return lineno, int(toks[1][1])
    raise ParseError(1, 1, "empty input")


def parse_square(text: str, allow_improper: bool = True):
    """A PartialLatinSquare, or an ImproperSquare if any cell holds a signed list."""
    lines = text.splitlines()
    start, n = _header(lines, "pls")
    rows = []
    improper = False
    for lineno in range(start + 1, len(lines) + 1):
        raw = lines[lineno - 1]
        toks = _tokens(raw)
        if not toks:
            continue
        if len(rows) == n:
            raise ParseError(lineno, toks[0][0], f"more than {n} rows")
        if len(toks) != n:
            col = toks[n][0] if len(toks) > n else len(raw) + 1
            raise ParseError(lineno, col, f"expected {n} tokens, found {len(toks)}")
        row = []
        for col, tok in toks:
            if tok == ".":
                row.append(None)
                continue
            if not _SIGNED.match(tok):
                raise ParseError(lineno, col, f"bad token {tok!r}")
            terms = []
            for sign, num in _TERM.findall(tok):
                s = int(num)
                if not 1 <= s <= n:
                    raise ParseError(lineno, col, f"symbol {s} outside 1..{n}")
                terms.append((s, -1 if sign == "-" else 1))
            if len(terms) == 1 and terms[0][1] == 1 and not tok.startswith("+"):
                row.append(terms[0][0])
            else:
                if not allow_improper:
                    raise ParseError(lineno, col, f"improper token {tok!r} not allowed here")
                improper = True
                row.append(terms)
        rows.append(row)
    if len(rows) != n:
        raise ParseError(len(lines) + 1, 1, f"expected {n} rows, found {len(rows)}")
    if improper:
        return ImproperSquare.from_terms(rows)
    cells = np.array([[0 if v is None else v for v in row] for row in rows], dtype=SYMBOL_DTYPE).reshape(n, n)
    return PartialLatinSquare(cells)


def _improper_token(terms) -> str:
    parts = []
    for s, k in terms:
        sign = "+" if k > 0 else "-"
        parts += [f"{sign}{s}"] * abs(k)
    tok = "".join(parts)
    return tok[1:] if tok.startswith("+") else tok


def emit_square(P) -> str:
    if isinstance(P, ImproperSquare):
        n = P.order
        lines = [f"pls {n}"]
        for r in range(n):
            toks = []
            for c in range(n):
                terms = P.terms(r, c)
                toks.append(_improper_token(terms) if terms else ".")
            lines.append(" ".join(toks))
        return "\n".join(lines) + "\n"
    cells = P.cells if hasattr(P, "cells") else np.asarray(P)
    n = cells.shape[0]
    out = [f"pls {n}\n"]
    for row in cells:
        out.append(" ".join("." if v == 0 else str(int(v)) for v in row) + "\n")
    return "".join(out)


def write_square(P, fh):
    """Stream a square row by row; large orders never build the whole text."""
    if isinstance(P, ImproperSquare):
        fh.write(emit_square(P))
        return
    cells = P.cells if hasattr(P, "cells") else np.asarray(P)
    fh.write(f"pls {cells.shape[0]}\n")
    for row in cells:
        fh.write(" ".join("." if v == 0 else str(int(v)) for v in row) + "\n")


def parse_graph(text: str) -> TripartiteGraph:
    lines = text.splitlines()
    start, n = _header(lines, "tri")
    g = TripartiteGraph.empty(n)
    for lineno in range(start + 1, len(lines) + 1):
        toks = _tokens(lines[lineno - 1])
        if not toks or toks[0][1].startswith("#"):
            continue
        if len(toks) != 2:
            raise ParseError(lineno, toks[0][0], "an edge line has exactly two vertices")
        ends = []
        for col, tok in toks:
            m = _VERTEX.match(tok)
            if not m:
                raise ParseError(lineno, col, f"bad vertex {tok!r}")
            i = int(m.group(2))
            if not 1 <= i <= n:
                raise ParseError(lineno, col, f"index {i} outside 1..{n}")
            ends.append((m.group(1), i - 1))
        if ends[0][0] == ends[1][0]:
            raise ParseError(lineno, toks[1][0], "both ends in the same part")
        if g.has_edge(*ends):
            raise ParseError(lineno, toks[0][0], "duplicate edge")
        g.add_edge(*ends)
    return g


def emit_graph(G: TripartiteGraph) -> str:
    lines = [f"tri {G.n}"]
    for (a, i), (b, j) in G.edges():
        lines.append(f"{a}{i + 1} {b}{j + 1}")
    return "\n".join(lines) + "\n"


def emit_trade_log(trades) -> str:
    """One line per cell change: ``r c -OLD +NEW`` (1-based, 0 meaning blank)."""
    out = []
    for t in trades:
        for st in t.steps:
            old = st.removed[0] if st.removed else 0
            new = st.added[0] if st.added else 0
            out.append(f"{st.row + 1} {st.col + 1} -{old} +{new}\n")
    return "".join(out)
