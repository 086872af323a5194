"""Tripartite graphs, their correspondence with partial squares, and hardness gadgets.

A filled cell (r, c, s) of a partial Latin square is a triangle on the
vertices r, c, s of a tripartite graph with parts R, C, S.  Completing the
square is the same as decomposing its defect (the edges not yet covered)
into triangles.  Colbourn's construction goes the other way: it embeds any
uniform tripartite graph as the defect of a partial square of twice the
order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .exact import complete_exact
from .errors import MatchingFailed, NotUniform, OverlappingTriangles, TooLarge
from .squares import SYMBOL_DTYPE, PartialLatinSquare

PARTS = ("R", "C", "S")


@dataclass
class TripartiteGraph:
    """Three parts of ``n`` vertices each; ``rc[i, j]`` is the edge r_i c_j, and so on."""

    rc: np.ndarray
    rs: np.ndarray
    cs: np.ndarray

    def __post_init__(self):
        self.rc = np.asarray(self.rc, dtype=bool)
        self.rs = np.asarray(self.rs, dtype=bool)
        self.cs = np.asarray(self.cs, dtype=bool)
        n = self.rc.shape[0]
        for m in (self.rc, self.rs, self.cs):
            if m.shape != (n, n):
                raise ValueError("all three edge matrices must be n x n")

    @property
    def n(self) -> int:
        return self.rc.shape[0]

    @classmethod
    def empty(cls, n: int) -> "TripartiteGraph":
        z = np.zeros((n, n), dtype=bool)
        return cls(z, z.copy(), z.copy())

    @classmethod
    def complete(cls, n: int) -> "TripartiteGraph":
        o = np.ones((n, n), dtype=bool)
        return cls(o, o.copy(), o.copy())

    @classmethod
    def from_edges(cls, n: int, edges) -> "TripartiteGraph":
        """Edges as pairs of tagged vertices, e.g. ``(("R", 0), ("C", 2))``."""
        g = cls.empty(n)
        for u, v in edges:
            g.add_edge(u, v)
        return g

    def _matrix(self, a: str, b: str):
        key = "".join(sorted((a, b), key=PARTS.index)).lower()
        return getattr(self, key), PARTS.index(a) > PARTS.index(b)

    def add_edge(self, u, v, present: bool = True):
        (a, i), (b, j) = u, v
        if a == b:
            raise ValueError(f"edge {u}-{v} joins vertices of one part")
        m, flip = self._matrix(a, b)
        if flip:
            i, j = j, i
        m[i, j] = present

    def has_edge(self, u, v) -> bool:
        (a, i), (b, j) = u, v
        if a == b:
            return False
        m, flip = self._matrix(a, b)
        return bool(m[j, i] if flip else m[i, j])

    def edges(self):
        """All edges as tagged vertex pairs in a fixed order: RC, then CS, then RS."""
        out = []
        for (a, b), m in ((("R", "C"), self.rc), (("C", "S"), self.cs), (("R", "S"), self.rs)):
            for i, j in np.argwhere(m):
                out.append(((a, int(i)), (b, int(j))))
        return out

    def edge_count(self) -> int:
        return int(self.rc.sum() + self.rs.sum() + self.cs.sum())

    def degrees(self):
        """Per part, the degree of each vertex into the next and previous parts.

        Returns ``{part: (deg_next, deg_prev)}`` with parts cyclically ordered R, C, S.
        """
        return {
            "R": (self.rc.sum(axis=1), self.rs.sum(axis=1)),
            "C": (self.cs.sum(axis=1), self.rc.sum(axis=0)),
            "S": (self.rs.sum(axis=0), self.cs.sum(axis=0)),
        }

    def is_uniform(self) -> bool:
        return all(np.array_equal(a, b) for a, b in self.degrees().values())

    def complement(self) -> "TripartiteGraph":
        return TripartiteGraph(~self.rc, ~self.rs, ~self.cs)

    def copy(self) -> "TripartiteGraph":
        return TripartiteGraph(self.rc.copy(), self.rs.copy(), self.cs.copy())

    def __eq__(self, other):
        if not isinstance(other, TripartiteGraph):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k)) for k in ("rc", "rs", "cs"))


def defect(P: PartialLatinSquare) -> TripartiteGraph:
    """Edges of K_{n,n,n} not covered by the triangles of P's filled cells."""
    n = P.order
    g = TripartiteGraph.complete(n)
    r, c, s = P.filled_cells()
    s = s.astype(np.intp) - 1
    g.rc[r, c] = False
    g.rs[r, s] = False
    g.cs[c, s] = False
    return g


def square_to_triangulation(P: PartialLatinSquare):
    """Filled cells as 0-based (row, column, symbol) triangles, row-major."""
    r, c, s = P.filled_cells()
    return [(int(a), int(b), int(x) - 1) for a, b, x in zip(r, c, s)]


def triangulation_to_square(T, n: int) -> PartialLatinSquare:
    """Inverse of ``square_to_triangulation``; triangles must be edge-disjoint."""
    cells = np.zeros((n, n), dtype=SYMBOL_DTYPE)
    rs = np.zeros((n, n), dtype=bool)
    cs = np.zeros((n, n), dtype=bool)
    for r, c, s in T:
        if cells[r, c] or rs[r, s] or cs[c, s]:
            raise OverlappingTriangles(f"triangle ({r}, {c}, {s}) shares an edge with an earlier one")
        cells[r, c] = s + 1
        rs[r, s] = cs[c, s] = True
    return PartialLatinSquare(cells, validate=False)


# Colbourn's embedding ------------------------------------------------------

def _matching_rounds(need: np.ndarray, rounds: int, what: str):
    """Split a bipartite multigraph into ``rounds`` matchings saturating every left vertex.

    ``need[i, k]`` is the multiplicity of edge (i, k); every left vertex has
    degree ``rounds`` and every right vertex at most ``rounds``.  Dummy left
    vertices absorb the right-side deficit so that each round is a perfect
    matching of a regular graph, which Hall's theorem guarantees.  Returns
    ``picks[t, i]`` = right vertex matched to i in round t.
    """
    need = need.astype(np.int64).copy()
    left, right = need.shape
    if (need.sum(axis=1) != rounds).any() or (need.sum(axis=0) > rounds).any():
        raise MatchingFailed(f"{what}: degrees do not allow an equitable split")
    deficit = rounds - need.sum(axis=0)
    extra = int(deficit.sum())
    ndummy = -(-extra // rounds) if extra else 0
    if ndummy * rounds != extra:
        raise MatchingFailed(f"{what}: deficit {extra} is not a multiple of {rounds}")
    dummy = np.zeros((ndummy, right), dtype=np.int64)
    t = 0
    for k in range(right):
        d = int(deficit[k])
        while d:
            take = min(d, rounds - int(dummy[t].sum()))
            dummy[t, k] += take
            d -= take
            if dummy[t].sum() == rounds:
                t += 1
    full = np.vstack([need, dummy])
    picks = np.empty((rounds, left), dtype=np.int64)
    for rnd in range(rounds):
        match = maximum_bipartite_matching(csr_matrix(full > 0), perm_type="column")
        if (match < 0).any():
            raise MatchingFailed(f"{what}: no perfect matching in round {rnd + 1}")
        full[np.arange(full.shape[0]), match] -= 1
        picks[rnd] = match[:left]
    return picks


def colbourn_reduce(G: TripartiteGraph) -> PartialLatinSquare:
    """Partial square of order 2n whose completions correspond to triangle decompositions of G."""
    if not G.is_uniform():
        raise NotUniform("every vertex needs equal degree into the other two parts")
    n = G.n
    N = 2 * n
    cells = np.zeros((N, N), dtype=SYMBOL_DTYPE)
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    cells[:n, :n] = np.where(G.rc, 0, 1 + n + (i + j) % n)

    # columns n..2n-1: row i still needs every symbol it may hold and lacks
    have = np.zeros((n, N), dtype=bool)
    for r in range(n):
        vals = cells[r, :n]
        have[r, vals[vals > 0].astype(np.intp) - 1] = True
    allowed = np.ones((n, N), dtype=bool)
    allowed[:, :n] = ~G.rs
    need = (allowed & ~have).astype(np.int64)
    picks = _matching_rounds(need, n, "column extension")
    for t in range(n):
        cells[:n, n + t] = picks[t] + 1

    # rows n..2n-1: column j still needs its missing symbols, minus those G reserves
    have = np.zeros((N, N), dtype=bool)
    for c in range(N):
        vals = cells[:n, c]
        have[c, vals[vals > 0].astype(np.intp) - 1] = True
    allowed = np.ones((N, N), dtype=bool)
    allowed[:n, :n] = ~G.cs
    need = (allowed & ~have).astype(np.int64)
    picks = _matching_rounds(need, n, "row extension")
    for t in range(n):
        cells[n + t, :] = picks[t] + 1
    return PartialLatinSquare(cells)


def pad_graph(G: TripartiteGraph, size: int) -> TripartiteGraph:
    """G with isolated vertices added so each part has ``size`` vertices."""
    out = TripartiteGraph.empty(size)
    n = G.n
    out.rc[:n, :n] = G.rc
    out.rs[:n, :n] = G.rs
    out.cs[:n, :n] = G.cs
    return out


@dataclass
class Gadget:
    square: PartialLatinSquare
    n: int
    kept_symbols: frozenset    # A: symbols outside every X_i, Y_j, Z and 1..n
    row_deleted: frozenset     # A1, removed from rows 1..n
    col_deleted: frozenset     # A2, removed from columns 1..n

    def line_fill(self):
        """Filled cells in each of the first n rows, then each of the first n columns."""
        cells = self.square.cells
        n = self.n
        return [int(np.count_nonzero(cells[i])) for i in range(n)] + [
            int(np.count_nonzero(cells[:, j])) for j in range(n)
        ]


MAX_GADGET_N = 6


def dense_gadget(G: TripartiteGraph) -> Gadget:
    """Sparser square of order 2n^3 whose completions still triangulate G.

    G is padded to n^3 vertices per part and embedded; then the symbols of A
    (those every one of the first n rows and columns already uses, outside
    the region Q that encodes G) are split by alternating rank into A1 and
    A2, A1 is deleted from rows 1..n, A2 from columns 1..n, and every cell
    outside the first n rows and columns is blanked.
    """
    if not G.is_uniform():
        raise NotUniform("every vertex needs equal degree into the other two parts")
    n = G.n
    if n > MAX_GADGET_N:
        raise TooLarge(f"gadget for n={n} would have {(2 * n ** 3) ** 2} cells")
    N = n ** 3
    P = colbourn_reduce(pad_graph(G, N)).cells.copy()
    M = 2 * N
    syms = set(range(1, M + 1))
    excluded = set(range(1, n + 1))
    for i in range(M):
        excluded |= syms - set(P[i][P[i] > 0].tolist())
        col = P[:, i]
        excluded |= syms - set(col[col > 0].tolist())
    q = P[:n, :n]
    excluded |= set(q[q > 0].tolist())
    A = sorted(syms - excluded)
    if len(A) < 2 * n ** 3 - 3 * n ** 2 - n:
        raise AssertionError(f"|A| = {len(A)} below 2n^3 - 3n^2 - n")
    A1, A2 = A[0::2], A[1::2]
    top = P[:n]
    top[np.isin(top, A1)] = 0
    left = P[:, :n]
    left[np.isin(left, A2)] = 0
    P[n:, n:] = 0
    return Gadget(PartialLatinSquare(P), n, frozenset(A), frozenset(A1), frozenset(A2))


def gadget_density_bound(n: int) -> float:
    """Most filled cells any of the gadget's first n rows or columns may hold."""
    return (2 * n ** 3 + 3 * n ** 2 + n) / 2


def gadget_fillings(g: Gadget):
    """Fillings of the blank cells of the top-left n x n block that extend to a full completion.

    Everything outside that block is left free, so this counts completions up
    to the choice of the free region; it equals the number of triangle
    decompositions of the encoded graph.
    """
    P = g.square.cells
    n, M = g.n, P.shape[0]
    blanks = [(i, j) for i in range(n) for j in range(n) if P[i, j] == 0]
    opts = []
    for i, j in blanks:
        used = set(P[i].tolist()) | set(P[:, j].tolist())
        opts.append([s for s in range(1, M + 1) if s not in used])
    found = []

    def rec(k, Q):
        if k == len(blanks):
            if complete_exact(Q) is not None:
                found.append({cell: int(Q[cell]) for cell in blanks})
            return
        i, j = blanks[k]
        for s in opts[k]:
            if s in Q[i, :n] or s in Q[:n, j]:
                continue
            Q[i, j] = s
            rec(k + 1, Q)
            Q[i, j] = 0

    rec(0, P.copy())
    return found


# small uniform graphs --------------------------------------------------------

def _bipartite_with_degrees(rows_deg, cols_deg):
    """All 0/1 matrices with the given row sums and (if not None) column sums."""
    nr = len(rows_deg)
    nc = len(rows_deg) if cols_deg is None else len(cols_deg)
    from itertools import combinations

    choices = [list(combinations(range(nc), d)) for d in rows_deg]
    out = []

    def rec(i, m, colsum):
        if i == nr:
            if cols_deg is None or list(colsum) == list(cols_deg):
                out.append(m.copy())
            return
        for ch in choices[i]:
            m[i, list(ch)] = True
            for j in ch:
                colsum[j] += 1
            if cols_deg is None or all(colsum[j] <= cols_deg[j] for j in range(nc)):
                rec(i + 1, m, colsum)
            for j in ch:
                colsum[j] -= 1
            m[i, list(ch)] = False

    rec(0, np.zeros((nr, nc), dtype=bool), [0] * nc)
    return out


def uniform_graphs(n: int):
    """Yield every uniform tripartite graph with parts of size n (labelled)."""
    from itertools import product

    for bits in product((False, True), repeat=n * n):
        rc = np.array(bits, dtype=bool).reshape(n, n)
        deg_r = rc.sum(axis=1).tolist()   # r's degree into S must match
        deg_c = rc.sum(axis=0).tolist()   # c's degree into S must match
        for rs in _bipartite_with_degrees(deg_r, None):
            deg_s_from_r = rs.sum(axis=0).tolist()  # s's degree into C must match
            for cs in _bipartite_with_degrees(deg_c, deg_s_from_r):
                yield TripartiteGraph(rc, rs, cs)
