"""Triangle decompositions of dense balanced tripartite graphs.

The complement of G inside K_{n,n,n} splits into cycles whose lengths are
multiples of 3.  Each cycle is shortened by a seven-triangle trade: seven
edge-disjoint triangles are borrowed from G and their 21 edges, together
with five consecutive cycle edges, are re-cut into eight triangles plus a
path of two edges (nine triangles when the cycle is a hexagon).  Once the
complement plus the borrowed edges is fully triangulated it is a partial
Latin square; any completion triangulates what is left of G, and the
borrowed triangles are added back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .completion import TINY_ORDER, CompletionStats, Mode, complete, completion_feasible
from .errors import BalanceViolated, ChoicesExhausted, Infeasible, OverloadedSegment, TinyOrderFallbackFailed
from .exact import triangle_decompositions
from .reductions import PARTS, TripartiteGraph, triangulation_to_square

GAMMA_PER_EPS = Fraction(33, 10)


def _next(part: str) -> str:
    return PARTS[(PARTS.index(part) + 1) % 3]


@dataclass(frozen=True)
class TriParams:
    n: int
    eps: Fraction
    delta: Fraction
    gamma: Fraction

    @classmethod
    def make(cls, n: int, eps, delta, gamma=None) -> "TriParams":
        eps, delta = Fraction(eps), Fraction(delta)
        g = GAMMA_PER_EPS * eps if gamma is None else Fraction(gamma)
        return cls(n, eps, delta, g)

    @classmethod
    def measure(cls, G: TripartiteGraph, gamma=None) -> "TriParams":
        """Smallest eps and delta the graph satisfies."""
        n = G.n
        missing = max(int((n - d).max()) for pair in G.degrees().values() for d in pair)
        eps = Fraction(missing, n)
        delta = Fraction(3 * n * n - G.edge_count(), 3 * n * n)
        return cls.make(n, eps, delta, gamma)

    @property
    def cap(self) -> int:
        """Most trades a vertex may take part in."""
        return math.floor(self.gamma * self.n)


def params_feasible(p: TriParams) -> bool:
    """eps < 1/132 and delta < (1 - 132 eps)^2 / 83272."""
    return p.eps < Fraction(1, 132) and p.delta < (1 - 132 * p.eps) ** 2 / 83272


def choice_margin(p: TriParams) -> Fraction:
    """n - 2 delta n / gamma - 12 eps n - 12 gamma n; trades always exist when this is at least 5."""
    n = p.n
    if p.gamma == 0:
        return Fraction(n) if p.delta == 0 else Fraction(-1)
    return n - 2 * p.delta * n / p.gamma - 12 * p.eps * n - 12 * p.gamma * n


def check_input(G: TripartiteGraph, p: TriParams) -> bool:
    """Balance, minimum degree, edge count, and the parameter bounds."""
    n = G.n
    if p.n != n or not G.is_uniform():
        return False
    min_deg = min(int(d.min()) for pair in G.degrees().values() for d in pair)
    if min_deg < (1 - p.eps) * n:
        return False
    # missing edges at most 3 delta n^2; equality allowed, since measure() gives exactly that
    if 3 * n * n - G.edge_count() > p.delta * 3 * n * n:
        return False
    return params_feasible(p)


class VertexLedger:
    """How many trades each vertex has been borrowed for."""

    def __init__(self, n: int, cap: int):
        self.cap = cap
        self.uses = {part: np.zeros(n, dtype=np.int64) for part in PARTS}

    def usable(self, part: str) -> np.ndarray:
        return self.uses[part] + 1 <= self.cap

    def is_overloaded(self, v) -> bool:
        part, i = v
        return bool(self.uses[part][i] >= self.cap)

    def use(self, v):
        part, i = v
        self.uses[part][i] += 1

    def max_use(self) -> int:
        return max(int(u.max()) for u in self.uses.values())

    def overloaded_per_part(self):
        return {part: int((u >= self.cap).sum()) for part, u in self.uses.items()}


def _adjacent(g: TripartiteGraph, part: str, v) -> np.ndarray:
    """Boolean mask over ``part`` of the vertices joined to v in g."""
    vpart, i = v
    m, flip = g._matrix(part, vpart)
    return m[:, i] if not flip else m[i, :]


def _remove(g: TripartiteGraph, u, v):
    if not g.has_edge(u, v):
        raise AssertionError(f"edge {u}-{v} is not available")
    g.add_edge(u, v, False)


def triangle(*verts):
    """Tagged vertices in any order to an (r, c, s) index triple."""
    d = dict(verts)
    return d["R"], d["C"], d["S"]


def triangle_edges(t):
    r, c, s = t
    return ((("R", r), ("C", c)), (("C", c), ("S", s)), (("R", r), ("S", s)))


def cycle_decompose_complement(G: TripartiteGraph):
    """Cycles partitioning the complement of G, each walked R -> C -> S -> R.

    Each cycle is a list of tagged vertices; consecutive entries (and last to
    first) are edges of the complement.
    """
    H = G.complement()
    if not H.is_uniform():
        raise BalanceViolated("some vertex has unequal degree into the other two parts")
    cycles = []
    while True:
        starts = np.flatnonzero(H.rc.any(axis=1))
        if starts.size == 0:
            break
        path = [("R", int(starts[0]))]
        seen = {path[0]: 0}
        while True:
            v = path[-1]
            nxt = _next(v[0])
            cand = np.flatnonzero(_adjacent(H, nxt, v))
            if cand.size == 0:
                raise BalanceViolated(f"walk stuck at {v[0]}{v[1] + 1}")
            w = (nxt, int(cand[0]))
            if w in seen:
                cyc = path[seen[w]:]
                for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                    _remove(H, a, b)
                cycles.append(cyc)
                break
            seen[w] = len(path)
            path.append(w)
    if H.edge_count():
        raise BalanceViolated("edges left after removing all cycles")
    return cycles


@dataclass
class TradeResult:
    xs: tuple
    removed: list      # seven triangles taken out of G
    formed: list       # triangles of the complement after the trade
    cycle: list | None  # the shortened cycle, or None when it closed up


# which earlier vertices each x must be adjacent to, in choice order; w indices are 0-based
_X_RULES = (
    ("x1", 2, ("w0", "w1")),
    ("x3", 1, ("w2", "w3", "x1")),
    ("x5", 0, ("w4", "w5", "x1", "x3")),
    ("x2", 0, ("w1", "w2", "x1", "x3")),
    ("x4", 2, ("w3", "w4", "x3", "x5")),
    ("x6", 1, ("w5", "w0", "x5", "x1")),
)


def seven_triangle_trade(G: TripartiteGraph, cycle, start: int, ledger: VertexLedger, *,
                         backtrack: bool = False) -> TradeResult:
    """Shorten ``cycle`` at the six vertices beginning at ``start``, borrowing from ``G``.

    ``G`` is the pool of edges still available and is updated in place.
    Candidates are taken least used first, then lowest index; with
    ``backtrack`` a dead end revisits earlier choices instead of failing.
    """
    L = len(cycle)
    if L < 6 or L % 3:
        raise ValueError(f"cycle of length {L} cannot be traded")
    w = [cycle[(start + i) % L] for i in range(6)]
    for v in w:
        if ledger.is_overloaded(v):
            raise OverloadedSegment(f"{v[0]}{v[1] + 1} is overloaded")
    on_cycle = set(cycle)
    seg = set(w)
    named = {f"w{i}": v for i, v in enumerate(w)}

    def candidates(k):
        name, wi, needs = _X_RULES[k]
        part = w[wi][0]
        ok = ledger.usable(part).copy()
        for nd in needs:
            ok &= _adjacent(G, part, named[nd])
        for v in (on_cycle if name == "x6" else seg):
            if v[0] == part:
                ok[v[1]] = False
        for key, v in named.items():
            if key.startswith("x") and v[0] == part:
                ok[v[1]] = False
        idx = np.flatnonzero(ok)
        idx = idx[np.argsort(ledger.uses[part][idx], kind="stable")]
        return [(part, int(i)) for i in idx]

    def choose(k):
        if k == len(_X_RULES):
            return True
        opts = candidates(k)
        for v in opts if backtrack else opts[:1]:
            named[_X_RULES[k][0]] = v
            if choose(k + 1):
                return True
            del named[_X_RULES[k][0]]
        return False

    if not choose(0):
        raise ChoicesExhausted(f"no seven-triangle trade on segment starting at {w[0][0]}{w[0][1] + 1}")

    x = {i: named[f"x{i}"] for i in range(1, 7)}
    w1, w2, w3, w4, w5, w6 = w
    removed = [
        (x[1], x[3], x[5]),
        (x[2], w2, x[1]), (x[2], x[3], w3),
        (x[4], w4, x[3]), (x[4], w5, x[5]),
        (x[6], w1, x[1]), (x[6], x[5], w6),
    ]
    formed = [
        (w1, w2, x[1]), (x[2], w2, w3), (w3, w4, x[3]), (w4, w5, x[4]), (w5, w6, x[5]),
        (x[2], x[3], x[1]), (x[5], x[3], x[4]), (x[5], x[6], x[1]),
    ]
    used = set()
    for t in removed:
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[0], t[2])):
            _remove(G, a, b)
            used.add(frozenset((a, b)))
    assert len(used) == 21
    for v in x.values():
        ledger.use(v)
    if L == 6:
        formed.append((w1, x[6], w6))
        new_cycle = None
    else:
        rot = [cycle[(start + i) % L] for i in range(L)]
        new_cycle = [rot[0], x[6]] + rot[5:]
    return TradeResult(
        tuple(x[i] for i in range(1, 7)),
        [triangle(*t) for t in removed],
        [triangle(*t) for t in formed],
        new_cycle,
    )


@dataclass
class TriangulationStats:
    cycles: int = 0
    cycle_edges: int = 0
    trades: int = 0
    edges_per_trade: list = field(default_factory=list)
    max_vertex_use: int = 0
    vertex_cap: int = 0
    overloaded: dict = field(default_factory=dict)
    completion: CompletionStats | None = None

    def as_lines(self):
        out = [
            f"cycles={self.cycles}",
            f"cycle_edges={self.cycle_edges}",
            f"trades={self.trades}",
            f"max_vertex_use={self.max_vertex_use}",
            f"vertex_cap={self.vertex_cap}",
        ]
        out += [f"overloaded_{k}={v}" for k, v in sorted(self.overloaded.items())]
        return out


def _eliminate(cycle, pool, ledger, strict, st):
    """Trade ``cycle`` down to nothing; returns the triangles formed and borrowed."""
    formed, removed = [], []
    start = 0
    while cycle is not None:
        if len(cycle) == 3:
            formed.append(triangle(*cycle))
            break
        order = [start % len(cycle)] if strict else [(start + k) % len(cycle) for k in range(len(cycle))]
        res = None
        for s in order:
            try:
                res = seven_triangle_trade(pool, cycle, s, ledger, backtrack=not strict)
                break
            except (ChoicesExhausted, OverloadedSegment):
                if strict:
                    raise
        if res is None:
            raise ChoicesExhausted(f"no trade anywhere on a cycle of length {len(cycle)}")
        st.trades += 1
        st.edges_per_trade.append(3 * len(res.removed))
        formed += res.formed
        removed += res.removed
        cycle = res.cycle
        # the three vertices just joined sit in the middle of the next segment
        start = -1
    return formed, removed


def is_triangulation(G: TripartiteGraph, tris) -> bool:
    """Whether the triangles are edge-disjoint and cover exactly the edges of G."""
    seen = TripartiteGraph.empty(G.n)
    for t in tris:
        for a, b in triangle_edges(t):
            if seen.has_edge(a, b):
                return False
            seen.add_edge(a, b)
    return seen == G


def triangulate(G: TripartiteGraph, p: TriParams | None = None, mode: Mode | str = Mode.PRACTICAL, *,
                stats: TriangulationStats | None = None):
    """Triangles partitioning the edges of a balanced tripartite graph G.

    Strict mode first checks the input conditions and the trade and completion
    bounds, raising Infeasible when they fail; Practical mode runs the same
    steps and relaxes the searches when a bounded choice runs dry.
    """
    mode = Mode(mode)
    strict = mode is Mode.STRICT
    n = G.n
    p = p if p is not None else TriParams.measure(G)
    st = stats if stats is not None else TriangulationStats()
    if not G.is_uniform():
        raise BalanceViolated("some vertex has unequal degree into the other two parts")
    if strict:
        if not check_input(G, p):
            raise Infeasible("graph or parameters outside the guaranteed range")
        if choice_margin(p) < 5:
            raise Infeasible("too few vertex choices are guaranteed for the trades")
        if not (p.eps + 3 * p.gamma < Fraction(1, 12) and completion_feasible(n, p.eps + 3 * p.gamma, 8 * p.delta)):
            raise Infeasible("completion bound fails for the traded graph")

    cycles = cycle_decompose_complement(G)
    if n < TINY_ORDER:
        st.cycles = len(cycles)
        st.cycle_edges = sum(len(c) for c in cycles)
        for tris in triangle_decompositions(G.edges()):
            return tris
        raise TinyOrderFallbackFailed(f"order {n} graph has no triangle decomposition")
    st.cycles = len(cycles)
    st.cycle_edges = sum(len(c) for c in cycles)
    ledger = VertexLedger(n, p.cap if strict else max(p.cap, 1))
    st.vertex_cap = ledger.cap
    pool = G.copy()
    comp_tris, borrowed = [], []
    for cyc in cycles:
        f, r = _eliminate(cyc, pool, ledger, strict, st)
        comp_tris += f
        borrowed += r
    st.max_vertex_use = ledger.max_use()
    st.overloaded = ledger.overloaded_per_part()

    # the complement of the pool is now triangulated: complete it as a square
    P = triangulation_to_square(comp_tris, n)
    st.completion = CompletionStats()
    L = complete(P, mode, stats=st.completion)
    filled = P.cells > 0
    r, c = np.nonzero(~filled)
    tris = [(int(a), int(b), int(L.cells[a, b]) - 1) for a, b in zip(r, c)] + borrowed
    if not is_triangulation(G, tris):
        raise AssertionError("assembled triangles do not partition the graph")
    return tris
