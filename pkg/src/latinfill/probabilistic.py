"""Randomised preprocessing: permute P, then settle many cells with single 2x2 trades.

After a uniform relabelling of P's rows, columns and symbols, roughly half
of its filled cells can be made to agree with the structured square by one
intercalate swap each.  Those swaps that claim pairwise disjoint cells are
applied up front; the remaining cells go through the general repair.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .completion import (
    CompletionEngine,
    CompletionStats,
    Mode,
    _at_least_sqrt,
    _q,
    run_repairs,
    tiny_complete,
)
from .construction import build
from .errors import Infeasible, NotABijection, OrderMismatch, TinyOrderFallbackFailed, TriesExhausted
from .squares import SYMBOL_DTYPE, LatinSquare, PartialLatinSquare, density
from .trades import TradeKind

OVERLAP, ROW_DEP, COL_DEP, SYM_DEP = "overlap", "row", "col", "sym"

# unordered role pairs a cell can hold across two trades
CONFLICT_CLASSES = (
    (ROW_DEP, OVERLAP),
    (COL_DEP, OVERLAP),
    (ROW_DEP, COL_DEP),
    (SYM_DEP, OVERLAP),
    (SYM_DEP, SYM_DEP),
    (ROW_DEP, SYM_DEP),
    (COL_DEP, SYM_DEP),
)
IMPOSSIBLE_CLASSES = ((ROW_DEP, ROW_DEP), (COL_DEP, COL_DEP), (OVERLAP, OVERLAP))
_ROLES = (OVERLAP, ROW_DEP, COL_DEP, SYM_DEP)


def _class_key(a: str, b: str):
    for key in CONFLICT_CLASSES + IMPOSSIBLE_CLASSES:
        if {a, b} == set(key) and (a == b) == (key[0] == key[1]):
            return key
    raise AssertionError((a, b))


@dataclass(frozen=True)
class PermutationTriple:
    """Relabellings of rows, columns and symbols; entry i is the new 0-based index of i."""

    rows: np.ndarray
    cols: np.ndarray
    syms: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        n = len(self.rows)
        for name in ("rows", "cols", "syms"):
            p = np.asarray(getattr(self, name))
            if p.shape != (n,) or not np.array_equal(np.sort(p), np.arange(n)):
                raise NotABijection(f"{name} is not a permutation of 0..{n - 1}")

    @property
    def order(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, n: int) -> "PermutationTriple":
        idx = np.arange(n)
        return cls(idx, idx.copy(), idx.copy())

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, seed=None) -> "PermutationTriple":
        return cls(rng.permutation(n), rng.permutation(n), rng.permutation(n), seed)

    def inverse(self) -> "PermutationTriple":
        return PermutationTriple(np.argsort(self.rows), np.argsort(self.cols), np.argsort(self.syms), self.seed)

    def then(self, other: "PermutationTriple") -> "PermutationTriple":
        """Apply self first, then other."""
        return PermutationTriple(other.rows[self.rows], other.cols[self.cols], other.syms[self.syms])


def apply_permutations(P: PartialLatinSquare, t: PermutationTriple) -> PartialLatinSquare:
    """P'(rows[r], cols[c]) = syms[P(r, c)]."""
    n = P.order
    if t.order != n:
        raise OrderMismatch(f"triple of order {t.order} applied to square of order {n}")
    sym_map = np.concatenate(([0], np.asarray(t.syms) + 1)).astype(SYMBOL_DTYPE)
    inv_r, inv_c = np.argsort(t.rows), np.argsort(t.cols)
    # gather in row blocks: dense squares never get per-cell index arrays
    out = np.empty_like(P.cells)
    for lo in range(0, n, 256):
        out[lo:lo + 256] = sym_map[P.cells[inv_r[lo:lo + 256]][:, inv_c]]
    cls = LatinSquare if isinstance(P, LatinSquare) else PartialLatinSquare
    return cls(out, validate=False)


@dataclass
class HarvestReport:
    """Candidate 2x2 trades, how their cells collide, and a disjoint selection.

    Each trade is ``(r1, c1, r2, c2, s_old, s_new)``: the overlap cell
    (r1, c1) takes s_new from the row- and column-dependent cells, and the
    symbol-dependent cell (r2, c2) takes s_old.
    """

    eligible: int = 0
    disagreeing: int = 0
    trades: list = field(default_factory=list)
    conflicts: Counter = field(default_factory=Counter)
    conflicted_cells: int = 0
    selected: list = field(default_factory=list)

    def as_lines(self):
        out = [
            f"disagreeing={self.disagreeing}",
            f"eligible={self.eligible}",
            f"conflicted_cells={self.conflicted_cells}",
            f"selected={len(self.selected)}",
        ]
        for a, b in CONFLICT_CLASSES:
            out.append(f"conflicts_{a}_{b}={self.conflicts.get((a, b), 0)}")
        return out


def trade_cells(t):
    r1, c1, r2, c2 = t[:4]
    return ((r1, c1), (r1, c2), (r2, c1), (r2, c2))


def harvest(P: PartialLatinSquare, L, positions=None) -> HarvestReport:
    """Find, classify and greedily select single-intercalate repairs.

    ``L`` is a StructuredSquare, LatinSquare or array; ``positions`` may pass
    precomputed ``(rpos, cpos)`` inverse tables for L.
    """
    cells = L.cells if hasattr(L, "cells") else np.asarray(L)
    n = P.order
    if cells.shape[0] != n:
        raise OrderMismatch(f"orders differ: {n} vs {cells.shape[0]}")
    rep = HarvestReport()
    r1, c1, s1 = P.filled_cells()
    s1 = s1.astype(np.intp)
    s2 = cells[r1, c1].astype(np.intp)
    bad = s2 != s1
    r1, c1, s1, s2 = r1[bad], c1[bad], s1[bad], s2[bad]
    rep.disagreeing = int(r1.size)
    if positions is None:
        c2 = np.array([int(np.flatnonzero(cells[r] == s)[0]) for r, s in zip(r1, s1)], dtype=np.intp)
        r2 = np.array([int(np.flatnonzero(cells[:, c] == s)[0]) for c, s in zip(c1, s1)], dtype=np.intp)
    else:
        rpos, cpos = positions
        c2 = rpos[r1, s1 - 1].astype(np.intp)
        r2 = cpos[c1, s1 - 1].astype(np.intp)
    ok = cells[r2, c2] == s2
    # the symbol-dependent cell must not be one where P already agrees with L
    ok &= P.cells[r2, c2] != s2
    trades = [
        (int(a), int(b), int(c), int(d), int(e), int(f))
        for a, b, c, d, e, f in zip(r1[ok], c1[ok], r2[ok], c2[ok], s2[ok], s1[ok])
    ]
    rep.trades = trades
    rep.eligible = len(trades)

    claims = {}
    for i, t in enumerate(trades):
        for role, cell in zip(_ROLES, trade_cells(t)):
            claims.setdefault(cell, []).append((i, role))
    for cell, cl in claims.items():
        if len(cl) < 2:
            continue
        rep.conflicted_cells += 1
        for x in range(len(cl)):
            for y in range(x + 1, len(cl)):
                rep.conflicts[_class_key(cl[x][1], cl[y][1])] += 1
    for key in IMPOSSIBLE_CLASSES:
        assert rep.conflicts.get(key, 0) == 0, f"structurally impossible conflict {key}"

    used = set()
    for t in trades:  # already in row-major order of the overlap cell
        cs = trade_cells(t)
        if any(c in used for c in cs):
            continue
        used.update(cs)
        rep.selected.append(t)
    return rep


def harvest_conflict_bound(n: int, eps) -> float:
    """Bound on cells claimed by several trades: 81 eps n + 0.39 n + 97 eps^2 n^2."""
    eps = float(eps)
    return 81 * eps * n + 0.39 * n + 97 * eps * eps * n * n


def harvest_conflict_bound_alt(n: int, eps) -> float:
    """The variant 81 eps n + 0.23 n + 166 eps^2 n^2 of the same bound."""
    eps = float(eps)
    return 81 * eps * n + 0.23 * n + 166 * eps * eps * n * n


def harvest_selected_bound(n: int, eps, delta) -> float:
    """Guaranteed number of disjoint single-intercalate repairs."""
    return float(delta) * n * (n // 2 - 2) - harvest_conflict_bound(n, eps)


def sample_good_triple(P: PartialLatinSquare, L, rng: np.random.Generator, max_tries: int = 64,
                       positions=None):
    """Draw relabellings until the harvest meets the guaranteed count.

    Returns ``(triple, report, tries)``.
    """
    n = P.order
    prof = density(P)
    need = harvest_selected_bound(n, prof.eps, prof.delta)
    for k in range(1, max_tries + 1):
        t = PermutationTriple.random(n, rng)
        rep = harvest(apply_permutations(P, t), L, positions)
        if len(rep.selected) >= need:
            return t, rep, k
    raise TriesExhausted(f"no relabelling reached {need:.1f} disjoint trades in {max_tries} tries")


def randomized_radicand(n: int, eps, delta) -> Fraction:
    eps, delta = _q(eps), _q(delta)
    return (36 * delta + Fraction(198) * delta / n + Fraction(5346) * eps / n
            + Fraction(1518, 100) / n + 10956 * eps * eps)


def randomized_feasible(n: int, eps, delta) -> bool:
    """12 <= n - 12 n sqrt(36d + 198d/n + 5346e/n + 15.18/n + 10956e^2) - 12 e n, exactly."""
    eps = _q(eps)
    lhs = n - 12 * eps * n - 12
    return _at_least_sqrt(lhs, 144 * n * n * randomized_radicand(n, eps, delta))


def complete_probabilistic(P: PartialLatinSquare, rng: np.random.Generator, mode: Mode | str = Mode.STRICT,
                           *, max_tries: int = 64, stats: CompletionStats | None = None,
                           engine_hook=None) -> LatinSquare:
    """Complete P by relabelling, harvesting disjoint 2x2 repairs, then repairing the rest."""
    mode = Mode(mode)
    n = P.order
    prof = density(P)
    st = stats if stats is not None else CompletionStats()
    st.n = n
    if n < 16:
        st.fallback = "exhaustive"
        out = tiny_complete(P)
        if out is None:
            raise TinyOrderFallbackFailed(f"order {n} square has no completion")
        return out
    if mode is Mode.STRICT and not randomized_feasible(n, prof.eps_exact, prof.delta_exact):
        raise Infeasible(f"eps={prof.eps:.3g}, delta={prof.delta:.3g} fail the randomised bound at n={n}")
    eng = CompletionEngine(build(n), P, prof.eps_exact)
    if engine_hook is not None:
        engine_hook(eng)
    # before any repair the engine's square is still the structured one
    t, rep, tries = sample_good_triple(P, eng.L, rng, max_tries, (eng.rpos, eng.cpos))
    Pp = apply_permutations(P, t)
    eng.P = Pp.cells
    for r1, c1, r2, c2, s_old, s_new in rep.selected:
        eng.apply_plan({(r1, c1): s_new, (r1, c2): s_old, (r2, c1): s_old, (r2, c2): s_new},
                       TradeKind.PROPER_2X2)
    st.harvested = len(rep.selected)
    st.relabel = t
    st.extra.update(tries=tries, eligible=rep.eligible, conflicted_cells=rep.conflicted_cells)
    Lp = run_repairs(eng, Pp, mode, st)
    del eng, Pp
    return apply_permutations(Lp, t.inverse())
