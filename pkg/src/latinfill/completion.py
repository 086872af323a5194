"""Completing sparse partial Latin squares by local trades.

The engine starts from a structured square ``L`` and repairs the filled
cells of ``P`` one at a time.  Each repair is assembled from in-line swaps
(two cells of one row, or of one column, exchange contents) built out of
chains of 2x2 moves on ``L``'s subsquare structure, followed by three
intercalate swaps.  A disturbance ledger records every cell that has left
its constructed value; rows, columns and symbols with too many such cells
are avoided when choosing the cells a trade may use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .construction import StructuredSquare, build
from .errors import (
    AvoidSetTooLarge,
    ChoicesExhausted,
    IneligibleCell,
    Infeasible,
    OrderMismatch,
    TinyOrderFallbackFailed,
)
from .squares import LatinSquare, PartialLatinSquare, density, disagreement_cells
from .trades import Step, Trade, TradeKind

ROW, COL, SYM = "row", "column", "symbol"

SWAP_BUDGET = 16
FIX_BUDGET = 4 * SWAP_BUDGET + 5
TINY_ORDER = 16
FALLBACK_ORDER = 64  # largest order the Practical exhaustive fallback will attempt
SCAN_BLOCK = 256


class Mode(Enum):
    STRICT = "strict"
    PRACTICAL = "practical"


# feasibility predicates, evaluated exactly --------------------------------

def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _at_least_sqrt(lhs: Fraction, radicand: Fraction) -> bool:
    """lhs >= sqrt(radicand), without rounding."""
    return lhs >= 0 and lhs * lhs >= radicand


def completion_feasible(n: int, eps, delta) -> bool:
    """20 <= n - 12 sqrt(69 delta n^2 + 3n + 7) - 12 eps n."""
    eps, delta = _q(eps), _q(delta)
    lhs = n - 12 * eps * n - 20
    return _at_least_sqrt(lhs, 144 * (69 * delta * n * n + 3 * n + 7))


def fix_feasible(n: int, eps, kappa) -> bool:
    """20 <= n - 12 n sqrt(kappa) - 12 eps n, the single-repair condition."""
    eps, kappa = _q(eps), _q(kappa)
    lhs = n - 12 * eps * n - 20
    return _at_least_sqrt(lhs, 144 * n * n * kappa)


@dataclass(frozen=True)
class FeasibilityParams:
    n: int
    eps: float
    delta: float = 0.0
    d: float = 0.0
    a: int = 0
    kappa: float = 0.0


def swap_feasible(p: FeasibilityParams) -> bool:
    """Both linear conditions under which an in-row swap is guaranteed."""
    n, eps, d, kappa = p.n, _q(p.eps), _q(p.d), _q(p.kappa)
    if d <= 0:
        return False
    first = n - 4 * (kappa / d) * n - 6 * d * n - 6 * eps * n - 3 * p.a >= 3
    second = n - 12 * d * n - 12 * eps * n - 4 * p.a >= 12
    return bool(first and second)


def overload_threshold(kappa_cells: int, n: int) -> float:
    """d for the next repair: the square root of the (floored) disturbed
    fraction plus room for the 48 cells the four swaps may add."""
    floor = 3 * n + 7
    return math.sqrt((max(kappa_cells, floor) + 48) / (n * n))


# disturbance ledger --------------------------------------------------------

class DisturbanceLedger:
    """Counts of disturbed cells per row, column and symbol.

    A cell is disturbed once its content has left the constructed value, or
    if the construction itself flagged it.  A symbol's counter counts the
    distinct (cell, symbol) pairs written to disturbed cells, which bounds the
    number of disturbed cells holding that symbol at any time.
    """

    def __init__(self, n: int):
        self.n = n
        self.rows = np.zeros(n, dtype=np.int64)
        self.cols = np.zeros(n, dtype=np.int64)
        self.syms = np.zeros(n + 1, dtype=np.int64)
        self.total = 0
        self.mask = np.zeros((n, n), dtype=bool)
        self._pairs = set()
        self.journal = None

    @classmethod
    def for_square(cls, S: StructuredSquare) -> "DisturbanceLedger":
        led = cls(S.order)
        L = S.cells
        for r, c in sorted(S.flagged):
            led.mark(r, c, int(L[r, c]))
        return led

    @property
    def kappa(self) -> float:
        return self.total / (self.n * self.n)

    def mark(self, r: int, c: int, s: int):
        j = self.journal
        if not self.mask[r, c]:
            self.mask[r, c] = True
            self.rows[r] += 1
            self.cols[c] += 1
            self.total += 1
            if j is not None:
                j.append((0, r, c))
        key = (r * self.n + c) * (self.n + 1) + s
        if key not in self._pairs:
            self._pairs.add(key)
            self.syms[s] += 1
            if j is not None:
                j.append((1, key, s))

    def undo(self, entry):
        kind, x, y = entry
        if kind == 0:
            self.mask[x, y] = False
            self.rows[x] -= 1
            self.cols[y] -= 1
            self.total -= 1
        else:
            self._pairs.discard(x)
            self.syms[y] -= 1

    def counter(self, axis: str, index: int) -> int:
        if axis == ROW:
            return int(self.rows[index])
        if axis == COL:
            return int(self.cols[index])
        return int(self.syms[index])

    def overloaded_count(self, axis: str, d: float) -> int:
        arr = {ROW: self.rows, COL: self.cols, SYM: self.syms[1:]}[axis]
        return int(np.count_nonzero(arr > d * self.n))


def is_overloaded(ledger: DisturbanceLedger, axis: str, index: int, d: float) -> bool:
    """More than d*n disturbed cells in the given row, column or symbol."""
    return ledger.counter(axis, index) > d * ledger.n


# the engine ----------------------------------------------------------------

def _inverse_positions(L: np.ndarray):
    """``rpos[r, s-1]`` = column of s in row r; ``cpos[c, s-1]`` = row of s in column c."""
    n = L.shape[0]
    rpos = np.empty((n, n), dtype=np.uint16)
    cpos = np.empty((n, n), dtype=np.uint16)
    block = 512
    idx = np.arange(n, dtype=np.uint16)
    for lo in range(0, n, block):
        rows = L[lo:lo + block].astype(np.intp) - 1
        hi = lo + rows.shape[0]
        np.put_along_axis(rpos[lo:hi], rows, np.broadcast_to(idx, rows.shape), axis=1)
        cols = L[:, lo:lo + block].T.astype(np.intp) - 1
        np.put_along_axis(cpos[lo:hi], cols, np.broadcast_to(idx, cols.shape), axis=1)
    return rpos, cpos


class _View:
    """Row-oriented access to the engine's arrays, optionally transposed.

    In-column swaps are in-row swaps of the transpose, so the swap search is
    written once against this view.  ``pos[r, s-1]`` is the column of s in
    row r of the view and ``inv[c, s-1]`` the row of s in its column c.
    """

    __slots__ = ("e", "t", "L", "P", "mask", "pos", "inv", "row_load", "col_load")

    def __init__(self, engine, transposed: bool):
        led = engine.ledger
        self.e = engine
        self.t = transposed
        rows, cols, _ = engine.loads()
        if transposed:
            self.L, self.P, self.mask = engine.L.T, engine.P.T, led.mask.T
            self.pos, self.inv = engine.cpos, engine.rpos
            self.row_load, self.col_load = cols, rows
        else:
            self.L, self.P, self.mask = engine.L, engine.P, led.mask
            self.pos, self.inv = engine.rpos, engine.cpos
            self.row_load, self.col_load = rows, cols

    def get(self, r, c):
        return int(self.L[r, c])

    def col_of(self, r, s):
        return int(self.pos[r, s - 1])

    def row_of(self, c, s):
        return int(self.inv[c, s - 1])

    def cell(self, r, c):
        return (c, r) if self.t else (r, c)

    def agree(self, r, c):
        p = self.P[r, c]
        return bool(p) and p == self.L[r, c]

    def agree_v(self, r, c):
        p = self.P[r, c]
        return (p != 0) & (p == self.L[r, c])


class _Plan(dict):
    """Cell -> new symbol, refusing contradictory assignments."""

    def put(self, cell, s):
        old = self.get(cell)
        if old is not None and old != s:
            raise _Reject
        self[cell] = s


class _Reject(Exception):
    pass


@dataclass
class SwapOutcome:
    trade: Trade
    shape: str  # "SameHalf" or "CrossHalf"
    cells: tuple


@dataclass
class CompletionStats:
    n: int = 0
    steps: int = 0
    fixes: int = 0
    initial_disturbed: int = 0
    ledger_total: int = 0
    max_fix_cells: int = 0
    relaxed_fixes: int = 0
    fallback: str = ""
    harvested: int = 0
    extra: dict = field(default_factory=dict)
    relabel: object = None  # permutation triple of a randomised run

    def as_lines(self, ledger: DisturbanceLedger | None = None):
        out = [
            f"n={self.n}",
            f"steps={self.steps}",
            f"fixes={self.fixes}",
            f"harvested={self.harvested}",
            f"initial_disturbed={self.initial_disturbed}",
            f"ledger_total={self.ledger_total}",
            f"max_fix_cells={self.max_fix_cells}",
            f"relaxed_fixes={self.relaxed_fixes}",
            f"fallback={self.fallback or 'none'}",
        ]
        for k, v in self.extra.items():
            out.append(f"{k}={v}")
        if ledger is not None:
            # rows by disturbed-cell count, in buckets 0, 1, 2-3, 4-7, ...
            edges = [0, 1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024]
            top = max(edges[-1] + 1, ledger.n + 1)
            hist = np.histogram(ledger.rows, bins=edges + [top])[0]
            for lo, hi, cnt in zip(edges, edges[1:] + [top], hist):
                label = str(lo) if hi == lo + 1 else f"{lo}_{hi - 1}"
                out.append(f"rows_disturbed_{label}={int(cnt)}")
        return out


class CompletionEngine:
    """Mutable state of one completion run: L, its inverse positions, P and the ledger.

    ``steps`` counts elementary operations: one per candidate examined by a
    scan (vectorised scans count their full length) and one per cell
    written, on top of the ``3n^2`` spent building L and its inverses.
    """

    def __init__(self, S: StructuredSquare, P: PartialLatinSquare, eps=None):
        if S.order != P.order:
            raise OrderMismatch(f"orders differ: {S.order} vs {P.order}")
        self.n = n = S.order
        self.half = S.half
        self.L = S.cells.copy()
        self.P = P.cells
        self.rpos, self.cpos = _inverse_positions(self.L)
        idx = np.arange(n)
        k = S.half
        # half of each row/column index (and of symbol s at index s-1); -1 outside the even core
        self.halves = np.where(idx < k, 0, np.where(idx < 2 * k, 1, -1)).astype(np.int8)
        self.ledger = DisturbanceLedger.for_square(S)
        self.eps = density(P).eps_exact if eps is None else _q(eps)
        self.steps = 3 * n * n
        self.log = None  # list of Trade when recording
        self._undo = None
        self._frozen_loads = None
        self.stats = CompletionStats(n=n, initial_disturbed=self.ledger.total)

    # basic access

    def agrees(self, r, c) -> bool:
        p = self.P[r, c]
        return bool(p) and p == self.L[r, c]

    def target(self, r, c):
        return int(self.P[r, c]) or None

    def half_of(self, i):
        h = int(self.halves[i])
        return None if h < 0 else h

    def sym_half(self, s):
        return self.half_of(s - 1)

    def square(self) -> LatinSquare:
        return LatinSquare(self.L, validate=False)

    def loads(self):
        """Row, column and symbol counters used by the load screens.

        During a repair these are frozen at its start, so that the four swaps
        are screened against the same state their choices were made on.
        """
        if self._frozen_loads is not None:
            return self._frozen_loads
        led = self.ledger
        return led.rows, led.cols, led.syms

    # applying trades

    def _check_plan(self, plan: dict, frozen=()):
        """Proper trade check: lines keep their symbol multisets, no agreement
        cell or frozen cell changes."""
        L = self.L
        rows, cols = {}, {}
        for (r, c), s in plan.items():
            old = int(L[r, c])
            if old == s:
                continue
            if self.agrees(r, c) or (r, c) in frozen:
                raise _Reject
            rows.setdefault(r, [[], []])
            cols.setdefault(c, [[], []])
            rows[r][0].append(old)
            rows[r][1].append(s)
            cols[c][0].append(old)
            cols[c][1].append(s)
        for lines in (rows, cols):
            for out_, in_ in lines.values():
                if sorted(out_) != sorted(in_):
                    raise _Reject

    def apply_plan(self, plan: dict, kind=TradeKind.COMPOSITE) -> Trade:
        L, rpos, cpos = self.L, self.rpos, self.cpos
        steps = []
        changed = [(cell, int(L[cell]), s) for cell, s in plan.items() if int(L[cell]) != s]
        for (r, c), old, s in changed:
            if self._undo is not None:
                self._undo.append((r, c, old))
            L[r, c] = s
            steps.append(Step(r, c, (old,), (s,)))
        for (r, c), old, s in changed:
            rpos[r, s - 1] = c
            cpos[c, s - 1] = r
            self.ledger.mark(r, c, s)
        self.steps += len(changed)
        t = Trade(tuple(steps), kind)
        if self.log is not None:
            self.log.append(t)
        return t

    def _begin(self):
        """Start a tentative section; returns a token for rollback."""
        if self._undo is None:
            self._undo = []
            self.ledger.journal = []
            return (True, 0, 0, len(self.log) if self.log is not None else 0)
        return (False, len(self._undo), len(self.ledger.journal), len(self.log) if self.log is not None else 0)

    def _rollback(self, token):
        outer, u, j, lg = token
        undo = self._undo
        touched = []
        while len(undo) > u:
            r, c, old = undo.pop()
            self.L[r, c] = old
            touched.append((r, c))
        for r, c in touched:
            s = int(self.L[r, c])
            self.rpos[r, s - 1] = c
            self.cpos[c, s - 1] = r
        jr = self.ledger.journal
        while len(jr) > j:
            self.ledger.undo(jr.pop())
        if self.log is not None:
            del self.log[lg:]
        if outer:
            self._undo = None
            self.ledger.journal = None

    def _commit(self, token):
        if token[0]:
            self._undo = None
            self.ledger.journal = None

    # in-line swaps

    def _second_ok(self, v, r1, c1, avoid, d, strict, frozen=()):
        """For every symbol s, whether the cell holding s in row r1 of the view is
        an admissible partner for swapping with (r1, c1).  Index s-1."""
        n = self.n
        syms_load = self.loads()[2]
        s1 = v.get(r1, c1)
        lim = d * n
        cb = v.pos[r1].astype(np.intp)
        syms = np.arange(1, n + 1)
        ok = syms != s1
        for a in avoid:
            ok[a - 1] = False
        r1v = np.full(n, r1)
        ok &= ~v.agree_v(r1v, cb)
        for cell in frozen:
            r, c = (cell[1], cell[0]) if v.t else cell
            if r == r1:
                ok[v.get(r, c) - 1] = False
        r3 = v.inv[c1].astype(np.intp)                # row of s in column c1
        r4 = v.inv[cb, s1 - 1].astype(np.intp)       # row of s1 in the column of s
        c1v = np.full(n, c1)
        ok &= ~v.agree_v(r3, c1v) & ~v.agree_v(r4, cb)
        if strict:
            ok &= ~v.mask[r3, c1v] & ~v.mask[r4, cb]
            ok &= (v.row_load[r3] <= lim) & (v.row_load[r4] <= lim)
            ok &= (syms_load[1:] <= lim) & (v.col_load[cb] <= lim)
        self.steps += n
        return ok

    def plan_swap(self, r1, c1, c2, avoid=frozenset(), d=1.0, transposed=False,
                  frozen=frozenset(), strict=True, fixed_cross=False):
        """Plan a proper trade exchanging the contents of (r1, c1) and (r1, c2).

        Coordinates are in the (possibly transposed) view.  Returns
        ``(plan, shape)`` where plan maps actual cells to new symbols.
        ``fixed_cross`` skips the load screen on the line crossing at c1, for
        callers that cannot choose that line.
        """
        v = _View(self, transposed)
        cell = v.cell
        n = self.n
        lim = d * n
        syms_load = self.loads()[2]
        s1, s2 = v.get(r1, c1), v.get(r1, c2)
        fz = frozen
        if s1 in avoid:
            raise IneligibleCell(f"first cell holds avoided symbol {s1}")
        if v.agree(r1, c1) or cell(r1, c1) in fz:
            raise IneligibleCell("first cell is fixed")
        if strict and (syms_load[s1] > lim or (not fixed_cross and v.col_load[c1] > lim)):
            raise IneligibleCell("first cell's symbol or column is overloaded")
        if s2 == s1 or s2 in avoid:
            raise IneligibleCell(f"second cell holds {s2}")
        if v.agree(r1, c2) or cell(r1, c2) in fz:
            raise IneligibleCell("second cell is fixed")
        r3 = v.row_of(c1, s2)
        r4 = v.row_of(c2, s1)
        if strict and (
            v.mask[r3, c1] or v.mask[r4, c2] or v.row_load[r3] > lim or v.row_load[r4] > lim
            or syms_load[s2] > lim or v.col_load[c2] > lim
        ):
            raise IneligibleCell("second cell fails the structure screens")
        for rc in ((r3, c1), (r4, c2)):
            if v.agree(*rc) or cell(*rc) in fz:
                raise IneligibleCell("a partner cell is fixed")

        if r3 == r4:
            plan = _Plan()
            plan.put(cell(r1, c1), s2)
            plan.put(cell(r1, c2), s1)
            plan.put(cell(r3, c1), s1)
            plan.put(cell(r3, c2), s2)
            self._check_plan(plan, fz)
            return plan, "SameHalf"

        h3, h4 = self.half_of(r3), self.half_of(r4)
        same = h3 is not None and h3 == h4
        if same or not strict:
            for r2 in self._same_half_rows(v, r1, r3, r4, c1, c2, s1, s2, avoid, strict, h3):
                try:
                    return self._same_half(v, r1, r2, r3, r4, c1, c2, s1, s2, avoid, fz, strict), "SameHalf"
                except _Reject:
                    continue
            if strict:
                raise ChoicesExhausted("no row completes the ten-cell swap")
        for lo in range(0, n, SCAN_BLOCK):
            rows = np.arange(lo, min(lo + SCAN_BLOCK, n))
            plain = self._cross_rows(v, rows, r1, r3, r4, c1, c2, s1, s2, avoid, d, strict, h4)
            flipped = self._cross_rows(v, rows, r1, r4, r3, c2, c1, s2, s1, avoid, d, strict, h3)
            for i in np.flatnonzero(plain | flipped):
                r2 = int(rows[i])
                tries = []
                if plain[i]:
                    tries.append((r1, r2, r3, r4, c1, c2, s1, s2))
                if flipped[i]:
                    tries.append((r1, r2, r4, r3, c2, c1, s2, s1))
                for args in tries:
                    try:
                        return self._cross_half(v, *args, avoid, d, fz, strict), "CrossHalf"
                    except _Reject:
                        continue
        raise ChoicesExhausted("no row completes the sixteen-cell swap")

    def _same_half_rows(self, v, r1, r3, r4, c1, c2, s1, s2, avoid, strict, h3):
        """Rows r2, ascending, passing the ten-cell swap's screens."""
        L = v.L
        for lo in range(0, self.n, SCAN_BLOCK):
            rows = np.arange(lo, min(lo + SCAN_BLOCK, self.n))
            m = rows.size
            s3 = L[rows, c1]
            s4 = L[rows, c2]
            c3 = v.pos[rows, s1 - 1].astype(np.intp)
            c4 = v.pos[rows, s2 - 1].astype(np.intp)
            ok = (L[r3, c4] == s3) & (L[r4, c3] == s4)
            for a in avoid:
                ok &= (s3 != a) & (s4 != a)
            ok &= (rows != r1) & (rows != r3) & (rows != r4)
            if strict:
                ok &= self.halves[rows] != h3
            r3v, r4v = np.full(m, r3), np.full(m, r4)
            c1v, c2v = np.full(m, c1), np.full(m, c2)
            for rr, cc in ((rows, c1v), (rows, c2v), (rows, c3), (rows, c4), (r3v, c4), (r4v, c3)):
                ok &= ~v.agree_v(rr, cc)
                if strict:
                    ok &= ~v.mask[rr, cc]
            self.steps += m
            yield from (rows[ok]).tolist()

    def _cross_rows(self, v, rows, r1, r3, r4, c1, c2, s1, s2, avoid, d, strict, h_opp):
        """Which of ``rows`` pass the base screens of the sixteen-cell swap
        with r2 level with r3 (opposite r4, whose half is ``h_opp``)."""
        lim = d * self.n
        L = v.L
        syms_load = self.loads()[2]
        m = rows.size
        s3 = L[rows, c1]
        s4 = L[rows, c2]
        c3 = v.pos[rows, s1 - 1].astype(np.intp)
        c4 = v.pos[rows, s2 - 1].astype(np.intp)
        s5 = L[r3, c4]
        ok = L[r4, c3] == s4
        ok &= (rows != r1) & (rows != r3) & (rows != r4)
        hr = self.halves[rows]
        if strict:
            ok &= (hr >= 0) & (hr != h_opp)
        r3v, r4v = np.full(m, r3), np.full(m, r4)
        c1v, c2v = np.full(m, c1), np.full(m, c2)
        for rr, cc in ((rows, c1v), (rows, c2v), (rows, c3), (rows, c4), (r4v, c3), (r3v, c4)):
            ok &= ~v.agree_v(rr, cc)
            if strict:
                ok &= ~v.mask[rr, cc]
        cross = s5 != s3
        for a in avoid:
            ok &= (s3 != a) & (s4 != a) & (s5 != a)
        if strict:
            sh = self.halves
            h3 = sh[s3.astype(np.intp) - 1]
            h5 = sh[s5.astype(np.intp) - 1]
            extra = (
                (syms_load[s3] <= lim) & (syms_load[s5] <= lim)
                & (v.row_load[rows] <= lim) & (v.col_load[c4] <= lim)
                & (h3 >= 0) & (h3 == h5)
            )
            ok &= ~cross | extra
        self.steps += m
        return ok

    def _same_half(self, v, r1, r2, r3, r4, c1, c2, s1, s2, avoid, fz, strict):
        s3, s4 = v.get(r2, c1), v.get(r2, c2)
        c3, c4 = v.col_of(r2, s1), v.col_of(r2, s2)
        if v.get(r3, c4) != s3 or v.get(r4, c3) != s4:
            raise _Reject
        if s3 in avoid or s4 in avoid:
            raise _Reject
        cells = ((r2, c1), (r2, c2), (r2, c3), (r2, c4), (r3, c4), (r4, c3))
        for rc in cells:
            if (strict and v.mask[rc]) or v.agree(*rc):
                raise _Reject
        cell = v.cell
        plan = _Plan()
        plan.put(cell(r1, c1), s2)
        plan.put(cell(r1, c2), s1)
        plan.put(cell(r2, c1), s1)
        plan.put(cell(r2, c2), s2)
        plan.put(cell(r2, c3), s4)
        plan.put(cell(r2, c4), s3)
        plan.put(cell(r3, c1), s3)
        plan.put(cell(r3, c4), s2)
        plan.put(cell(r4, c2), s4)
        plan.put(cell(r4, c3), s1)
        self._check_plan(plan, fz)
        return plan

    def _cross_half(self, v, r1, r2, r3, r4, c1, c2, s1, s2, avoid, d, fz, strict):
        """Sixteen-cell swap for r2 opposite r4 and level with r3."""
        n = self.n
        s3, s4 = v.get(r2, c1), v.get(r2, c2)
        c3, c4 = v.col_of(r2, s1), v.col_of(r2, s2)
        if v.get(r4, c3) != s4:
            raise _Reject
        s5 = v.get(r3, c4)
        if s5 == s3:
            return self._same_half(v, r1, r2, r3, r4, c1, c2, s1, s2, avoid, fz, strict)
        h3 = self.sym_half(s3)
        L = v.L
        # every s6 at once: its cells in row r2, column c1, row r3 and column c4
        c5 = v.pos[r2].astype(np.intp)
        r5 = v.inv[c1].astype(np.intp)
        c6 = v.pos[r3].astype(np.intp)
        r6 = v.inv[c4].astype(np.intp)
        ok = (L[r5, c5] == s3) & (L[r6, c6] == s5)
        for s in (s1, s2, s3, s4, s5, *avoid):
            ok[s - 1] = False
        if strict:
            ok &= (self.halves >= 0) & (self.halves != h3)
        r2v, r3v = np.full(n, r2), np.full(n, r3)
        c1v, c4v = np.full(n, c1), np.full(n, c4)
        for rr, cc in ((r2v, c5), (r5, c1v), (r5, c5), (r3v, c6), (r6, c4v), (r6, c6)):
            ok &= ~v.agree_v(rr, cc)
            if strict:
                ok &= ~v.mask[rr, cc]
        self.steps += n
        cell = v.cell
        for s6 in np.flatnonzero(ok) + 1:
            s6 = int(s6)
            c5_, r5_, c6_, r6_ = int(c5[s6 - 1]), int(r5[s6 - 1]), int(c6[s6 - 1]), int(r6[s6 - 1])
            try:
                plan = _Plan()
                plan.put(cell(r1, c1), s2)
                plan.put(cell(r1, c2), s1)
                plan.put(cell(r2, c1), s1)
                plan.put(cell(r2, c2), s2)
                plan.put(cell(r2, c3), s4)
                plan.put(cell(r2, c4), s6)
                plan.put(cell(r2, c5_), s3)
                plan.put(cell(r3, c1), s6)
                plan.put(cell(r3, c4), s2)
                plan.put(cell(r3, c6_), s5)
                plan.put(cell(r4, c2), s4)
                plan.put(cell(r4, c3), s1)
                plan.put(cell(r5_, c1), s3)
                plan.put(cell(r5_, c5_), s6)
                plan.put(cell(r6_, c4), s5)
                plan.put(cell(r6_, c6_), s6)
                self._check_plan(plan, fz)
            except _Reject:
                continue
            return plan
        raise _Reject

    def swap(self, r1, c1, c2, avoid=frozenset(), d=None, transposed=False,
             frozen=frozenset(), strict=True) -> SwapOutcome:
        """Apply an in-line swap; see ``plan_swap``."""
        if d is None:
            d = overload_threshold(self.ledger.total, self.n)
        plan, shape = self.plan_swap(r1, c1, c2, avoid, d, transposed, frozen, strict)
        t = self.apply_plan(plan)
        cells = ((c1, r1), (c2, r1)) if transposed else ((r1, c1), (r1, c2))
        return SwapOutcome(t, shape, cells)

    # single-cell repair

    def _first_ok(self, r, c, avoid, d, transposed, strict, fixed_cross=False):
        v = _View(self, transposed)
        s = v.get(r, c)
        if s in avoid or v.agree(r, c):
            return False
        lim = d * self.n
        return not strict or not (self.loads()[2][s] > lim or (not fixed_cross and v.col_load[c] > lim))

    def _line_swap(self, line, a, symbol, avoid, d, transposed, frozen, strict, fixed_cross=False):
        """Bring ``symbol`` to position ``a`` of a row (or column when transposed)."""
        v = _View(self, transposed)
        b = v.col_of(line, symbol)
        if b == a:
            return
        plan, _ = self.plan_swap(line, a, b, avoid, d, transposed, frozen, strict, fixed_cross)
        self.apply_plan(plan)

    def _intercalate(self, cells, a, b):
        """Swap a 2x2 subsquare whose corners hold a, b / b, a."""
        (p, q, s, t) = cells
        L = self.L
        if not (L[p] == a and L[q] == b and L[s] == b and L[t] == a):
            raise _Reject
        plan = {p: b, q: a, s: a, t: b}
        self._check_plan(plan)
        self.apply_plan(plan, TradeKind.PROPER_2X2)

    def fix_cell(self, target, strict=True, max_symbols=None):
        """Make L agree with P at ``target`` by a trade touching at most 69 other cells.

        Returns the number of cells changed besides the target.
        """
        r1, c1 = target
        s2 = self.target(r1, c1)
        s1 = int(self.L[r1, c1])
        if s2 is None or s2 == s1:
            raise IneligibleCell(f"cell {target} is blank in P or already agrees")
        n = self.n
        kappa_cells = max(self.ledger.total, 3 * n + 7) + 48
        if strict and not fix_feasible(n, self.eps, Fraction(kappa_cells, n * n)):
            raise Infeasible(f"repair bound fails with {kappa_cells} disturbed cells")
        d = overload_threshold(self.ledger.total, n)
        avoid = frozenset((s1, s2))
        c2 = int(self.rpos[r1, s2 - 1])
        r2 = int(self.cpos[c1, s2 - 1])
        for r4 in range(n):
            self.steps += 1
            if r4 in (r1, r2):
                continue
            c4 = int(self.rpos[r4, s1 - 1])
            if c4 == c2:
                continue
            r3 = int(self.cpos[c4, s2 - 1])
            c3 = int(self.rpos[r4, s2 - 1])
            if self.agrees(r4, c4) or self.agrees(r3, c4) or self.agrees(r4, c3):
                continue
            if not (
                self._first_ok(r1, c4, avoid, d, False, strict)
                and self._first_ok(r3, c2, avoid, d, False, strict, True)
                and self._first_ok(c1, r4, avoid, d, True, strict)
                and self._first_ok(c3, r2, avoid, d, True, strict, True)
            ):
                continue
            token = self._begin()
            led = self.ledger
            self._frozen_loads = (led.rows.copy(), led.cols.copy(), led.syms.copy())
            try:
                self._bring(r1, r3, c2, c4, avoid, d, False, strict, max_symbols)
                self._bring(c1, c3, r2, r4, avoid, d, True, strict, max_symbols)
                self._intercalate(((r1, c1), (r1, c4), (r4, c1), (r4, c4)), s1, s2)
            except (_Reject, ChoicesExhausted, IneligibleCell):
                self._rollback(token)
                continue
            finally:
                self._frozen_loads = None
            changed = {(r, c) for r, c, _ in self._undo} - {(r1, c1)}
            self._commit(token)
            if len(changed) > FIX_BUDGET:
                raise AssertionError(f"repair of {target} changed {len(changed)} other cells")
            self.stats.fixes += 1
            self.stats.max_fix_cells = max(self.stats.max_fix_cells, len(changed))
            return len(changed)
        raise ChoicesExhausted(f"no repair found for cell {target}")

    def _bring(self, a, b, x, y, avoid, d, transposed, strict, max_symbols=None):
        """Move s2 from (a, x) to (a, y) through an s2/s3 subsquare with line b.

        In view coordinates (a, x) and (b, y) hold s2.  Two line swaps put s3
        at (a, y) and (b, x), then the 2x2 on {a, b} x {x, y} swaps.  Symbols
        s3 are tried in ascending order among those whose cells in lines a
        and b pass the partner screens of the two swaps.
        """
        v = _View(self, transposed)
        s2 = v.get(a, x)
        first = self._second_ok(v, a, y, avoid, d, strict)
        second = self._second_ok(v, b, x, avoid, d, strict)
        # a symbol already in place needs no swap on that line
        first[v.get(a, y) - 1] = True
        second[v.get(b, x) - 1] = True
        ok = first & second
        for s in avoid:
            ok[s - 1] = False
        cands = np.flatnonzero(ok) + 1
        if max_symbols is not None:
            cands = cands[:max_symbols]
        for s3 in cands:
            s3 = int(s3)
            token = self._begin()
            try:
                self._line_swap(a, y, s3, avoid, d, transposed, frozenset(), strict)
                self._line_swap(b, x, s3, avoid, d, transposed, frozenset((v.cell(a, y),)), strict, True)
                cells = (v.cell(a, x), v.cell(a, y), v.cell(b, x), v.cell(b, y))
                self._intercalate(cells, s2, s3)
            except (_Reject, ChoicesExhausted, IneligibleCell):
                self._rollback(token)
                continue
            self._commit(token)
            return
        raise _Reject


# drivers -------------------------------------------------------------------

def tiny_complete(P: PartialLatinSquare, node_limit=None):
    """Complete by exhaustive search; None when P has no completion."""
    from .exact import complete_exact

    sol = complete_exact(P.cells, node_limit=node_limit)
    return None if sol is None else LatinSquare(sol, validate=False)


def complete(P: PartialLatinSquare, mode: Mode | str = Mode.STRICT, *, stats: CompletionStats | None = None,
             engine_hook=None) -> LatinSquare:
    """A Latin square agreeing with every filled cell of ``P``."""
    mode = Mode(mode)
    n = P.order
    prof = density(P)
    st = stats if stats is not None else CompletionStats()
    st.n = n
    if n < TINY_ORDER:
        st.fallback = "exhaustive"
        out = tiny_complete(P)
        if out is None:
            raise TinyOrderFallbackFailed(f"order {n} square has no completion")
        st.steps = n ** 3
        return out
    if mode is Mode.STRICT and not completion_feasible(n, prof.eps_exact, prof.delta_exact):
        raise Infeasible(f"eps={prof.eps:.3g}, delta={prof.delta:.3g} fail the completion bound at n={n}")
    eng = CompletionEngine(build(n), P, prof.eps_exact)
    if engine_hook is not None:
        engine_hook(eng)
    return run_repairs(eng, P, mode, st)


def _disagreements(eng, P):
    """Filled cells of P, row-major; the caller skips those that agree."""
    r, c, _ = P.filled_cells()
    return [(int(i), int(j)) for i, j in zip(r, c)]


def run_repairs(eng: CompletionEngine, P: PartialLatinSquare, mode: Mode, st: CompletionStats) -> LatinSquare:
    strict = mode is Mode.STRICT
    try:
        for cell in _disagreements(eng, P):
            if eng.agrees(*cell):
                continue
            try:
                eng.fix_cell(cell, strict=True)
            except (ChoicesExhausted, Infeasible):
                if strict:
                    raise
                eng.fix_cell(cell, strict=False, max_symbols=64)
                st.relaxed_fixes += 1
    except (ChoicesExhausted, Infeasible):
        if strict or P.order > FALLBACK_ORDER:
            raise
        from .exact import SearchLimit

        st.fallback = "exhaustive"
        try:
            out = tiny_complete(P, node_limit=2_000_000)
        except SearchLimit:
            out = None
        if out is None:
            raise ChoicesExhausted("trade search and bounded exhaustive search both failed")
        _fill_stats(eng, st)
        return out
    _fill_stats(eng, st)
    return eng.square()


def _fill_stats(eng, st):
    st.steps = eng.steps
    st.fixes = eng.stats.fixes
    st.max_fix_cells = max(st.max_fix_cells, eng.stats.max_fix_cells)
    st.initial_disturbed = eng.stats.initial_disturbed
    st.ledger_total = eng.ledger.total
