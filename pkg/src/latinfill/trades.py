"""Proper and improper trades, and the improper-move random walk.

A trade is stored as an ordered list of cell rewrites.  Each step names
the symbols leaving the cell and the symbols entering it; on an improper
square a removal may drive a coefficient to -1.

The walk moves between Latin squares through states with at most one
improper cell.  From a proper square it picks a uniform cell and a
uniform symbol absent from that cell; from an improper square it resolves
the cell holding a negative symbol, choosing uniformly among the two
positive symbols there and the two rows and columns where the negative
symbol sits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import MissingSymbolAtCell, OrderMismatch, OutOfBounds
from .squares import ImproperSquare, LatinSquare, PartialLatinSquare


class TradeKind(Enum):
    PROPER_2X2 = "Proper2x2"
    IMPROPER_2X2 = "Improper2x2"
    COMPOSITE = "Composite"


@dataclass(frozen=True)
class Step:
    row: int
    col: int
    removed: tuple = ()
    added: tuple = ()

    @property
    def cell(self):
        return (self.row, self.col)

    def reverse(self) -> "Step":
        return Step(self.row, self.col, self.added, self.removed)


@dataclass(frozen=True)
class Trade:
    steps: tuple
    kind: TradeKind = TradeKind.COMPOSITE

    @property
    def footprint(self) -> frozenset:
        return frozenset(s.cell for s in self.steps)

    def reverse(self) -> "Trade":
        return Trade(tuple(s.reverse() for s in reversed(self.steps)), self.kind)

    def __len__(self):
        return len(self.steps)


@dataclass
class TradeRecord:
    """Trades applied so far, in order, with their combined footprint."""

    trades: list = field(default_factory=list)
    footprint: set = field(default_factory=set)

    def add(self, t: Trade):
        self.trades.append(t)
        self.footprint |= t.footprint


def swap_trade(cells, symbols) -> Trade:
    """Proper 2x2 trade exchanging the diagonals of an intercalate.

    ``cells`` are ``(r1, c1), (r1, c2), (r2, c1), (r2, c2)`` holding
    ``a, b, b, a``; ``symbols`` is ``(a, b)``.
    """
    a, b = symbols
    (p, q, s, t) = cells
    return Trade(
        (Step(*p, (a,), (b,)), Step(*q, (b,), (a,)), Step(*s, (b,), (a,)), Step(*t, (a,), (b,))),
        TradeKind.PROPER_2X2,
    )


def improper_trade(square: ImproperSquare, r1: int, c1: int, r2: int, c2: int, a: int, b: int) -> Trade:
    """The template ``a, b / b, c  ->  b, a / a, b + c - a`` on a rectangle.

    (r1, c1) holds ``a``; (r1, c2) and (r2, c1) hold ``b``; (r2, c2) may hold
    anything and gains ``+b - a``.
    """
    kind = TradeKind.IMPROPER_2X2
    cube = square.cube
    held = ((r1, c1, a), (r1, c2, b), (r2, c1, b), (r2, c2, a))
    if all(cube[x, y, s - 1] == 1 and (cube[x, y] != 0).sum() == 1 for x, y, s in held):
        kind = TradeKind.PROPER_2X2
    return Trade(
        (
            Step(r1, c1, (a,), (b,)),
            Step(r1, c2, (b,), (a,)),
            Step(r2, c1, (b,), (a,)),
            Step(r2, c2, (a,), (b,)),
        ),
        kind,
    )


def apply_trade(square, t: Trade):
    """Return a new square with the trade applied; the input is left unchanged."""
    if isinstance(square, ImproperSquare):
        out = square.copy()
        cube = out.cube
        n = out.order
        for st in t.steps:
            if not (0 <= st.row < n and 0 <= st.col < n):
                raise OutOfBounds(f"cell ({st.row}, {st.col}) outside order {n}")
            for s in st.removed:
                if cube[st.row, st.col, s - 1] <= 0 and t.kind is not TradeKind.IMPROPER_2X2:
                    raise MissingSymbolAtCell(f"symbol {s} not in cell ({st.row + 1}, {st.col + 1})")
                cube[st.row, st.col, s - 1] -= 1
            for s in st.added:
                cube[st.row, st.col, s - 1] += 1
        return out
    cells = square.cells.copy()
    apply_steps_inplace(cells, t.steps)
    cls = LatinSquare if isinstance(square, LatinSquare) else PartialLatinSquare
    return cls(cells, validate=False)


def apply_steps_inplace(cells: np.ndarray, steps):
    """Rewrite a proper square's array in place; each step swaps one symbol."""
    n = cells.shape[0]
    for st in steps:
        r, c = st.row, st.col
        if not (0 <= r < n and 0 <= c < n):
            raise OutOfBounds(f"cell ({r}, {c}) outside order {n}")
        if len(st.removed) > 1 or len(st.added) > 1:
            raise MissingSymbolAtCell("a proper square holds one symbol per cell")
        cur = int(cells[r, c])
        old = st.removed[0] if st.removed else 0
        if cur != old:
            raise MissingSymbolAtCell(f"symbol {old} not in cell ({r + 1}, {c + 1}), found {cur}")
        cells[r, c] = st.added[0] if st.added else 0


def is_proper_trade(P: PartialLatinSquare, Q: PartialLatinSquare) -> bool:
    """True iff P and Q fill the same cells and agree on every line's symbol set."""
    if P.order != Q.order:
        raise OrderMismatch(f"orders differ: {P.order} vs {Q.order}")
    a, b = P.cells, Q.cells
    if not np.array_equal(a > 0, b > 0):
        return False
    sa, sb = np.sort(a, axis=1), np.sort(b, axis=1)
    if not np.array_equal(sa, sb):
        return False
    return bool(np.array_equal(np.sort(a, axis=0), np.sort(b, axis=0)))


# random walk ---------------------------------------------------------------

def random_improper_move(square: ImproperSquare, rng: np.random.Generator) -> ImproperSquare:
    """One step of the improper-trade walk; returns a new square."""
    cube = square.cube
    n = square.order
    neg = np.argwhere(cube < 0)
    if len(neg) == 0:
        r, c = int(rng.integers(n)), int(rng.integers(n))
        a = int(np.argmax(cube[r, c])) + 1
        b = int(rng.integers(n - 1)) + 1
        if b >= a:
            b += 1
        r2 = int(np.argmax(cube[:, c, b - 1]))
        c2 = int(np.argmax(cube[r, :, b - 1]))
    else:
        r, c, b = (int(v) for v in neg[0])
        b += 1
        a = int(rng.choice(np.nonzero(cube[r, c] > 0)[0])) + 1
        r2 = int(rng.choice(np.nonzero(cube[:, c, b - 1] > 0)[0]))
        c2 = int(rng.choice(np.nonzero(cube[r, :, b - 1] > 0)[0]))
    # (r, c) takes b; the cell opposite it in the rectangle gives up a
    return apply_trade(square, improper_trade(square, r, c, r2, c2, a, b))


def _walk_kernel(cube, state, uniforms, thin, codes):
    """Advance the walk over ``len(uniforms)`` moves.

    ``state`` holds the improper cell and its negative symbol (-1 when the
    square is proper).  Every ``thin`` moves, a proper state is written to
    ``codes`` as a base-n integer of its cells; returns how many were written.
    """
    n = cube.shape[0]
    written = 0
    for t in range(uniforms.shape[0]):
        u0 = uniforms[t, 0]
        u1 = uniforms[t, 1]
        u2 = uniforms[t, 2]
        if state[0] < 0:
            cell = int(u0 * n * n)
            r = cell // n
            c = cell % n
            a = 0
            for s in range(n):
                if cube[r, c, s] == 1:
                    a = s
            b = int(u1 * (n - 1))
            if b >= a:
                b += 1
            r2 = 0
            c2 = 0
            for x in range(n):
                if cube[x, c, b] == 1:
                    r2 = x
                if cube[r, x, b] == 1:
                    c2 = x
        else:
            r = state[0]
            c = state[1]
            b = state[2]
            pick = int(u0 * 2)
            pr = int(u1 * 2)
            pc = int(u2 * 2)
            a = -1
            seen = 0
            for s in range(n):
                if cube[r, c, s] > 0:
                    if seen == pick:
                        a = s
                    seen += 1
            r2 = -1
            c2 = -1
            seen = 0
            for x in range(n):
                if cube[x, c, b] > 0:
                    if seen == pr:
                        r2 = x
                    seen += 1
            seen = 0
            for x in range(n):
                if cube[r, x, b] > 0:
                    if seen == pc:
                        c2 = x
                    seen += 1
        cube[r, c, a] -= 1
        cube[r, c, b] += 1
        cube[r, c2, b] -= 1
        cube[r, c2, a] += 1
        cube[r2, c, b] -= 1
        cube[r2, c, a] += 1
        cube[r2, c2, a] -= 1
        cube[r2, c2, b] += 1
        if cube[r2, c2, a] < 0:
            state[0] = r2
            state[1] = c2
            state[2] = a
        else:
            state[0] = -1
        if thin > 0 and (t + 1) % thin == 0 and state[0] < 0:
            code = 0
            for i in range(n):
                for j in range(n):
                    for s in range(n):
                        if cube[i, j, s] == 1:
                            code = code * n + s
            codes[written] = code
            written += 1
    return written


try:  # the walk is hot enough to be worth compiling when numba is present
    import numba

    _walk_kernel = numba.njit(cache=True)(_walk_kernel)
except ImportError:  # pragma: no cover
    pass


class ImproperWalk:
    """The improper-move walk on one square, advanced in batches."""

    def __init__(self, start: PartialLatinSquare, rng: np.random.Generator):
        self.square = ImproperSquare.from_square(start)
        self.rng = rng
        self._state = np.array([-1, -1, -1], dtype=np.int64)
        neg = np.argwhere(self.square.cube < 0)
        if len(neg):
            self._state[:] = neg[0]

    @property
    def is_proper(self) -> bool:
        return self._state[0] < 0

    def run(self, moves: int, thin: int = 0, batch: int = 1 << 20):
        """Make ``moves`` moves.

        With ``thin > 0``, return the codes of the proper states found at every
        ``thin``-th move (see ``encode_square``).
        """
        n = self.square.order
        if thin and n ** (n * n) > 2 ** 62:
            raise OverflowError("state codes only fit orders up to 5")
        if thin:
            batch = max(thin, batch - batch % thin)
        out = []
        done = 0
        while done < moves:
            m = min(batch, moves - done)
            u = self.rng.random((m, 3))
            codes = np.empty(m // thin if thin else 0, dtype=np.int64)
            w = _walk_kernel(self.square.cube, self._state, u, thin, codes)
            out.append(codes[:w])
            done += m
        return np.concatenate(out) if out else np.empty(0, dtype=np.int64)

    def latin(self) -> LatinSquare:
        return LatinSquare(self.square.to_square().cells, validate=False)


def decode_square(code: int, n: int) -> np.ndarray:
    """Inverse of the base-n cell code written by the walk."""
    vals = []
    for _ in range(n * n):
        vals.append(code % n + 1)
        code //= n
    return np.array(vals[::-1], dtype=np.int64).reshape(n, n)


def encode_square(cells) -> int:
    arr = np.asarray(cells)
    n = arr.shape[0]
    code = 0
    for v in arr.ravel():
        code = code * n + int(v) - 1
    return code


def _seed_square(n: int) -> PartialLatinSquare:
    from .construction import build

    if n in (1, 3):
        idx = np.arange(n)
        return LatinSquare((idx[:, None] + idx[None, :]) % n + 1, validate=False)
    return build(n).square


def sample_latin(n: int, burn_in: int, rng: np.random.Generator) -> LatinSquare:
    """A Latin square from the walk started at the structured square.

    After ``burn_in`` moves the state is inspected; while it is improper the
    walk continues and is inspected again every ``burn_in`` moves.  Checking
    only at these fixed times keeps the output uniform in the limit, whereas
    stopping at the first proper state would favour squares that are hard to
    leave.
    """
    if n < 2:
        return LatinSquare([[1]])
    walk = ImproperWalk(_seed_square(n), rng)
    spacing = max(1, burn_in)
    walk.run(burn_in)
    while not walk.is_proper:
        walk.run(spacing)
    return walk.latin()
