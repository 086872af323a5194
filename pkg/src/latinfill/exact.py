"""Exhaustive search by exact cover (Knuth's Algorithm X over dicts of sets).

Used where the orders are small enough to enumerate: completing tiny
squares, counting completions, enumerating all squares of an order, and
counting triangle decompositions of small tripartite graphs.
"""

from __future__ import annotations

import numpy as np

from .squares import SYMBOL_DTYPE


class SearchLimit(Exception):
    """Raised when a search exceeds its node budget."""


class ExactCover:
    """Items to cover exactly once, and named options covering sets of items."""

    def __init__(self, options: dict, items=None):
        self.options = options
        cols = {i: set() for i in (items if items is not None else ())}
        for name, its in options.items():
            for it in its:
                cols.setdefault(it, set()).add(name)
        self.cols = cols
        self.nodes = 0

    def _select(self, name):
        cols, opts = self.cols, self.options
        removed = []
        for j in opts[name]:
            for i in cols[j]:
                for k in opts[i]:
                    if k != j:
                        cols[k].remove(i)
            removed.append(cols.pop(j))
        return removed

    def _deselect(self, name, removed):
        cols, opts = self.cols, self.options
        for j in reversed(opts[name]):
            cols[j] = removed.pop()
            for i in cols[j]:
                for k in opts[i]:
                    if k != j:
                        cols[k].add(i)

    def solutions(self, node_limit=None):
        """Yield each exact cover as a list of option names.

        The search keeps its own stack, so depth is not bounded by Python's
        recursion limit.
        """
        cols = self.cols
        partial = []
        stack = []  # per level: [sorted candidates, next index, undo data or None]

        def open_level():
            self.nodes += 1
            if node_limit is not None and self.nodes > node_limit:
                raise SearchLimit(f"more than {node_limit} search nodes")
            col = min(cols, key=lambda c: len(cols[c]))
            stack.append([sorted(cols[col]), 0, None])

        if not cols:
            yield []
            return
        open_level()
        while stack:
            level = stack[-1]
            if level[2] is not None:
                self._deselect(partial.pop(), level[2])
                level[2] = None
            if level[1] == len(level[0]):
                stack.pop()
                continue
            name = level[0][level[1]]
            level[1] += 1
            level[2] = self._select(name)
            partial.append(name)
            if not cols:
                yield list(partial)
            else:
                open_level()

    def count(self, limit=None, node_limit=None) -> int:
        n = 0
        for _ in self.solutions(node_limit):
            n += 1
            if limit is not None and n >= limit:
                break
        return n


def _latin_cover(cells: np.ndarray) -> ExactCover | None:
    """Exact-cover model of the blank cells; None when some line is already broken."""
    cells = np.asarray(cells)
    n = cells.shape[0]
    row_has = np.zeros((n, n + 1), dtype=bool)
    col_has = np.zeros((n, n + 1), dtype=bool)
    for r in range(n):
        for c in range(n):
            s = int(cells[r, c])
            if s:
                if row_has[r, s] or col_has[c, s]:
                    return None
                row_has[r, s] = col_has[c, s] = True
    options = {}
    items = []
    for r in range(n):
        for c in range(n):
            if cells[r, c]:
                continue
            items.append(("cell", r, c))
            for s in range(1, n + 1):
                if not row_has[r, s] and not col_has[c, s]:
                    options[(r, c, s)] = (("cell", r, c), ("row", r, s), ("col", c, s))
    for r in range(n):
        items += [("row", r, s) for s in range(1, n + 1) if not row_has[r, s]]
    for c in range(n):
        items += [("col", c, s) for s in range(1, n + 1) if not col_has[c, s]]
    return ExactCover(options, items)


def _fill(cells, sol):
    out = np.array(cells, dtype=SYMBOL_DTYPE, copy=True)
    for r, c, s in sol:
        out[r, c] = s
    return out


def complete_exact(cells, node_limit=None):
    """One completion of a partial square as an array, or None if there is none."""
    ec = _latin_cover(cells)
    if ec is None:
        return None
    for sol in ec.solutions(node_limit):
        return _fill(cells, sol)
    return None


def completions(cells, node_limit=None):
    """Yield every completion of a partial square."""
    ec = _latin_cover(cells)
    if ec is None:
        return
    for sol in ec.solutions(node_limit):
        yield _fill(cells, sol)


def count_completions(cells, limit=None, node_limit=None) -> int:
    ec = _latin_cover(cells)
    return 0 if ec is None else ec.count(limit, node_limit)


def all_latin_squares(n: int):
    """Every Latin square of order n, in lexicographic search order."""
    return list(completions(np.zeros((n, n), dtype=SYMBOL_DTYPE)))


def triangle_decompositions(edges, node_limit=None):
    """Yield triangle decompositions of a tripartite graph.

    ``edges`` is a collection of ``(u, v)`` pairs whose endpoints are tagged
    vertices such as ``("R", 0)``; the three parts are told apart by tag.
    Each decomposition is a list of (r, c, s) index triples.
    """
    es = {frozenset(e) for e in edges}
    adj = {}
    for e in es:
        u, v = tuple(e)
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    options = {}
    for e in es:
        u, v = sorted(e)
        if {u[0], v[0]} != {"C", "R"}:
            continue
        r, c = (u, v) if u[0] == "R" else (v, u)
        for s in adj[r] & adj[c]:
            if s[0] == "S":
                options[(r[1], c[1], s[1])] = (
                    frozenset((r, c)), frozenset((r, s)), frozenset((c, s)))
    ec = ExactCover(options, es)
    yield from ec.solutions(node_limit)


def count_triangle_decompositions(edges, limit=None, node_limit=None) -> int:
    n = 0
    for _ in triangle_decompositions(edges, node_limit):
        n += 1
        if limit is not None and n >= limit:
            break
    return n
