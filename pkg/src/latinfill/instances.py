"""Random partial squares with bounded line usage, for tests and benchmarks."""

from __future__ import annotations

import math

import numpy as np

from .errors import InfeasibleDensities
from .squares import SYMBOL_DTYPE, PartialLatinSquare


def gen_instance(n: int, eps: float, delta: float, seed: int, max_attempts: int | None = None) -> PartialLatinSquare:
    """A completable partial square with ``floor(delta n^2)`` filled cells.

    Cells are drawn from a random isotope of the cyclic square and kept only
    while every row, column and symbol stays at or below ``ceil(eps n)`` uses,
    so the hidden square is a completion by construction.
    """
    if eps < 0 or delta < 0:
        raise InfeasibleDensities("densities must be non-negative")
    fill = math.floor(delta * n * n + 1e-9)
    cap = math.ceil(eps * n - 1e-9)
    if fill == 0:
        return PartialLatinSquare.empty(n)
    if fill > cap * n:
        raise InfeasibleDensities(f"{fill} cells cannot fit under {cap} per line at order {n}")
    rng = np.random.default_rng(seed)
    pr, pc, ps = rng.permutation(n), rng.permutation(n), rng.permutation(n)
    rows = np.zeros(n, dtype=np.int64)
    cols = np.zeros(n, dtype=np.int64)
    syms = np.zeros(n, dtype=np.int64)
    cells = np.zeros((n, n), dtype=SYMBOL_DTYPE)
    placed = 0
    budget = max_attempts if max_attempts is not None else 50 * fill + 10_000
    tried = 0
    while placed < fill:
        if tried >= budget:
            raise InfeasibleDensities(f"placed only {placed} of {fill} cells under cap {cap}")
        batch = rng.integers(0, n, size=(4096, 2))
        for r, c in batch:
            tried += 1
            s = ps[(pr[r] + pc[c]) % n]
            if cells[r, c] or rows[r] >= cap or cols[c] >= cap or syms[s] >= cap:
                continue
            cells[r, c] = s + 1
            rows[r] += 1
            cols[c] += 1
            syms[s] += 1
            placed += 1
            if placed == fill:
                break
    return PartialLatinSquare(cells, validate=False)
