"""Acceptance checks 1-11; each prints a single PASS/FAIL line.

Run alone with ``python3 tests/test_acceptance.py`` or as part of pytest.
The two n=8192 criteria take roughly half an hour together.
"""

import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import chi2

from latinfill.completion import CompletionStats, complete, completion_feasible
from latinfill.construction import build
from latinfill.exact import all_latin_squares, count_completions, count_triangle_decompositions
from latinfill.fileformats import emit_graph, emit_square, parse_graph, parse_square
from latinfill.instances import gen_instance
from latinfill.probabilistic import (
    PermutationTriple,
    apply_permutations,
    harvest,
    harvest_conflict_bound,
    harvest_selected_bound,
    randomized_feasible,
)
from latinfill.reductions import (
    TripartiteGraph,
    colbourn_reduce,
    dense_gadget,
    gadget_density_bound,
    gadget_fillings,
    uniform_graphs,
)
from latinfill.squares import ImproperSquare, LatinSquare, PartialLatinSquare, is_latin
from latinfill.trades import (
    ImproperWalk,
    apply_trade,
    encode_square,
    improper_trade,
    is_proper_trade,
    random_improper_move,
    swap_trade,
)
from latinfill.triangulation import TriangulationStats, is_triangulation, triangulate

HERE = Path(__file__).parent
BIG_N = 8192
SEEDS = 20


def intercalate_counts(L: np.ndarray, cross_half: bool = False) -> np.ndarray:
    """Per cell, the number of 2x2 subsquares through it, by scanning every row pair.

    With ``cross_half`` only subsquares whose two columns lie in opposite
    halves are counted.
    """
    n = L.shape[0]
    counts = np.zeros((n, n), dtype=np.int64)
    left = np.arange(n) < n // 2
    opposite = left[:, None] != left[None, :]
    for r1 in range(n):
        for r2 in range(r1 + 1, n):
            m = L[r1][:, None] == L[r2][None, :]
            inter = m & m.T
            if cross_half:
                inter &= opposite
            per_col = inter.sum(axis=1)
            counts[r1] += per_col
            counts[r2] += per_col
    return counts


def test_criterion_01_structured_8(report):
    expected = (HERE / "fixtures" / "structured_8.txt").read_text()
    build(8)  # warm caches before timing
    t0 = time.perf_counter()
    S = build(8)
    el = time.perf_counter() - t0
    ok = emit_square(S.square) == expected and el < 1e-3
    report(1, ok, f"byte-exact={emit_square(S.square) == expected} build_seconds={el:.2e}")
    assert ok


def test_criterion_02_intercalate_census(report):
    t0 = time.perf_counter()
    details, ok = [], True
    for n in (4, 8, 16, 32, 64):
        L = build(n).cells
        counts = intercalate_counts(L)
        good = bool((counts == n // 2).all())
        ok &= good
        cross = intercalate_counts(L, cross_half=True)
        details.append(f"n={n}:total={sorted(set(counts.ravel().tolist()))},"
                       f"cross-half={sorted(set(cross.ravel().tolist()))}")
    for n in (5, 13, 29):
        S = build(n)
        good = is_latin(S.square) and len(S.flagged) <= 3 * n + 7
        ok &= good
        details.append(f"n={n}:flagged={len(S.flagged)}<={3 * n + 7}")
    el = time.perf_counter() - t0
    ok &= el < 30
    report(2, ok, f"{' '.join(details)} seconds={el:.1f}")
    assert ok


def _run(kind, seed, eps, delta):
    cmd = [sys.executable, str(HERE / "run_instance.py"), kind, str(BIG_N), str(eps), str(delta), str(seed), "10"]
    res = subprocess.run(cmd, capture_output=True, text=True, timeout=1800)
    if res.returncode != 0:
        return {"seed": seed, "ok": False, "error": res.stderr.strip().splitlines()[-1:]}
    return json.loads(res.stdout.strip().splitlines()[-1])


def test_criterion_03_strict_completion(report):
    eps, delta = 1e-4, 9e-5
    runs = [_run("strict", seed, eps, delta) for seed in range(SEEDS)]
    bad = []
    for r in runs:
        good = (r.get("ok") and r.get("bound_ok") and r.get("latin") and r.get("extends")
                and r["ledger_total"] <= r["ledger_bound"] and r["seconds"] < 120 and r["max_rss_mb"] < 1024)
        if not good:
            bad.append(r)
    worst_t = max((r.get("seconds", math.inf) for r in runs), default=0)
    worst_m = max((r.get("max_rss_mb", math.inf) for r in runs), default=0)
    worst_l = max((r.get("ledger_total", 0) / r.get("ledger_bound", 1) for r in runs), default=0)
    report(3, not bad, f"{SEEDS - len(bad)}/{SEEDS} ok, fill={runs[0].get('fill')} max_seconds={worst_t:.1f} "
           f"max_rss_mb={worst_m:.0f} max_ledger/bound={worst_l:.3f}")
    for r in bad:
        print("failed run:", r)
    assert not bad


def test_criterion_04_randomized_completion(report):
    eps = delta = 1e-4
    runs = [_run("randomized", seed, eps, delta) for seed in range(SEEDS)]
    flags_ok = all(r.get("randomized_bound_ok") and not r.get("bound_ok") for r in runs)
    wins = [r for r in runs if r.get("ok") and r.get("latin") and r.get("extends") and (r.get("tries") or 99) <= 10]
    ok = flags_ok and len(wins) >= 18
    tries = sorted(r.get("tries") or 0 for r in wins)
    report(4, ok, f"{len(wins)}/{SEEDS} within 10 tries (tries={tries}), randomized bound true, deterministic bound false: {flags_ok}, "
           f"max_seconds={max(r.get('seconds', 0) for r in runs):.1f} "
           f"max_rss_mb={max(r.get('max_rss_mb', 0) for r in runs):.0f}")
    for r in runs:
        if r not in wins:
            print("failed run:", r)
    assert ok


def test_criterion_05_step_scaling(report):
    steps = []
    for n in (1024, 2048, 4096):
        st = CompletionStats()
        complete(PartialLatinSquare.empty(n), "strict", stats=st)
        steps.append(st.steps)
    ratios = [b / a for a, b in zip(steps, steps[1:])]
    ok = all(r <= 8.5 for r in ratios)
    report(5, ok, f"steps={steps} ratios={[round(r, 3) for r in ratios]}")
    assert ok


def test_criterion_06_harvest_bound(report):
    n, eps, delta = 1024, 1e-3, 1e-3
    S = build(n)
    conflicted, selected = [], []
    for seed in range(50):
        P = gen_instance(n, eps, delta, seed)
        t = PermutationTriple.random(n, np.random.default_rng(seed))
        rep = harvest(apply_permutations(P, t), S)
        conflicted.append(rep.conflicted_cells)
        selected.append(len(rep.selected))
    bound = harvest_conflict_bound(n, eps)
    need = harvest_selected_bound(n, eps, delta)
    mc, ms = float(np.mean(conflicted)), float(np.mean(selected))
    ok = mc <= bound and ms >= need
    report(6, ok, f"mean_conflicted={mc:.2f} bound={bound:.1f} margin={bound - mc:.1f}; "
           f"mean_selected={ms:.1f} guarantee={need:.1f} margin={ms - need:.1f}")
    assert ok


def _hexagon():
    return TripartiteGraph.from_edges(2, [
        (("R", 0), ("C", 0)), (("C", 0), ("S", 0)), (("S", 0), ("R", 1)),
        (("R", 1), ("C", 1)), (("C", 1), ("S", 1)), (("S", 1), ("R", 0)),
    ])


def test_criterion_07_reduction_equivalence(report):
    t0 = time.perf_counter()
    total = mismatched = 0
    for size in (1, 2, 3):
        for G in uniform_graphs(size):
            P = colbourn_reduce(G)
            sq = count_completions(P.cells, limit=1) > 0
            tri = count_triangle_decompositions(G.edges(), limit=1) > 0
            total += 1
            mismatched += sq != tri
    K = TripartiteGraph.complete(3)
    k_sq, k_tri = count_completions(colbourn_reduce(K).cells), count_triangle_decompositions(K.edges())
    H = _hexagon()
    h_sq, h_tri = count_completions(colbourn_reduce(H).cells), count_triangle_decompositions(H.edges())
    el = time.perf_counter() - t0
    ok = mismatched == 0 and k_sq == k_tri == 12 and h_sq == h_tri == 0 and el < 60
    report(7, ok, f"graphs={total} mismatches={mismatched} K333={k_sq}/{k_tri} hexagon={h_sq}/{h_tri} "
           f"seconds={el:.1f}")
    assert ok


def test_criterion_08_dense_gadget(report):
    two_triangles = TripartiteGraph.from_edges(2, [
        (("R", 0), ("C", 0)), (("C", 0), ("S", 0)), (("R", 0), ("S", 0)),
        (("R", 1), ("C", 1)), (("C", 1), ("S", 1)), (("R", 1), ("S", 1)),
    ])
    ok, parts = True, []
    for name, G in (("K222", TripartiteGraph.complete(2)), ("two-triangles", two_triangles), ("hexagon", _hexagon())):
        g = dense_gadget(G)
        fills = len(gadget_fillings(g))
        tris = count_triangle_decompositions(G.edges())
        dens = max(g.line_fill())
        good = g.square.order == 16 and fills == tris and dens <= gadget_density_bound(2)
        ok &= good
        parts.append(f"{name}: completions={fills} triangulations={tris} max_line_fill={dens}")
    report(8, ok, f"{'; '.join(parts)}; bound={gadget_density_bound(2)}")
    assert ok


def _minus_hexagons(n, h, seed):
    rng = np.random.default_rng(seed)
    G = TripartiteGraph.complete(n)
    pr, pc, ps = rng.permutation(n), rng.permutation(n), rng.permutation(n)
    for k in range(h):
        cyc = [("R", pr[2 * k]), ("C", pc[2 * k]), ("S", ps[2 * k]),
               ("R", pr[2 * k + 1]), ("C", pc[2 * k + 1]), ("S", ps[2 * k + 1])]
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            G.add_edge(a, b, False)
    return G


def test_criterion_09_triangulation(report):
    ok, parts = True, []
    for h in (1, 3, 5):
        G = _minus_hexagons(30, h, seed=h)
        st = TriangulationStats()
        tris = triangulate(G, mode="practical", stats=st)
        exact = is_triangulation(G, tris)
        edges21 = all(e == 21 for e in st.edges_per_trade) and st.trades >= h
        under = st.max_vertex_use <= st.vertex_cap
        ok &= exact and edges21 and under
        parts.append(f"h={h}: partition={exact} trades={st.trades} edges/trade={sorted(set(st.edges_per_trade))} "
                     f"max_use={st.max_vertex_use}<=cap={st.vertex_cap}")
    report(9, ok, "; ".join(parts))
    assert ok


def test_criterion_10_sampler_uniformity(report):
    squares = all_latin_squares(4)
    index = {encode_square(s): i for i, s in enumerate(squares)}
    walk = ImproperWalk(build(4).square, np.random.default_rng(2024))
    walk.run(10_000)
    want, thin = 10 ** 6, 25
    chunks, got = [], 0
    while got < want:
        codes = walk.run(thin * 200_000, thin=thin)
        chunks.append(codes)
        got += len(codes)
    codes = np.concatenate(chunks)[:want]
    counts = np.zeros(len(squares))
    vals, cnt = np.unique(codes, return_counts=True)
    for v, c in zip(vals, cnt):
        counts[index[int(v)]] = c
    expected = want / len(squares)
    stat = float(((counts - expected) ** 2 / expected).sum())
    crit = float(chi2.ppf(0.99, len(squares) - 1))
    ok = len(squares) == 576 and stat <= crit
    report(10, ok, f"squares={len(squares)} samples={want} chi2={stat:.1f} critical99={crit:.1f}")
    assert ok


def _random_latin(n, rng):
    base = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    t = PermutationTriple.random(n, rng)
    return apply_permutations(LatinSquare(base + 1), t)


def _random_intercalate(L, rng):
    n = L.order
    cells = L.cells
    for _ in range(200):
        r1, r2 = rng.choice(n, 2, replace=False)
        c1 = int(rng.integers(n))
        a, b = int(cells[r1, c1]), int(cells[r2, c1])
        c2 = int(np.flatnonzero(cells[r1] == b)[0])
        if cells[r2, c2] == a:
            return ((r1, c1), (r1, c2), (r2, c1), (r2, c2)), (a, b)
    return None


def test_criterion_11_property_suites(report):
    rng = np.random.default_rng(11)
    cases = 1000
    counts = {}

    # trade involution, on proper and improper squares
    n_ok = 0
    for _ in range(cases):
        n = int(rng.integers(3, 9))
        L = _random_latin(n, rng)
        I = ImproperSquare.from_square(L)
        for _ in range(int(rng.integers(0, 6))):
            I = random_improper_move(I, rng)
        # template: (r1, c1) holds a, b sits in its row at c2 and its column at r2
        r1, c1 = (int(v) for v in rng.integers(n, size=2))
        a = int(rng.choice(np.flatnonzero(I.cube[r1, c1] > 0))) + 1
        b = int(rng.choice([s for s in range(1, n + 1) if s != a]))
        c2 = int(np.flatnonzero(I.cube[r1, :, b - 1] > 0)[0])
        r2 = int(np.flatnonzero(I.cube[:, c1, b - 1] > 0)[0])
        t = improper_trade(I, r1, c1, r2, c2, a, b)
        n_ok += apply_trade(apply_trade(I, t), t.reverse()) == I
    counts["involution"] = n_ok

    # proper trades keep Latin squares Latin and preserve line contents
    n_ok = seen = 0
    while seen < cases:
        L = _random_latin(int(rng.integers(4, 13)), rng)
        found = _random_intercalate(L, rng)
        if found is None:
            continue
        seen += 1
        Q = apply_trade(L, swap_trade(*found))
        n_ok += is_latin(Q) and is_proper_trade(L, Q) and Q != L
    counts["closure"] = n_ok

    # completion never rewrites a cell once it agrees with the input
    n_ok = seen = 0
    seed = 0
    while seen < cases:
        seed += 1
        n = int(rng.integers(16, 25))
        P = gen_instance(n, 0.2, 0.02, seed)
        log = {}

        def hook(eng, log=log):
            eng.log = []
            log["eng"] = eng

        st = CompletionStats()
        L = complete(P, "practical", engine_hook=hook, stats=st)
        eng = log.get("eng")
        if eng is None or st.fallback == "exhaustive":
            continue  # no trades were made
        seen += 1
        cur = build(n).cells.copy()
        fine = True
        settled = set()
        r, c, s = P.filled_cells()
        targets = {(int(a), int(b)): int(x) for a, b, x in zip(r, c, s)}
        for cell, x in targets.items():
            if cur[cell] == x:
                settled.add(cell)
        for tr in eng.log:
            for stp in tr.steps:
                if stp.cell in settled:
                    fine = False
                cur[stp.cell] = stp.added[0]
            for stp in tr.steps:
                if stp.cell in targets and cur[stp.cell] == targets[stp.cell]:
                    settled.add(stp.cell)
        fine &= bool(np.array_equal(cur, L.cells)) and all(L.cells[k] == v for k, v in targets.items())
        n_ok += fine
    counts["non-disturbance"] = n_ok

    # relabelling is a group action
    n_ok = 0
    for _ in range(cases):
        n = int(rng.integers(2, 15))
        P = gen_instance(n, 1.0, float(rng.random()) * 0.6, int(rng.integers(1 << 30)))
        a, b = PermutationTriple.random(n, rng), PermutationTriple.random(n, rng)
        lhs = apply_permutations(apply_permutations(P, a), b)
        good = lhs == apply_permutations(P, a.then(b))
        good &= apply_permutations(P, PermutationTriple.identity(n)) == P
        good &= apply_permutations(apply_permutations(P, a), a.inverse()) == P
        n_ok += good
    counts["group-action"] = n_ok

    # text formats round-trip
    n_ok = 0
    for _ in range(cases):
        n = int(rng.integers(1, 12))
        P = gen_instance(n, 1.0, float(rng.random()) * 0.7, int(rng.integers(1 << 30)))
        good = parse_square(emit_square(P)) == P
        I = ImproperSquare.from_square(P)
        I.cube[rng.integers(n), rng.integers(n), rng.integers(n)] -= 1
        back = parse_square(emit_square(I))
        if isinstance(back, PartialLatinSquare):  # the change blanked a cell and left it proper
            back = ImproperSquare.from_square(back)
        good &= back == I
        G = TripartiteGraph(rng.random((n, n)) < 0.5, rng.random((n, n)) < 0.5, rng.random((n, n)) < 0.5)
        good &= parse_graph(emit_graph(G)) == G
        n_ok += good
    counts["round-trip"] = n_ok

    ok = all(v == cases for v in counts.values())
    report(11, ok, " ".join(f"{k}={v}/{cases}" for k, v in counts.items()))
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
