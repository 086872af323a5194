"""Command-line interface.

Exit codes: 0 success, 1 bad input or other failure, 2 the requested bounds
reject the instance, 3 the input is proven to have no completion.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import errors
from .completion import CompletionStats, Mode, complete
from .construction import build
from .fileformats import emit_graph, emit_trade_log, parse_graph, parse_square, write_square
from .instances import gen_instance
from .probabilistic import PermutationTriple, apply_permutations, complete_probabilistic, harvest
from .reductions import colbourn_reduce, dense_gadget, triangulation_to_square
from .squares import ImproperSquare, PartialLatinSquare, density, is_latin
from .trades import Step, Trade, sample_latin
from .triangulation import TriangulationStats, triangulate

EXIT_OK, EXIT_FAIL, EXIT_INFEASIBLE, EXIT_IMPOSSIBLE = 0, 1, 2, 3


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _out(path):
    return sys.stdout if path in (None, "-") else open(path, "w")


def _write_square(P, path):
    fh = _out(path)
    try:
        write_square(P, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()


def _load_square(path) -> PartialLatinSquare:
    P = parse_square(_read(path), allow_improper=False)
    return P


def cmd_build(args):
    _write_square(build(args.n).square, args.output)


def cmd_gen(args):
    _write_square(gen_instance(args.n, args.eps, args.delta, args.seed), args.output)


def _relabel_log(trades, t: PermutationTriple):
    """Map trades recorded on a relabelled square back to the input's labels."""
    inv = t.inverse()
    out = []
    for tr in trades:
        steps = tuple(
            Step(int(inv.rows[s.row]), int(inv.cols[s.col]),
                 tuple(int(inv.syms[x - 1]) + 1 for x in s.removed),
                 tuple(int(inv.syms[x - 1]) + 1 for x in s.added))
            for s in tr.steps
        )
        out.append(Trade(steps, tr.kind))
    return out


def cmd_complete(args):
    P = _load_square(args.input)
    st = CompletionStats()
    seen = {}

    def hook(eng):
        seen["eng"] = eng
        if args.log:
            eng.log = []

    t0 = time.perf_counter()
    if args.randomized:
        rng = np.random.default_rng(args.seed)
        L = complete_probabilistic(P, rng, args.mode, max_tries=args.tries, stats=st, engine_hook=hook)
    else:
        L = complete(P, args.mode, stats=st, engine_hook=hook)
    elapsed = time.perf_counter() - t0
    _write_square(L, args.output)
    eng = seen.get("eng")
    if args.log and st.fallback == "exhaustive":
        print("warning: exhaustive search produced the output; no trade log written", file=sys.stderr)
    elif args.log and eng is not None:
        trades = eng.log
        if st.relabel is not None:
            trades = _relabel_log(trades, st.relabel)
        with open(args.log, "w") as fh:
            fh.write(emit_trade_log(trades))
    if args.stats:
        prof = density(P)
        lines = st.as_lines(eng.ledger if eng is not None else None)
        lines += [f"fill={prof.fill}", f"max_line={prof.max_line}", f"seconds={elapsed:.3f}"]
        if eng is not None:
            lines.append(f"ledger_bound={3 * P.order + 7 + 69 * prof.fill}")
        print("\n".join(lines), file=sys.stderr)


def cmd_verify(args):
    Q = parse_square(_read(args.input))
    if isinstance(Q, ImproperSquare):
        print("improper square", file=sys.stderr)
        return EXIT_FAIL
    if not is_latin(Q):
        blanks = Q.order ** 2 - Q.fill
        print(f"not a Latin square ({blanks} blank cells)", file=sys.stderr)
        return EXIT_FAIL
    if args.extends:
        P = _load_square(args.extends)
        if P.order != Q.order:
            print(f"orders differ: {P.order} vs {Q.order}", file=sys.stderr)
            return EXIT_FAIL
        r, c, s = P.filled_cells()
        bad = np.flatnonzero(Q.cells[r, c] != s)
        if bad.size:
            i = bad[0]
            print(f"cell ({r[i] + 1}, {c[i] + 1}) holds {Q.cells[r[i], c[i]]}, expected {s[i]}", file=sys.stderr)
            return EXIT_FAIL
    print("ok", file=sys.stderr)
    return EXIT_OK


def cmd_sample(args):
    rng = np.random.default_rng(args.seed)
    burn = args.burn_in if args.burn_in is not None else 20 * args.n ** 3
    _write_square(sample_latin(args.n, burn, rng), args.output)


def cmd_reduce(args):
    _write_square(colbourn_reduce(parse_graph(_read(args.input))), args.output)


def cmd_gadget(args):
    g = dense_gadget(parse_graph(_read(args.input)))
    _write_square(g.square, args.output)
    if args.stats:
        fills = g.line_fill()
        print(f"order={g.square.order}\nkept_symbols={len(g.kept_symbols)}\n"
              f"max_line_fill={max(fills)}", file=sys.stderr)


def cmd_triangulate(args):
    G = parse_graph(_read(args.input))
    st = TriangulationStats()
    tris = triangulate(G, mode=args.mode, stats=st)
    _write_square(triangulation_to_square(tris, G.n), args.output)
    if args.stats:
        print("\n".join(st.as_lines()), file=sys.stderr)


def cmd_harvest(args):
    P = _load_square(args.input)
    n = P.order
    if args.seed is None:
        t = PermutationTriple.identity(n)
    else:
        t = PermutationTriple.random(n, np.random.default_rng(args.seed))
    rep = harvest(apply_permutations(P, t), build(n))
    print("\n".join(rep.as_lines()))


def cmd_bench(args):
    prev = None
    for n in args.sizes:
        st = CompletionStats()
        t0 = time.perf_counter()
        complete(PartialLatinSquare.empty(n), args.mode, stats=st)
        el = time.perf_counter() - t0
        ratio = f"{st.steps / prev:.3f}" if prev else "-"
        print(f"n={n} steps={st.steps} ratio={ratio} seconds={el:.3f}")
        prev = st.steps


def cmd_graph(args):
    # echo a graph file in canonical order; handy for checking input
    sys.stdout.write(emit_graph(parse_graph(_read(args.input))))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latinfill", description="Complete sparse partial Latin squares.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("build", help="print the structured square of order n")
    s.add_argument("n", type=int)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("gen", help="random completable partial square")
    s.add_argument("n", type=int)
    s.add_argument("--eps", type=float, required=True, help="max fraction of any line filled")
    s.add_argument("--delta", type=float, required=True, help="fraction of cells filled")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("complete", help="complete a partial square")
    s.add_argument("input")
    s.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.STRICT.value)
    s.add_argument("--randomized", action="store_true", help="relabel and harvest 2x2 repairs first")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tries", type=int, default=10, help="relabellings to try with --randomized")
    s.add_argument("--stats", action="store_true", help="key=value report on stderr")
    s.add_argument("--log", help="write the trade log here")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_complete)

    s = sub.add_parser("verify", help="check a Latin square, optionally against a partial one")
    s.add_argument("input")
    s.add_argument("--extends", help="partial square the input must agree with")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("sample", help="random Latin square from the improper-trade walk")
    s.add_argument("n", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--burn-in", type=int)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("reduce", help="embed a uniform tripartite graph in a partial square")
    s.add_argument("input")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("gadget", help="dense partial square encoding a small uniform graph")
    s.add_argument("input")
    s.add_argument("--stats", action="store_true")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_gadget)

    s = sub.add_parser("triangulate", help="triangle decomposition of a dense balanced graph")
    s.add_argument("input")
    s.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.PRACTICAL.value)
    s.add_argument("--stats", action="store_true")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_triangulate)

    s = sub.add_parser("harvest", help="count single 2x2 repairs against the structured square")
    s.add_argument("input")
    s.add_argument("--seed", type=int, help="relabel randomly first")
    s.set_defaults(func=cmd_harvest)

    s = sub.add_parser("bench", help="step counts on empty inputs")
    s.add_argument("--sizes", type=int, nargs="+", default=[1024, 2048, 4096])
    s.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.STRICT.value)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("graph", help="parse and re-emit a graph file")
    s.add_argument("input")
    s.set_defaults(func=cmd_graph)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = args.func(args)
    except errors.Infeasible as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except errors.TinyOrderFallbackFailed as e:
        print(f"no completion: {e}", file=sys.stderr)
        return EXIT_IMPOSSIBLE
    except (errors.LatinError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK if rc is None else rc


if __name__ == "__main__":
    sys.exit(main())
