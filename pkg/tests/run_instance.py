"""Complete one generated instance in a fresh process and print a JSON summary.

Used by the acceptance tests so that peak memory is measured per run.

    python3 tests/run_instance.py strict N EPS DELTA SEED
    python3 tests/run_instance.py randomized N EPS DELTA SEED TRIES
"""

import json
import resource
import sys
import time

import numpy as np

from latinfill.completion import CompletionStats, complete, completion_feasible
from latinfill.errors import LatinError
from latinfill.instances import gen_instance
from latinfill.probabilistic import complete_probabilistic, randomized_feasible
from latinfill.squares import density, is_latin


def main(argv):
    kind, n, eps, delta, seed = argv[0], int(argv[1]), float(argv[2]), float(argv[3]), int(argv[4])
    tries = int(argv[5]) if len(argv) > 5 else 10
    P = gen_instance(n, eps, delta, seed)
    prof = density(P)
    out = {
        "seed": seed,
        "fill": prof.fill,
        "max_line": prof.max_line,
        "bound_ok": completion_feasible(n, prof.eps_exact, prof.delta_exact),
        "randomized_bound_ok": randomized_feasible(n, prof.eps_exact, prof.delta_exact),
    }
    st = CompletionStats()
    t0 = time.perf_counter()
    try:
        if kind == "strict":
            L = complete(P, "strict", stats=st)
        else:
            L = complete_probabilistic(P, np.random.default_rng(seed), "strict", max_tries=tries, stats=st)
        out["ok"] = True
    except LatinError as e:
        out["ok"] = False
        out["error"] = f"{type(e).__name__}: {e}"
        L = None
    out["seconds"] = time.perf_counter() - t0
    if L is not None:
        r, c, s = P.filled_cells()
        out["latin"] = is_latin(L)
        out["extends"] = bool((L.cells[r, c] == s).all())
    out["ledger_total"] = st.ledger_total
    out["ledger_bound"] = 3 * n + 7 + 69 * prof.fill
    out["max_fix_cells"] = st.max_fix_cells
    out["tries"] = st.extra.get("tries")
    out["harvested"] = st.harvested
    out["max_rss_mb"] = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    print(json.dumps(out))


if __name__ == "__main__":
    main(sys.argv[1:])
