"""Compare the compiled and pure-Python sampling kernels.

Both backends consume identical uniform streams, so besides timing the
benchmark cross-checks that they produce byte-identical draws for the same
seed.  Run from a checkout or an installed package:

    python3 benchmarks/kernel_benchmark.py --vertex-count 30 --mh-steps 200000
"""

import argparse
import time

import numpy as np

from netpanel import (
    DirectedNetwork,
    SaomModel,
    TergmModel,
    available_backends,
    child_rng,
    simulate_period,
)
from netpanel.statistics import StatisticSpec
from netpanel.tergm import simulate_raw


def sparse_start(n, seed, p=0.1):
    adj = (child_rng(seed).random((n, n)) < p).astype(np.int8)
    np.fill_diagonal(adj, 0)
    return DirectedNetwork(adj)


def time_mh(backend, n, steps, seed):
    """Metropolis tie-toggle steps per second."""
    specs = (StatisticSpec("edges"), StatisticSpec("reciprocity"),
             StatisticSpec("transitive_triplets"))
    model = TergmModel(specs, np.array([-1.5, 0.5, 0.1]))
    start = sparse_start(n, seed)
    thinning = 100
    draw_count = steps // thinning
    t0 = time.perf_counter()
    draws, _, _ = simulate_raw(model, initial=start, draw_count=draw_count,
                               burn_in=0, thinning=thinning, seed=seed,
                               backend=backend)
    elapsed = time.perf_counter() - t0
    return draw_count * thinning / elapsed, elapsed, draws


def time_saom(backend, n, rate, repeats, seed):
    """Actor mini-steps per second."""
    specs = (StatisticSpec("edges"), StatisticSpec("reciprocity"),
             StatisticSpec("transitive_triplets"))
    model = SaomModel(specs, np.array([-1.8, 0.8, 0.2]), (rate,))
    start = sparse_start(n, seed)
    total = 0
    finals = []
    t0 = time.perf_counter()
    for r in range(repeats):
        trace = simulate_period(model, start, period=0,
                                rng=child_rng(seed, r), backend=backend)
        total += trace.opportunity_count
        finals.append(trace.final_network.adjacency)
    elapsed = time.perf_counter() - t0
    return total / elapsed, elapsed, np.stack(finals)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--vertex-count", type=int, default=30)
    parser.add_argument("--mh-steps", type=int, default=200_000)
    parser.add_argument("--saom-rate", type=float, default=60.0)
    parser.add_argument("--saom-repeats", type=int, default=40)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    if len(backends) < 2:
        print("compiled extension not built; timing the python backend only")

    rows = []
    mh_draws = {}
    saom_draws = {}
    for backend in backends:
        mh_rate, mh_time, draws = time_mh(
            backend, args.vertex_count, args.mh_steps, args.seed)
        mh_draws[backend] = draws
        ms_rate, ms_time, finals = time_saom(
            backend, args.vertex_count, args.saom_rate, args.saom_repeats,
            args.seed)
        saom_draws[backend] = finals
        rows.append((backend, mh_rate, mh_time, ms_rate, ms_time))

    print(f"\n{'backend':<10} {'mh steps/s':>14} {'(s)':>7} "
          f"{'mini-steps/s':>14} {'(s)':>7}")
    for backend, mh_rate, mh_time, ms_rate, ms_time in rows:
        print(f"{backend:<10} {mh_rate:>14,.0f} {mh_time:>7.2f} "
              f"{ms_rate:>14,.0f} {ms_time:>7.2f}")
    if len(rows) == 2:
        print(f"\nspeedup compiled/python: "
              f"mh {rows[0][1] / rows[1][1]:.1f}x, "
              f"mini-steps {rows[0][3] / rows[1][3]:.1f}x")
        same_mh = np.array_equal(mh_draws[backends[0]], mh_draws[backends[1]])
        same_saom = np.array_equal(saom_draws[backends[0]],
                                   saom_draws[backends[1]])
        print(f"identical draws across backends: mh {same_mh}, "
              f"saom {same_saom}")
        if not (same_mh and same_saom):
            raise SystemExit("backend outputs diverged for identical seeds")


if __name__ == "__main__":
    main()
