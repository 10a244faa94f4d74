"""Time the numba and numpy paths of every kernel on representative inputs.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from irslab import kernels
from irslab.gh_metric import random_metric_space
from irslab.random_graphs import random_regular_graph
from irslab.rooted_graphs import cycle_graph
from irslab.chain_gluing import sample_chain


def _inputs(rng):
    x = np.sort(rng.normal(size=20_000))
    y = np.sort(rng.normal(size=20_000))
    a = rng.normal(size=(1500, 2))
    b = rng.normal(size=(1500, 2))
    rows = np.array([100, 500, 1500])
    cols = np.array([200, 800, 1500])
    adj = np.zeros((16, 16), dtype=np.int64)
    g16 = cycle_graph(16)
    for s, t, _, _ in g16.edges:
        adj[s, t] += 1
        adj[t, s] += 1
    reg = random_regular_graph(2000, 3, rng)
    ip, nb, _, _ = reg.csr(loops_twice=True)
    chain = sample_chain(0, 12, 0.5).graph
    cip, cnb, cwt, ceid = chain.csr(loops_twice=False)
    centers = np.arange(chain.vertex_count, dtype=np.int64)
    mx = random_metric_space(5, rng)
    my = random_metric_space(5, rng)
    nv = 10
    side = np.array([0] * 5 + [1] * 5, dtype=np.int64)
    pt = np.array(list(range(5)) * 2, dtype=np.int64)
    cand = np.tile(np.arange(5, dtype=np.int64), (nv, 1))
    e = np.zeros(0, dtype=np.int64)
    return {
        "directed_hausdorff_sorted_1d": (x, y),
        "prefix_directed_table": (a, b, rows, cols),
        "cheeger_exhaustive": (adj,),
        "tree_ball_flags": (ip, nb, 2),
        "ball_girths": (cip, cnb, cwt, ceid, centers, 3.0, 1e-9),
        "correspondence_bnb": (mx.d.copy(), my.d.copy(), e, e, side, pt, cand, np.inf),
    }


def _time(fn, args, repeat):
    fn(*args)  # warm-up, includes JIT compilation
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    inputs = _inputs(np.random.default_rng(0))
    print(f"{'kernel':32s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, (nb_fn, np_fn) in kernels.IMPLEMENTATIONS.items():
        t_nb = _time(nb_fn, inputs[name], args.repeat)
        t_np = _time(np_fn, inputs[name], args.repeat)
        print(f"{name:32s} {1e3 * t_nb:10.3f} {1e3 * t_np:10.3f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
