"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from unildpc import kernels
from unildpc.decoder import LEVEL_BOUNDS, MAX_LEVEL, PHI_TABLE, build_graph, channel_view, transmit
from unildpc.density import BIAWGN, BSC, DEFAULT_GRID, make_density
from unildpc.ensemble import UNIVERSAL_CODE
from unildpc.entropy import binary_entropy_inverse
from unildpc.evolution import grid_ops


def boxplus_case():
    ops = grid_ops(DEFAULT_GRID)
    mu = np.ascontiguousarray(make_density(BIAWGN(0.9)).magnitudes())
    return lambda mod: mod.boxplus_magnitudes(mu, mu, ops.corr, ops.near)


def decode_case(n=20_000, iters=30):
    g = build_graph(UNIVERSAL_CODE, n, seed=0)
    rng = np.random.default_rng(0)
    llr = transmit(channel_view(BSC(binary_entropy_inverse(1 - 0.645))), np.zeros(n, dtype=np.uint8), rng)

    def run(mod):
        bits = np.zeros(n, dtype=np.uint8)
        return mod.bp_decode(llr, g.chk_ptr, g.edge_var, g.var_ptr, g.var_edges, iters, MAX_LEVEL,
                             PHI_TABLE, LEVEL_BOUNDS, bits)

    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    found = kernels.backends()
    cases = {"boxplus (2047-bin grid)": boxplus_case(), "bp_decode (n=2e4, 30 iters)": decode_case()}
    print(f"{'kernel':30s} " + " ".join(f"{b:>12s}" for b in found) + "   speedup")
    for name, fn in cases.items():
        times = {}
        for b, mod in found.items():
            fn(mod)  # warm up
            times[b] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        row = " ".join(f"{times[b] * 1e3:10.2f}ms" for b in found)
        speed = f"{times['python'] / times['cython']:8.1f}x" if "cython" in times else "       -"
        print(f"{name:30s} {row} {speed}")


if __name__ == "__main__":
    main()
