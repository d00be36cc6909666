"""Benchmark the jet product kernel backends (numpy vs numba).

Run with:

    PHIFLUID_JET_BACKEND=numpy python benchmarks/jet_backends.py
    PHIFLUID_JET_BACKEND=numba python benchmarks/jet_backends.py

or leave the variable unset to benchmark whichever backend is selected
automatically. The workload multiplies batched truncated Taylor
polynomials of the sizes that dominate curvature assembly.
"""

import time

import numpy as np

from phifluid import kernels
from phifluid.jets import Jet, jet_space


def bench(m, order, batch, repeats=200):
    space = jet_space(m, order)
    rng = np.random.default_rng(0)
    a = Jet(space, rng.normal(size=(space.n, batch)), order)
    b = Jet(space, rng.normal(size=(space.n, batch)), order)
    a * b  # warm-up (compilation for the numba path)
    start = time.perf_counter()
    for _ in range(repeats):
        a * b
    elapsed = (time.perf_counter() - start) / repeats
    n_terms = space.n * batch
    return elapsed, n_terms / elapsed


def main():
    print(f"backend: {kernels.BACKEND}")
    print(f"{'dim':>4} {'order':>6} {'batch':>6} {'us/mul':>10} "
          f"{'coeff/s':>12}")
    for m, order, batch in [(3, 3, 16), (3, 4, 64), (3, 6, 64),
                            (4, 4, 64), (5, 4, 256)]:
        elapsed, rate = bench(m, order, batch)
        print(f"{m:>4} {order:>6} {batch:>6} {elapsed * 1e6:>10.1f} "
              f"{rate:>12.3e}")


if __name__ == "__main__":
    main()
