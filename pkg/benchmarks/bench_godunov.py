"""Time the compiled Burgers kernel against the numpy fallback.

Usage: python3 benchmarks/bench_godunov.py [--cells 400 1600 6400] [--steps 2000]
"""

import argparse
import sys
import timeit

import numpy as np

from roughscl import kernels
from roughscl.solver import burgers


def bench(n_cells, n_steps, backend, repeats):
    flux = burgers()
    x = np.linspace(-10, 10, n_cells)
    u = -np.tanh(x / 0.5)
    ratio = 0.4
    timer = timeit.Timer(lambda: kernels.advance(u, ratio, n_steps, flux, backend=backend))
    return min(timer.repeat(repeat=repeats, number=1))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cells", type=int, nargs="+", default=[400, 1600, 6400])
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args(argv)
    if not kernels.HAVE_COMPILED:
        print("compiled kernel not built; only the python backend is available", file=sys.stderr)
    print(f"{'cells':>7} {'python [s]':>11} {'compiled [s]':>13} {'speedup':>8}")
    for n in args.cells:
        t_py = bench(n, args.steps, "python", args.repeats)
        if kernels.HAVE_COMPILED:
            t_c = bench(n, args.steps, "compiled", args.repeats)
            print(f"{n:7d} {t_py:11.4f} {t_c:13.4f} {t_py / t_c:8.1f}")
        else:
            print(f"{n:7d} {t_py:11.4f} {'-':>13} {'-':>8}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
