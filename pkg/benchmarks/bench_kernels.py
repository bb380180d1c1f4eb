"""Time the compiled and NumPy prox kernels on the same inputs.

Usage::

    python3 benchmarks/bench_kernels.py [--size 689] [--repeat 200] [--solve]

Each kernel is timed with ``timeit`` (best of five runs of ``--repeat``
calls) and checked for agreement between the backends. ``--solve`` also
times a full OCE solve with exponential utility on the bundled sample under
each backend, running each in a subprocess so the backend is chosen at import.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from pdportfolio.kernels import backends

SOLVE_SNIPPET = """
import time
from pdportfolio import BACKEND, dataio
from pdportfolio.portfolio import PortfolioProblem, solve_portfolio
from pdportfolio.utility import exponential
R = dataio.prices_to_returns(dataio.load_prices_csv(dataio.sample_path()))
start = time.perf_counter()
res = solve_portfolio(PortfolioProblem(R, 0.7, exponential()))
print(BACKEND, res.iterations, time.perf_counter() - start)
"""


def kernel_calls(mod, t, x0):
    return {
        "piecewise_linear": lambda: mod.prox_piecewise_linear(t, 0.3, 0.0, -20.0),
        "halfline": lambda: mod.prox_halfline(t),
        "quadratic": lambda: mod.prox_quadratic(t, 0.3, 1.0),
        "logarithmic": lambda: mod.prox_logarithmic(t, 0.3, 5.0),
        "exponential (cold)": lambda: mod.prox_exponential(t, 0.3, t, 5, 1e-9),
        "exponential (warm)": lambda: mod.prox_exponential(t, 0.3, x0, 5, 1e-9),
    }


def time_kernels(size, repeat, seed=0):
    rng = np.random.default_rng(seed)
    t = np.ascontiguousarray(rng.normal(0.0, 2.0, size))
    mods = backends()
    x0 = mods["python"].prox_exponential(t, 0.3, t, 5, 1e-9)
    rows = []
    calls = {name: kernel_calls(mod, t, x0) for name, mod in mods.items()}
    for kernel in calls["python"]:
        row = {"kernel": kernel}
        for name, table in calls.items():
            best = min(timeit.repeat(table[kernel], number=repeat, repeat=5))
            row[name] = best / repeat * 1e6
        if "cython" in calls:
            row["max_diff"] = float(np.max(np.abs(np.asarray(calls["cython"][kernel]())
                                                  - np.asarray(calls["python"][kernel]()))))
        rows.append(row)
    return rows, sorted(mods)


def time_solves():
    out = {}
    for pure in ("1", "0"):
        env = dict(os.environ, PDPORTFOLIO_PURE_PYTHON=pure)
        res = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET], env=env, capture_output=True, text=True,
                             check=True)
        backend, iters, secs = res.stdout.split()
        out[backend] = (int(iters), float(secs))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=689, help="vector length (default: sample |Omega|)")
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--solve", action="store_true", help="also time a full solve per backend")
    args = ap.parse_args(argv)

    rows, names = time_kernels(args.size, args.repeat)
    header = f"{'kernel':<20}" + "".join(f"{n + ' [us]':>14}" for n in names)
    if "cython" in names:
        header += f"{'speedup':>10}{'max diff':>12}"
    print(f"n = {args.size}, best of 5 x {args.repeat} calls")
    print(header)
    for r in rows:
        line = f"{r['kernel']:<20}" + "".join(f"{r[n]:>14.2f}" for n in names)
        if "cython" in names:
            line += f"{r['python'] / r['cython']:>10.1f}{r['max_diff']:>12.1e}"
        print(line)
    if "cython" not in names:
        print("compiled backend not built; only the NumPy kernels were timed")

    if args.solve:
        for backend, (iters, secs) in time_solves().items():
            print(f"full solve ({backend}): {iters} iterations in {secs:.2f} s")


if __name__ == "__main__":
    main()
