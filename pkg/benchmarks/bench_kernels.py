"""Timing of the compiled kernels against their numpy fallbacks.

Run ``python benchmarks/bench_kernels.py`` from the repository root.  Each
kernel is timed on a representative workload and the two backends are
checked to agree before timings are reported.
"""

import argparse
import time

import numpy as np

from iftrkit import _kernels_py

try:
    from iftrkit import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def _best_of(func, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = func()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads(rng):
    r = np.linspace(0.0, 3.0, 400)
    s = np.sort(rng.uniform(0.0, 3.0, 20000))
    w = rng.uniform(size=s.size)
    w /= w.sum()
    y = np.linspace(0.0, 400.0, 2000)
    f = rng.uniform(size=(400, 4))
    pts = rng.uniform(0.0, 20.0, 200000)
    pw = rng.uniform(size=pts.size)
    return {
        "rician_mixture": lambda k: k.rician_mixture(r, s, w, 0.01),
        "kummer_profile": lambda k: k.kummer_profile(5.3, y),
        "nondominated_ranks": lambda k: k.nondominated_ranks(f),
        "bin_lagrange": lambda k: k.bin_lagrange(pts, pw, 0.05, 10),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    if _compiled is None:
        print("compiled extension not built; run `python setup.py build_ext --inplace`")
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<20s} {'compiled [ms]':>14s} {'numpy [ms]':>12s} {'speedup':>8s} {'max diff':>10s}")
    for name, call in workloads(rng).items():
        tc, oc = _best_of(lambda: call(_compiled), args.repeat)
        tp, op = _best_of(lambda: call(_kernels_py), args.repeat)
        diff = float(np.max(np.abs(np.asarray(oc, dtype=float) - np.asarray(op, dtype=float))))
        print(f"{name:<20s} {1e3 * tc:14.3f} {1e3 * tp:12.3f} {tp / tc:8.1f} {diff:10.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
