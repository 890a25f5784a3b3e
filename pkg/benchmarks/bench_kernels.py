"""Time the compiled kernels against their pure-Python twins.

Run with ``python benchmarks/bench_kernels.py [--repeat R]``. Each kernel is
called with identical inputs under both backends; the table reports the best
of ``R`` wall-clock timings and the speedup.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from quniq import _pykernels as py

try:
    from quniq import _ckernels as ck
except ImportError:  # pragma: no cover
    ck = None


def workloads():
    rng = np.random.default_rng(0)
    pts = np.sort(rng.uniform(0, 1e4, 20_000))
    a, b = pts[0::2], pts[1::2]
    xi = np.linspace(-2000, 2000, 2**14)
    widths = np.concatenate((np.full(20, 0.01), 1.0 / np.arange(10, 200) ** 2))
    return {
        "moment_logs PowerExp n<=400": lambda k: k.moment_logs(py.POWER_EXP, 1.0, 0.5, 400),
        "moment_logs EndPoint n<=400": lambda k: k.moment_logs(py.END_POINT, 1.0, 1.0, 400),
        "greedy_starts 10k intervals": lambda k: k.greedy_starts(a, b, 0.0, 1e4, 0.7, 1e-12),
        "separated_points 10k intervals": lambda k: k.separated_points(a, b, 0.0, 1e4, 0.3),
        "sinc_product 16k x 210": lambda k: k.sinc_product(xi, widths),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    if ck is None:
        print("compiled extension not built; only the Python backend is available")
        return 1
    print(f"{'kernel':34s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn in workloads().items():
        t_py = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat)) * 1e3
        t_ck = min(timeit.repeat(lambda: fn(ck), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:34s} {t_py:12.2f} {t_ck:12.2f} {t_py / t_ck:8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
