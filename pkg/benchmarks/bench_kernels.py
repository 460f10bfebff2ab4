"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so the choice made by projlim.kernels
does not matter here. Outputs are also compared for exact equality.
"""
import argparse
import timeit

import numpy as np

from projlim import _pykernels as py

try:
    from projlim import _ckernels as cy
except ImportError:
    cy = None


def cases(rng):
    x = rng.dirichlet(np.ones(64), size=20_000)
    labels = np.repeat(np.arange(16), 4)
    v = rng.beta(1.0, 5.0, size=(500, 2000))
    cells = rng.integers(0, 16, size=(500, 2001))
    n = 1_000_000
    mu, lam = rng.uniform(0.1, 3, n), rng.uniform(0.1, 3, n)
    nu, u = rng.normal(size=n), rng.random(n)
    a, b = np.sort(rng.normal(size=200_000)), np.sort(rng.normal(size=200_000))
    return {
        "block_sum 20000x64 -> 16": ("block_sum", (x, labels, 16)),
        "stick_aggregate 500x2000": ("stick_aggregate", (v, cells, 16)),
        "ig_two_root 1e6": ("ig_two_root", (mu, lam, nu, u)),
        "ks_statistic 2x2e5": ("ks_statistic", (a, b)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if cy is None:
        raise SystemExit("compiled kernels are not built; run pip install -e . --no-build-isolation")
    print(f"{'kernel':<28}{'numpy ms':>10}{'cython ms':>11}{'speedup':>9}  identical")
    for name, (fn, a) in cases(np.random.default_rng(0)).items():
        f_py, f_cy = getattr(py, fn), getattr(cy, fn)
        t_py = min(timeit.repeat(lambda: f_py(*a), number=1, repeat=args.repeat)) * 1e3
        t_cy = min(timeit.repeat(lambda: f_cy(*a), number=1, repeat=args.repeat)) * 1e3
        same = np.array_equal(np.asarray(f_py(*a)), np.asarray(f_cy(*a)))
        print(f"{name:<28}{t_py:>10.2f}{t_cy:>11.2f}{t_py / t_cy:>8.1f}x  {same}")


if __name__ == "__main__":
    main()
