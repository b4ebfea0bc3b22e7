"""Time the compiled core against the NumPy fallback on the hot kernels.

    python benchmarks/bench_backends.py [--repeat 5] [--seed 0]

Each case checks that both backends agree before reporting timings.
"""
import argparse
import sys
import timeit

import numpy as np

from rkhsbuild import _fallback

try:
    from rkhsbuild import _core
except ImportError:
    _core = None


def cases(rng):
    X = np.sort(rng.uniform(-2.0, 2.0, size=(2000, 1)), axis=0)
    P = rng.uniform(0.0, 5.0, size=(1000, 1))
    K = _fallback.cross_gram(_fallback.BROWNIAN_MIN, P, P, 0.0)
    n = 1 << 14
    f = rng.normal(size=n)
    w = 1.0 / (1.0 + np.arange(n)) ** 0.5
    return [
        ("bessel gram 2000x2000", "cross_gram", (_fallback.BESSEL_SERIES, X, X, 60.0)),
        ("rbf gram 2000x2000", "cross_gram", (_fallback.GAUSS_RBF, X, X, 1.0)),
        ("pivoted cholesky n=1000", "pivoted_cholesky", (K, 1e-11)),
        ("toeplitz quadratic n=16384", "toeplitz_quadratic", (f, w)),
    ]


def _close(a, b):
    if isinstance(a, tuple):
        return all(_close(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return a.shape == b.shape and np.allclose(a, b, rtol=1e-9, atol=1e-12)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    if _core is None:
        print("compiled core not built; run `pip install -e . --no-build-isolation` first", file=sys.stderr)
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'case':<28} {'fallback [ms]':>14} {'core [ms]':>10} {'speedup':>8}")
    for name, fn, fargs in cases(rng):
        slow, fast = getattr(_fallback, fn), getattr(_core, fn)
        if not _close(slow(*fargs), fast(*fargs)):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        t_slow = min(timeit.repeat(lambda: slow(*fargs), number=1, repeat=args.repeat))
        t_fast = min(timeit.repeat(lambda: fast(*fargs), number=1, repeat=args.repeat))
        print(f"{name:<28} {1e3 * t_slow:>14.2f} {1e3 * t_fast:>10.2f} {t_slow / t_fast:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
