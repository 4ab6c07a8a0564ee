"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel runs on identical inputs under both backends; the script prints
best-of-N wall times, the speedup, and the max output difference.
"""
import argparse
import timeit

import numpy as np

from threewave import kernels


def _cases(rng):
    u = rng.uniform(-20, 20, 200_000)
    n = 200
    diag = np.zeros(n)
    off_sq = rng.uniform(0.5, 2.0, n - 1)
    bound = 2 * np.sqrt(off_sq.max()) + 1
    y0 = np.array([0.5, 0.1, 0.7, -0.2, 0.3, 0.4])
    t_out = np.linspace(0, 200, 2001)
    return {
        "sncndn (2e5 points)": lambda b: b.sncndn(u, 0.7),
        "sturm_count (n=200, 200 shifts)": lambda b: [b.sturm_count(diag, off_sq, lam)
                                                      for lam in np.linspace(-bound, bound, 200)],
        "bisect_eigenvalues (n=200)": lambda b: b.bisect_eigenvalues(diag, off_sq, -bound, bound),
        "threewave_dopri5 (t=200)": lambda b: b.threewave_dopri5(2.0, 1.0, 1.0, 1.0, y0, 0.0, 200.0,
                                                                 t_out, 1e-10, 1e-12)[1],
    }


def _flatten(out):
    if isinstance(out, tuple):
        return np.concatenate([np.ravel(o) for o in out])
    return np.ravel(np.asarray(out, dtype=float))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.compiled_backend is None:
        raise SystemExit("compiled backend unavailable; build with pip install -e . --no-build-isolation")
    backends = {"python": kernels.python_backend, "cython": kernels.compiled_backend}
    print(f"{'kernel':34s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, fn in _cases(np.random.default_rng(0)).items():
        times, outs = {}, {}
        for key, b in backends.items():
            outs[key] = _flatten(fn(b))
            times[key] = min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat))
        diff = float(np.max(np.abs(outs["python"] - outs["cython"])))
        print(f"{name:34s} {times['python']:11.4f} {times['cython']:11.4f} "
              f"{times['python'] / times['cython']:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
