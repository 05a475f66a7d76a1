"""Compare the numba and numpy Grassmann product kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--holonomy]

Kernel timings use random float operands; ``--holonomy`` also times one
holonomy variation study end to end under each backend.
"""

import argparse
import os
import timeit

import numpy as np

from algebroidkit import _kernels


def operands(rng, ngen, nterms, size):
    ma = np.unique(rng.integers(0, 1 << ngen, size=nterms)).astype(np.int64)
    mb = np.unique(rng.integers(0, 1 << ngen, size=nterms)).astype(np.int64)
    A = rng.normal(size=(len(ma), size, size))
    B = rng.normal(size=(len(mb), size, size))
    odd = (1 << ngen) - 1
    bodd = np.bitwise_count((mb & odd).astype(np.uint64)) % 2 == 1
    return ma, A, -A, mb, B, bodd, odd


def bench_kernels(repeat):
    rng = np.random.default_rng(0)
    _kernels.mul_numba(*operands(rng, 4, 4, 2))  # compile or load the cache
    print(f"{'generators':>10} {'terms':>6} {'matrix':>6} {'numpy us':>10} {'numba us':>10} {'speedup':>8}")
    for ngen, nterms, size in [(4, 4, 1), (8, 16, 3), (12, 64, 3), (12, 256, 4), (16, 512, 6)]:
        args = operands(rng, ngen, nterms, size)
        m1, c1 = _kernels.mul_numpy(*args)
        m2, c2 = _kernels.mul_numba(*args)
        assert np.array_equal(m1, m2) and np.allclose(c1, c2)
        times = {}
        for name, fn in (("numpy", _kernels.mul_numpy), ("numba", _kernels.mul_numba)):
            t = timeit.Timer(lambda fn=fn: fn(*args))
            n, _ = t.autorange()
            times[name] = min(t.repeat(repeat, n)) / n * 1e6
        print(f"{ngen:>10} {nterms:>6} {size:>6} {times['numpy']:>10.1f} {times['numba']:>10.1f} "
              f"{times['numpy'] / times['numba']:>8.2f}")


def bench_holonomy():
    from importlib.resources import files

    from algebroidkit.boundary.holonomy import delta_str_holonomy
    from algebroidkit.io import load_scenario

    sc = load_scenario(files("algebroidkit") / "examples" / "super_plane_perturbed.scenario.json")
    for backend in ("numpy", "numba"):
        os.environ["ALGEBROIDKIT_BACKEND"] = backend
        t = timeit.timeit(lambda: delta_str_holonomy(sc.couplings[0], sc.config, 64), number=1)
        print(f"holonomy variation, N = 64, {backend}: {t:.2f} s")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--holonomy", action="store_true", help="also time an end-to-end holonomy study")
    args = p.parse_args()
    bench_kernels(args.repeat)
    if args.holonomy:
        bench_holonomy()


if __name__ == "__main__":
    main()
