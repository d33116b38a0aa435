"""Compare the compiled and numpy kernel backends.

Times the Laplacian and Hessian kernels on a few grid shapes, and one full
solve per backend. Run from the repository root:

    python benchmarks/bench_kernels.py [--repeat N] [--threads T]
"""
import argparse
import sys
import time

import numpy as np

from gkw import _kernels
from gkw._kernels import _pykernels
from gkw.grid import make_grid
from gkw.solver import solve

sys.path.insert(0, "tests")
from helpers import interior_problem  # noqa: E402

SHAPES = [((64, 64, 1), 2), ((256, 256, 1), 2), ((512, 512, 1), 3), ((48, 48, 48), 3)]


def median_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def bench_kernels(repeat, threads):
    from gkw._kernels import _ckernels

    rows = []
    for shape, r in SHAPES:
        rng = np.random.default_rng(0)
        d = r + 1
        f = rng.standard_normal(shape + (r,))
        inv_h2 = np.array([float(n) ** 2 if n > 1 else 0.0 for n in shape])
        coef = rng.uniform(0, 2, size=(int(np.prod(shape)), d))
        Q = rng.integers(-2, 3, size=(d, r)).astype(float)
        for name, fn_py, fn_c in [
            ("laplacian", lambda: _pykernels.laplacian(f, inv_h2), lambda: _ckernels.laplacian(f, inv_h2, threads)),
            ("hessian", lambda: _pykernels.hessian(f, inv_h2, coef, Q),
             lambda: _ckernels.hessian(f, inv_h2, coef, Q, threads)),
        ]:
            tp, tc = median_time(fn_py, repeat), median_time(fn_c, repeat)
            rows.append((name, "x".join(str(n) for n in shape if n > 1), r, tp, tc))
    print(f"{'kernel':<10} {'grid':>10} {'r':>2} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for name, grid, r, tp, tc in rows:
        print(f"{name:<10} {grid:>10} {r:>2} {1e3 * tp:>10.3f} {1e3 * tc:>10.3f} {tp / tc:>8.2f}")


def bench_solve(repeat):
    g = make_grid([128, 128])
    p = interior_problem(g, np.random.default_rng(3))
    prev = _kernels.get_backend()
    times = {b: [] for b in _kernels.available_backends()}
    try:
        # Interleave backends so that machine load drift hits both alike.
        for _ in range(repeat):
            for backend, ts in times.items():
                _kernels.set_backend(backend)
                ts.append(median_time(lambda: solve(p), 1))
    finally:
        _kernels.set_backend(prev)
    results = {b: float(np.median(ts)) for b, ts in times.items()}
    print()
    print("full solve on 128^2:", ", ".join(f"{k} {v:.3f} s" for k, v in sorted(results.items())))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=15)
    ap.add_argument("--threads", type=int, default=1, help="OpenMP threads for the compiled kernels")
    args = ap.parse_args(argv)
    if "cython" not in _kernels.available_backends():
        print("compiled kernels are not built; nothing to compare")
        return 1
    bench_kernels(args.repeat, args.threads)
    bench_solve(max(1, args.repeat // 5))
    return 0


if __name__ == "__main__":
    sys.exit(main())
