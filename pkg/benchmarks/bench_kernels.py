"""Benchmark the compiled kernel core against the pure-numpy fallback.

Usage:
    python benchmarks/bench_kernels.py [--sizes 4096,16384] [--repeat 50]

The pointwise kernels are the hot inner stage of the RHS assembly between
FFTs; this compares both backends on identical inputs and then times a full
RHS evaluation with whichever backend the package selected at import
(re-run with BWM_PURE_PYTHON=1 to get the fallback end-to-end numbers).
"""

import argparse
import time

import numpy as np

from biwave import _kernels_py
from biwave import kernels as selected

try:
    from biwave import _kernels as compiled
except ImportError:
    compiled = None


def timeit(fn, repeat):
    fn()  # warm up
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n, repeat, rng):
    L = 3
    u = rng.standard_normal((n, L))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    u = np.ascontiguousarray(u)
    v = np.ascontiguousarray(rng.standard_normal((n, L)))
    dP = np.ascontiguousarray(rng.standard_normal((n, L, L, L)))
    theta = rng.uniform(0, 2 * np.pi, n)
    phi = rng.uniform(0, 2 * np.pi, n)
    rad = 2.0 + 0.5 * np.cos(phi)
    pts = np.ascontiguousarray(
        np.stack([rad * np.cos(theta), rad * np.sin(theta), 0.5 * np.sin(phi)], axis=-1)
    )

    cases = [
        ("dot_rows", lambda m: m.dot_rows(u, v)),
        ("normalize_rows", lambda m: m.normalize_rows(v)),
        ("sphere_tangent_rows", lambda m: m.sphere_tangent_rows(u, v)),
        ("sphere_projector_rows", lambda m: m.sphere_projector_rows(u)),
        ("jet_apply_rows", lambda m: m.jet_apply_rows(dP, u, v)),
        ("torus_projector_rows", lambda m: m.torus_projector_rows(pts, 2.0, 0.5)),
    ]
    print(f"\n== pointwise kernels, {n} grid points, L = {L} ==")
    print(f"{'kernel':<24}{'numpy':>12}{'cython':>12}{'speedup':>10}")
    for name, call in cases:
        t_py = timeit(lambda: call(_kernels_py), repeat)
        if compiled is None:
            print(f"{name:<24}{t_py * 1e6:>10.1f}us{'-':>12}{'-':>10}")
            continue
        t_cy = timeit(lambda: call(compiled), repeat)
        check_py, check_cy = call(_kernels_py), call(compiled)
        assert np.allclose(check_py, check_cy, atol=1e-12)
        print(f"{name:<24}{t_py * 1e6:>10.1f}us{t_cy * 1e6:>10.1f}us{t_py / t_cy:>9.2f}x")


def bench_rhs(repeat):
    from biwave.dynamics import rhs_projector, rhs_sphere
    from biwave.geometry import Sphere
    from biwave.initial import random_bandlimited_state
    from biwave.grid import Grid

    m = Sphere(3)
    g = Grid(2, 64)
    s = random_bandlimited_state(g, m, 4, 1.0, seed=1)
    backend = "cython" if selected.USING_COMPILED else "numpy"
    t_s = timeit(lambda: rhs_sphere(s), repeat)
    t_p = timeit(lambda: rhs_projector(m, s), repeat)
    print(f"\n== full RHS, 64x64 grid, sphere target (backend: {backend}) ==")
    print(f"sphere fast path : {t_s * 1e3:8.2f} ms")
    print(f"projector path   : {t_p * 1e3:8.2f} ms")
    print("(re-run with BWM_PURE_PYTHON=1 for the fallback end-to-end numbers)")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="4096,16384")
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    if compiled is None:
        print("compiled extension not available; showing numpy timings only")
    for n in (int(s) for s in args.sizes.split(",")):
        bench_kernels(n, args.repeat, rng)
    bench_rhs(max(args.repeat // 5, 3))


if __name__ == "__main__":
    main()
