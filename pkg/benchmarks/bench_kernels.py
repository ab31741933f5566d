"""Time the brute-force sweep kernel on the numba and numpy backends.

    python benchmarks/bench_kernels.py --rows 200000 --repeat 5

The first numba call includes JIT compilation (or a cache load) and is
reported separately. Both backends must agree to 1e-12 relative.
"""

import argparse
import time

import numpy as np

from alphadiv import _kernels as K


def candidates(rows, size, radius, seed):
    rng = np.random.default_rng(seed)
    u = np.sort(rng.uniform(-radius, radius, size=(rows, size)), axis=1)
    if size == 3:
        return u, None, None
    return u, rng.integers(0, 4, rows), rng.integers(0, 4, rows)


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    spec = (1.0, 1.0, 0.0, 1.0)  # m_P, V_P, m_Q, V_Q
    print(f"threads={K.configure_threads()}  rows={args.rows}  alpha={args.alpha}")
    print(f"{'support':>8} {'numpy [s]':>11} {'numba [s]':>11} {'speedup':>8} {'first call [s]':>15}")
    for size in (3, 4):
        u, op, oq = candidates(args.rows, size, 6.0, args.seed)

        def run(backend):
            return K.sweep(u, op, oq, *spec, args.alpha, backend=backend)

        if not K.NUMBA_AVAILABLE:
            t_np = best_time(lambda: run("numpy"), args.repeat)
            print(f"{size:>8} {t_np:>11.4f} {'n/a':>11}")
            continue
        t0 = time.perf_counter()
        v_nb, f_nb = run("numba")
        first = time.perf_counter() - t0
        v_np, f_np = run("numpy")
        assert np.array_equal(f_nb, f_np), "feasibility masks differ"
        m = f_np & np.isfinite(v_np)
        rel = np.abs(v_nb[m] - v_np[m]) / np.maximum(np.abs(v_np[m]), 1e-300)
        assert rel.max(initial=0.0) < 1e-12, f"backends disagree: {rel.max()}"
        t_np = best_time(lambda: run("numpy"), args.repeat)
        t_nb = best_time(lambda: run("numba"), args.repeat)
        print(f"{size:>8} {t_np:>11.4f} {t_nb:>11.4f} {t_np / t_nb:>7.1f}x {first:>15.3f}")


if __name__ == "__main__":
    main()
