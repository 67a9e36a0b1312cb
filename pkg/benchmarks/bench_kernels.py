"""
Compare the numba and numpy backends of the Monte-Carlo kernels.

    python benchmarks/bench_kernels.py [--paths 200000] [--repeat 5]

Reports the best wall time of each backend (numba timed after a warm-up
call, so compilation is excluded) and the largest absolute difference
between their outputs.
"""

import argparse
import time

import numpy as np

from hw2f import DiscountCurve, Hw2fParams, SwapSpec, TerminalCovariance, kernels
from hw2f.curve import b_factor, log_a_factor


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def swap_inputs(n_paths):
    curve = DiscountCurve.flat(0.02)
    params = Hw2fParams(0.1, 0.01, TerminalCovariance.from_vol_ratio(10.0, 0.02, 0.3, -0.5), 20.0)
    specs = [SwapSpec(10.0, 12.0), SwapSpec(10.0, 20.0)]
    grid = np.unique(np.concatenate([[10.0, 20.0]] + [s.payment_dates for s in specs]))
    index = {round(t, 9): i for i, t in enumerate(grid)}
    pay = [[index[round(d, 9)] for d in s.payment_dates] for s in specs]
    pay_ptr = np.array([0] + list(np.cumsum([len(p) for p in pay])), dtype=np.int64)
    pay_idx = np.array([i for p in pay for i in p], dtype=np.int64)
    start_idx = np.array([index[10.0]] * len(specs), dtype=np.int64)
    z = kernels.normal_pairs_numpy(kernels._stream_key(1), n_paths)
    x1, x2 = 0.02 * z[:, 0], 0.006 * z[:, 1]
    return (
        x1, x2,
        np.asarray(log_a_factor(curve, params, 10.0, grid)),
        np.asarray(b_factor(params.a1, 10.0, grid)),
        np.asarray(b_factor(params.a2, 10.0, grid)),
        start_idx, pay_ptr, pay_idx, np.array([s.delta for s in specs]),
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--paths", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if not kernels.HAVE_NUMBA:
        print("numba unavailable (or disabled); nothing to compare")
        return

    key = kernels._stream_key(1)
    args_swap = swap_inputs(args.paths)
    cases = [
        ("normal_pairs", lambda: kernels.normal_pairs_numpy(key, args.paths),
         lambda: kernels.normal_pairs_numba(key, args.paths)),
        ("swap_legs", lambda: kernels.swap_legs_numpy(*args_swap),
         lambda: kernels.swap_legs_numba(*args_swap)),
    ]
    print(f"paths={args.paths} repeat={args.repeat}")
    print(f"{'kernel':<14}{'numpy [s]':>12}{'numba [s]':>12}{'speed-up':>10}{'max |diff|':>13}")
    for name, f_np, f_nb in cases:
        out_np, out_nb = f_np(), f_nb()  # warm-up and compile
        if isinstance(out_np, tuple):
            diff = max(float(np.max(np.abs(a - b))) for a, b in zip(out_np, out_nb))
        else:
            diff = float(np.max(np.abs(out_np - out_nb)))
        t_np = best_of(f_np, args.repeat)
        t_nb = best_of(f_nb, args.repeat)
        print(f"{name:<14}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}{diff:>13.2e}")


if __name__ == "__main__":
    main()
