"""Compare the compiled and numpy field kernels on the 20x20 design array.

    python benchmarks/bench_fieldkernel.py [--points N] [--repeat K] [--threads T ...]

Reports the best wall time per backend and checks that both return the same
B and Jacobian.
"""
import argparse
import time

import numpy as np

from coiltrap.design import microcoil_array
from coiltrap.fieldcore import backend, field_grid


def sample_points(n, seed=0):
    rng = np.random.default_rng(seed)
    pts = rng.uniform([-30e-6, -30e-6, 0.5e-6], [30e-6, 30e-6, 10e-6], size=(n, 3))
    return pts


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--threads", type=int, nargs="+", default=[1, 4])
    args = p.parse_args(argv)

    layout = microcoil_array()
    pts = sample_points(args.points)
    work = args.points * len(layout.coils)
    print(f"{args.points} points x {len(layout.coils)} coils")

    py_t, (Bp, Jp) = best_time(lambda: field_grid(layout, pts, backend_name="python"), args.repeat)
    print(f"  python             {py_t:8.3f} s  {work / py_t / 1e6:7.2f} Mpair/s")
    if "compiled" not in backend.available():
        print("  compiled kernel not built")
        return
    for t in args.threads:
        c_t, (Bc, Jc) = best_time(lambda: field_grid(layout, pts, backend_name="compiled", threads=t),
                                  args.repeat)
        same = np.array_equal(Bc, Bp) and np.array_equal(Jc, Jp)
        dB = np.abs(Bc - Bp).max() / np.abs(Bp).max()
        print(f"  compiled ({t} thr)   {c_t:8.3f} s  {work / c_t / 1e6:7.2f} Mpair/s  "
              f"x{py_t / c_t:5.1f}  {'bitwise equal' if same else f'max rel dB {dB:.2g}'}")


if __name__ == "__main__":
    main()
