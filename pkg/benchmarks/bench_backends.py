"""Compare the compiled kernels with the NumPy fallback.

Times the full forward pass and each kernel on seeded random clouds and
writes one CSV row per (backend, stage, n).

    python3 benchmarks/bench_backends.py --sizes 256 512 1024 --reps 5 --out bench.csv
"""

import argparse
import csv
import statistics
import sys
import time

import numpy as np

from apml import apml_forward, apml_gradient, kernels


def _time(fn, reps):
    fn()
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(1e3 * (time.perf_counter() - t0))
    return statistics.median(times), statistics.pstdev(times)


def _stages(x, y):
    C = kernels.pairwise_distances(x, y, False)
    P = 0.5 * (kernels.adaptive_softmax_rows(C, 0.8, 1e-6, 1e-5)[0]
               + kernels.adaptive_softmax_cols(C, 0.8, 1e-6, 1e-5)[0])
    return {
        "distances": lambda: kernels.pairwise_distances(x, y, False),
        "softmax_rows": lambda: kernels.adaptive_softmax_rows(C, 0.8, 1e-6, 1e-5),
        "softmax_cols": lambda: kernels.adaptive_softmax_cols(C, 0.8, 1e-6, 1e-5),
        "sinkhorn": lambda: kernels.sinkhorn(P, 10, 1e-8, False),
        "forward": lambda: apml_forward(x, y),
        "gradient": lambda: apml_gradient(x, y),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[256, 512, 1024])
    parser.add_argument("--reps", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dtype", choices=["float64", "float32"], default="float64")
    parser.add_argument("--out", help="CSV path (default: stdout)")
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    clouds = {n: (rng.random((n, 3)).astype(args.dtype), rng.random((n, 3)).astype(args.dtype))
              for n in args.sizes}
    rows = []
    for backend in kernels.available_backends():
        with kernels.use_backend(backend):
            for n, (x, y) in clouds.items():
                for stage, fn in _stages(x, y).items():
                    median, std = _time(fn, args.reps)
                    rows.append((backend, stage, n, median, std))

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["backend", "stage", "n", "median_ms", "std_ms"])
        for backend, stage, n, median, std in rows:
            w.writerow([backend, stage, n, f"{median:.4f}", f"{std:.4f}"])
    finally:
        if fh is not sys.stdout:
            fh.close()

    if len(kernels.available_backends()) > 1:
        by_key = {(b, s, n): m for b, s, n, m, _ in rows}
        for n in args.sizes:
            speedup = by_key[("python", "forward", n)] / by_key[("compiled", "forward", n)]
            print(f"n={n}: compiled forward is {speedup:.2f}x the python backend", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
