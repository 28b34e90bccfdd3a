"""Time the numba kernels against the pure-numpy fallback.

Kernel-level timings call both backend modules directly in one process. The
end-to-end rows re-run a standardize + forest fit in subprocesses with
ROTEQ_BACKEND set, which is how the switch is meant to be used.

    python benchmarks/bench_kernels.py --n 20000 --repeat 5
"""

import argparse
import csv
import os
import subprocess
import sys
import time

import numpy as np

from roteq.kernels import _numba, _numpy, presort

END_TO_END = """
import time, numpy as np
from roteq.cases import generate
from roteq.pipeline import standardize_rows
from roteq import predictors
ds = generate("third_order", {n}, 0)
t0 = time.perf_counter()
xs, ys, _ = standardize_rows("third_order", ds.features, ds.labels)
t1 = time.perf_counter()
predictors.fit(xs[:2000], ys[:2000, :3], predictors.ForestConfig(n_estimators=10))
t2 = time.perf_counter()
print(t1 - t0, t2 - t1)
"""


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_cases(n, rng):
    sym = rng.standard_normal((n, 3, 3))
    sym = sym + sym.transpose(0, 2, 1)
    gen = rng.standard_normal((n, 3, 3))
    t4 = rng.standard_normal((n, 81))
    rots = np.linalg.qr(rng.standard_normal((n, 3, 3)))[0]
    x = rng.standard_normal((min(n, 5000), 28))
    y = rng.standard_normal(len(x))
    order = presort(x)
    member = np.ones(len(x), dtype=bool)
    return {
        "eig3_batch": lambda impl: impl.eig3_batch(sym),
        "qr3_batch": lambda impl: impl.qr3_batch(gen),
        "mode_rotate (order 4)": lambda impl: impl.mode_rotate(t4, rots, 4),
        "best_split_sorted": lambda impl: impl.best_split_sorted(x, y, order, member),
    }


def end_to_end(n):
    rows = {}
    for backend in ("numba", "numpy"):
        env = dict(os.environ, ROTEQ_BACKEND=backend)
        out = subprocess.run([sys.executable, "-c", END_TO_END.format(n=n)], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        rows[backend] = [float(v) for v in out]
    return [
        ("standardize_rows (third order)", rows["numba"][0], rows["numpy"][0]),
        ("forest fit, 10 trees x 3 outputs", rows["numba"][1], rows["numpy"][1]),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=20000, help="batch size for the 3x3 kernels")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--csv", help="also write the table here")
    parser.add_argument("--skip-end-to-end", action="store_true")
    args = parser.parse_args(argv)

    rng = np.random.default_rng(0)
    results = []
    for name, call in kernel_cases(args.n, rng).items():
        call(_numba)  # compile outside the timed region
        results.append((name, best_of(lambda: call(_numba), args.repeat),
                        best_of(lambda: call(_numpy), args.repeat)))
    if not args.skip_end_to_end:
        results += end_to_end(args.n)

    print(f"{'kernel':34s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for name, t_numba, t_numpy in results:
        print(f"{name:34s} {t_numba:10.4f} {t_numpy:10.4f} {t_numpy / t_numba:8.1f}x")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kernel", "numba_s", "numpy_s"])
            w.writerows(results)


if __name__ == "__main__":
    main()
