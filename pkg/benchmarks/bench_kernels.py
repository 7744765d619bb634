"""Timing comparison of the DP kernel backends.

Runs the full and banded DTW/Frechet sweeps on random 3-D paths through
every importable backend (compiled extension and numpy fallback) and
prints a per-case table with the speedup relative to the fallback. Full
sweeps are skipped above ``--full-limit`` points, where the fallback
becomes impractically slow.

Usage:
    python3 benchmarks/bench_kernels.py --sizes 200,500,1000 --repeats 3
"""

import argparse
import time

import numpy as np

from pdrnav._kernels import backends


def random_path(n, seed):
    rng = np.random.default_rng(seed)
    return np.cumsum(rng.normal(0.0, 0.1, (n, 3)), axis=0)


def time_call(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="200,500,1000,2000",
                        help="comma-separated path lengths")
    parser.add_argument("--band-frac", type=float, default=0.1,
                        help="band half-width as a fraction of the path length")
    parser.add_argument("--full-limit", type=int, default=600,
                        help="largest size to run un-banded")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing repeats; the best run is reported")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    impls = backends()
    if "compiled" not in impls:
        print("note: compiled extension not available; timing the fallback only")

    header = f"{'case':<22}{'n':>6}" + "".join(f"{name:>14}" for name in impls) + f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        a = random_path(n, args.seed)
        b = random_path(n, args.seed + 1)
        band = max(1, int(np.ceil(args.band_frac * n)))
        cases = [
            (f"dtw banded w={band}", "dtw_banded", (a, b, band)),
            (f"frechet banded w={band}", "frechet_banded", (a, b, band)),
        ]
        if n <= args.full_limit:
            cases += [("dtw full", "dtw_full", (a, b)),
                      ("frechet full", "frechet_full", (a, b))]
        for label, fn_name, fn_args in cases:
            times = {}
            tables = {}
            for name, mod in impls.items():
                times[name], tables[name] = time_call(
                    lambda m=mod: getattr(m, fn_name)(*fn_args), args.repeats)
            if len(tables) == 2:
                t_py, t_c = tables["python"], tables["compiled"]
                if not np.array_equal(np.asarray(t_py), np.asarray(t_c)):
                    raise SystemExit(f"backend mismatch in {label} at n={n}")
            row = f"{label:<22}{n:>6}"
            for name in impls:
                row += f"{times[name] * 1e3:>12.2f}ms"
            if len(times) == 2:
                row += f"{times['python'] / times['compiled']:>9.1f}x"
            print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
