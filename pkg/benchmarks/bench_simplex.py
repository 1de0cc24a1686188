"""Dense simplex: numba kernels against the numpy fallback.

    python3 benchmarks/bench_simplex.py --sizes 40x80 80x160 120x240 --repeat 3

Both paths follow the same pivot sequence, so the iteration counts printed
side by side must agree; only the wall time should differ.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from losrcert._accel import NUMBA_ENABLED
from losrcert.lpsolve.simplex import BLAND, DANTZIG, solve_dense


def random_feasible(m: int, n: int, seed: int):
    rng = np.random.default_rng(seed)
    A = rng.integers(-3, 4, size=(m, n)).astype(float)
    x = rng.random(n) * (rng.random(n) < 0.5)
    return A, A @ x


def bench(m, n, repeat, rule):
    A, b = random_feasible(m, n, seed=m * 1000 + n)
    out = {}
    for use in (True, False):
        if use and not NUMBA_ENABLED:
            continue
        solve_dense(A[:5, :10], b[:5], rule=rule, use_numba=use)  # warm-up / compile
        best = np.inf
        for _ in range(repeat):
            t0 = time.perf_counter()
            res = solve_dense(A, b, rule=rule, use_numba=use)
            best = min(best, time.perf_counter() - t0)
        out["numba" if use else "numpy"] = (best, res.iterations, res.status)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", nargs="+", default=["40x80", "80x160", "120x240"])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--rule", choices=("bland", "dantzig"), default="bland")
    args = ap.parse_args()
    rule = BLAND if args.rule == "bland" else DANTZIG
    print(f"{'size':>10} {'numba s':>10} {'numpy s':>10} {'speedup':>8} {'iters':>12}  status")
    for s in args.sizes:
        m, n = (int(v) for v in s.split("x"))
        r = bench(m, n, args.repeat, rule)
        tn, itn, st = r.get("numba", (np.nan, -1, ""))
        tp, itp, st2 = r["numpy"]
        iters = f"{itn}/{itp}"
        print(f"{s:>10} {tn:10.4f} {tp:10.4f} {tp / tn:8.1f} {iters:>12}  {st2}")


if __name__ == "__main__":
    main()
