#!/usr/bin/env python3
"""Benchmark the combining kernels against each other.

Times single-candidate evaluation and the batched candidate scan on a fixed
seeded workload, for every available backend.

    python benchmarks/bench_kernels.py --nr 64 --n 4 --k 4 --candidates 4000
"""

import argparse
import time

import numpy as np

import uesa
from uesa._kernels import available_backends, get_backend


def bench(nr: int, n: int, k: int, candidates: int, repeats: int, seed: int) -> None:
    h = uesa.generate_channel(uesa.ChannelParams(nr, k), uesa.trial_rng(seed, 0, 0))
    h_ord = uesa.order_rows_desc_norm(h.entries).entries
    cands = []
    for parts in uesa.enumerate_compositions(nr, n):
        cands.append(parts)
        if len(cands) >= candidates:
            break
    mat = np.asarray(cands, dtype=np.int64)
    rho = uesa.snr_db_to_rho(12.0)

    print(f"workload: nr={nr} n={n} k={k}, {mat.shape[0]} candidates, {repeats} repeats")
    rows = []
    check = None
    for name in sorted(available_backends()):
        kernel = get_backend(name)
        single_n = min(200, mat.shape[0])
        t0 = time.perf_counter()
        for row in mat[:single_n]:
            kernel.combine(h_ord, row, rho, 16, True)
        single = (time.perf_counter() - t0) / single_n * 1e6

        best = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            totals = kernel.batch_totals(h_ord, mat, rho, 16, True)
            best = min(best, (time.perf_counter() - t0) / mat.shape[0] * 1e6)
        rows.append((name, single, best))
        top = float(np.max(totals))
        if check is None:
            check = top
        elif abs(top - check) > 1e-9:
            raise AssertionError(f"backend {name} disagrees: {top} vs {check}")

    baseline = dict((n, b) for n, _, b in rows).get("pure", rows[0][2])
    print(f"{'backend':<12}{'single us/cand':>16}{'batch us/cand':>16}{'vs pure':>12}")
    for name, single, best in rows:
        print(f"{name:<12}{single:>16.2f}{best:>16.2f}{baseline / best:>11.1f}x")
    print(f"max total rate {check:.6f} bits/s/Hz (all backends agree)")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nr", type=int, default=64)
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--candidates", type=int, default=4000)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    bench(args.nr, args.n, args.k, args.candidates, args.repeats, args.seed)


if __name__ == "__main__":
    main()
