"""Desk-scale runtime benchmark for hypothetical-record incorporation.

Measures the wall time of one Gibbs incorporation as a function of
(i) the number of clusters in the context block and (ii) the sparsity of
the hypothetical record, at fixed table size.  Emits an aligned table and
optionally a CSV.

    python3 scripts/scaling_benchmark.py [--csv out.csv] [--reps 200]
"""

import argparse
import csv
import gc
import math
import sys
import time

import numpy as np

from relquery.crosscat import CrossCatState
from relquery.relevance import incorporate_record, unincorporate_record
from relquery.rng import stream
from relquery.table import ColumnSchema, DataTable, StatType

N_ROWS = 640
N_COLS = 20


def build_state(n_clusters, seed=5001):
    rng = stream(seed)
    schemas = [ColumnSchema(f"c{i}", StatType("numerical")) for i in range(N_COLS)]
    cells = [[float(rng.normal()) for _ in range(N_COLS)] for _ in range(N_ROWS)]
    table = DataTable(schemas, cells)
    z = np.array([r % n_clusters for r in range(N_ROWS)], dtype=np.int64)
    return CrossCatState.from_assignments(table, [0] * N_COLS, {0: z})


def time_incorporate(state, record, reps, rounds=10):
    best = math.inf
    rng = stream(5002)
    gc.disable()
    try:
        for _ in range(rounds):
            timed = 0.0
            for _ in range(reps):
                t0 = time.perf_counter()
                token = incorporate_record(state, 0, record, rng)
                timed += time.perf_counter() - t0
                unincorporate_record(state, token)
            best = min(best, timed / reps)
    finally:
        gc.enable()
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--csv", type=str, default=None)
    parser.add_argument("--reps", type=int, default=200)
    args = parser.parse_args(argv)

    rows = []
    print(f"table: {N_ROWS} rows x {N_COLS} numerical columns, one block\n")
    print("clusters  sparsity  present_vars  mean_us")
    for k in (10, 20, 40, 80, 160):
        state = build_state(k)
        for missing in (0.0, 0.3, 0.6, 0.9):
            present = int(round(N_COLS * (1.0 - missing)))
            record = {c: 0.25 for c in range(present)}
            t = time_incorporate(state, record, args.reps)
            rows.append((k, missing, present, t * 1e6))
            print(f"{k:8d}  {missing:8.0%}  {present:12d}  {t * 1e6:7.1f}")
    dense = [(k, t) for k, miss, _, t in rows if miss == 0.0]
    x = np.array([k for k, _ in dense], dtype=float)
    y = np.array([t for _, t in dense])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    r2 = 1.0 - float(np.sum((y - pred) ** 2) / np.sum((y - y.mean()) ** 2))
    print(f"\ndense-record linear fit: {slope:.3f} us/cluster + {intercept:.1f} us"
          f" (R^2 = {r2:.3f})")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["clusters", "fraction_missing", "present_vars", "mean_us"])
            writer.writerows(rows)
        print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
