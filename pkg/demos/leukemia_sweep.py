"""
Gene-selection sweep
====================

Runs the q x method grid the ``orderedl2 sweep`` command runs. Point
``ORDEREDL2_LEUKEMIA`` at the 72 x 7129 LIBSVM leukemia file to use real
data; otherwise a small two-class surrogate is generated so the pipeline can
still be walked through.
"""

import argparse
import os

import numpy as np

from orderedl2.cli import METHOD_ORDER, average_rows, build_parser, run_sweep
from orderedl2.data import Dataset, SplitSpec, load_libsvm, split_train_test

path = os.environ.get("ORDEREDL2_LEUKEMIA")
if path:
    data = load_libsvm(path)
    train_n = 38
else:
    rng = np.random.default_rng(0)
    y = np.where(np.arange(72) < 47, -1.0, 1.0)
    A = rng.standard_normal((72, 400))
    A[:, :20] += 0.8 * y[:, None]  # 20 informative "genes"
    data = Dataset(A, y)
    train_n = 38
print(f"dataset {data.n} x {data.p}")

train, test = split_train_test(data, SplitSpec(train_n, seed=0))

# Reuse the CLI defaults for the solver settings
args = build_parser().parse_args(["sweep", "--data", "unused"])
args = argparse.Namespace(**vars(args))
rows = run_sweep(train, test, args.q_grid, list(METHOD_ORDER), args)
rows += average_rows(rows, list(METHOD_ORDER))

print(f"{'q':>7} {'method':<6} {'errors':>6} {'genes':>6} {'iters':>6}")
for r in rows:
    print(f"{r['q']!s:>7} {r['method']:<6} {r['test_error']:>6} {r['genes']:>6} "
          f"{r['iterations']:>6}")
