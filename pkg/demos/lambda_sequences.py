"""
BHq regularizing sequences
==========================

Builds the sequences for p = 5000 and shows where the inflated version stops
decreasing.
"""

import numpy as np

from orderedl2.lambda_seq import BhqConfig, first_increase, lambda_table, raw_lambda_sequence

p = 5000

for q, mode in [(0.4, "n=2p"), (0.4, "n=p"), (0.055, "n=p")]:
    cfg = BhqConfig(q, p, mode, length=2500, monotone_clip=False)
    lam_bh, lam = raw_lambda_sequence(cfg)
    i = first_increase(lam)
    where = "never" if i is None else f"at k={i + 2}"
    print(f"q={q:<5} {mode:<5} lambda_bh(1)={lam_bh[0]:.4f} lambda(2500)={lam[-1]:.4f} "
          f"increases {where}")

###############################################################################
# With clipping on (the default) the running minimum is returned, which is
# always a valid weight sequence.
table = lambda_table(BhqConfig(0.055, p, "n=p", length=2500))
print("clipped tail:", np.round(table["lambda"][-3:], 4))

# Coarse text plot of the raw q=0.4, n=2p curve
_, lam = raw_lambda_sequence(BhqConfig(0.4, p, "n=2p", length=2500))
for k in (1, 10, 100, 500, 1000, 2500):
    print(f"k={k:>5} {lam[k - 1]:.3f} " + "#" * int(10 * lam[k - 1]))
