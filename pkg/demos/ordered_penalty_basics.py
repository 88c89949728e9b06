"""
The ordered l2 penalty in a few lines
=====================================

Weights are assigned by rank, so the biggest coefficient always pays the
biggest weight no matter where it sits.
"""

import numpy as np

from orderedl2 import ordered_l2_penalty, shrink_ordered_l2, sqrt_ordered_l2
from orderedl2.penalty import prox_objective, prox_oracle_small

lam = np.array([4.0, 2.0, 1.0])
x = np.array([0.5, -3.0, 1.0])

# -3 is largest so it gets 4, then 1 gets 2, then 0.5 gets 1
print("J(x)        =", ordered_l2_penalty(x, lam))
print("J(perm x)   =", ordered_l2_penalty(x[::-1], lam))
print("sqrt J(x)   =", sqrt_ordered_l2(x, lam))

# Equal weights give back c * ||x||^2
print("equal 2.0   =", ordered_l2_penalty(x, np.full(3, 2.0)), "vs", 2.0 * x @ x)

# A single nonzero weight turns the root into a scaled max-norm
print("(9, 0, 0)   =", sqrt_ordered_l2(x, [9.0, 0.0, 0.0]), "vs", 3 * np.max(np.abs(x)))

###############################################################################
# The z-update shrinks each entry by the weight of its rank.
v = np.array([3.0, -1.0, 0.2])
z = shrink_ordered_l2(v, lam, rho=1.0)
print("shrink(v)   =", z)

# When shrinking keeps the order this is the exact minimizer. When it does
# not, the brute-force oracle can sometimes do a little better.
rng = np.random.default_rng(1)
for trial in range(1000):
    v = rng.standard_normal(4)
    w = np.sort(rng.uniform(0, 3, 4))[::-1]
    z = shrink_ordered_l2(v, w, 1.0)
    zo = prox_oracle_small(v, w, 1.0)
    f, fo = prox_objective(z, v, w, 1.0), prox_objective(zo, v, w, 1.0)
    if f > fo + 1e-12:
        break
print(f"trial {trial}: shrink objective {f:.5f}, oracle {fo:.5f} "
      f"({(f - fo) / fo:.2%} gap)")
print("  shrink:", np.round(z, 4))
print("  oracle:", np.round(zo, 4))
