"""The right/left full-rank properties and their distillability criterion.

A state has the right full-rank property (RFRP) when some A-side vector
x makes <x|rho|x> invertible on B.  States violating RFRP or its left
analog are distillable, which makes the test a practical criterion:
one invertible sample proves "holds"; consistent rank deficiency over a
sample budget reports "violated" with a quoted failure bound.
"""

import numpy as np

from entcert import BipartiteState, full_rank_property, reduction_criterion, sector, tensor
from entcert.families import make_antisymmetric
from entcert.linalg import numerical_rank
from entcert.random_states import complex_gaussian, random_product_sum

# --- the antisymmetric state violates RFRP --------------------------------
ras = make_antisymmetric(3)
rng = np.random.default_rng(0)
ranks = {numerical_rank(sector(ras, complex_gaussian(rng, 3), "A"))[0]
         for _ in range(50)}
print(f"antisymmetric state: sector ranks over 50 random x: {ranks}")

res = full_rank_property(ras, "right", rng=0)
print(f"  RFRP holds = {res.holds} after {res.samples} samples "
      f"(failure bound {res.failure_bound:.1e})")

# --- its two-copy version has RFRP ----------------------------------------
two = tensor(ras, ras)
res2 = full_rank_property(two, "right", rng=0)
print(f"two-copy version (9x9 locals): RFRP holds = {res2.holds} "
      f"after {res2.samples} sample(s)")

# --- a state with LFRP but not RFRP ----------------------------------------
v1 = np.zeros(6, complex); v1[0] = v1[4] = 1.0   # |11> + |22>
v2 = np.zeros(6, complex); v2[5] = 1.0           # |23>
v3 = np.zeros(6, complex); v3[2] = 1.0           # |13>
lopsided = BipartiteState.from_vectors(2, 3, [v1, v2, v3])
print(f"\n2x3 three-term state: RFRP = "
      f"{full_rank_property(lopsided, 'right', rng=0).holds}, "
      f"LFRP = {full_rank_property(lopsided, 'left', rng=0).holds}")

# --- incomparability with the reduction criterion --------------------------
print("\nincomparability of the two distillability criteria:")
print(f"  antisymmetric: full-rank detects = "
      f"{not full_rank_property(ras, 'right', rng=0).holds}, "
      f"reduction detects = {reduction_criterion(ras)[0]}")

p = 0.8
psi1 = np.sqrt(p / 2) * np.array([1, 0, 0, 1], complex)
psi2 = np.sqrt((1 - p) / 2) * np.array([1, 0, 0, -1], complex)
two_term = BipartiteState.from_vectors(2, 2, [psi1, psi2])
print(f"  two-term 2x2 (p = {p}): full-rank detects = "
      f"{not full_rank_property(two_term, 'right', rng=0).holds}, "
      f"reduction detects = {reduction_criterion(two_term)[0]}")

# --- separable states always have both properties --------------------------
sep = random_product_sum(3, 3, 5, rng=2)
print(f"\nrandom separable 3x3: RFRP = "
      f"{full_rank_property(sep, 'right', rng=0).holds}, "
      f"LFRP = {full_rank_property(sep, 'left', rng=0).holds} "
      "(PPT states always have both)")
