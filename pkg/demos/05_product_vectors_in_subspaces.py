"""Product vectors in subspaces: analytic equations vs numeric search.

For 2-dimensional subspaces of 2x3 and 3-dimensional subspaces of 2x4,
a single polynomial in the Pluecker coordinates vanishes exactly when
the subspace contains a product vector.  A damped-least-squares search
on the 2x2 minors covers every shape and returns explicit factors.
"""

import numpy as np

from entcert.product_search import (
    Subspace,
    degree_scale,
    find_product_vector,
    hypersurface_2x3,
    hypersurface_2x4,
    pluecker_coords,
    random_product_containing_subspace,
    random_subspace,
)

rng = np.random.default_rng(0)

# --- a hand-picked 2x3 subspace: polynomial value exactly -1 ----------------
a = np.zeros(6, complex); a[0] = a[4] = 1.0
b = np.zeros(6, complex); b[1] = b[5] = 1.0
v = Subspace(2, 3, np.vstack([a, b]))
print(f"span{{|11>+|22>, |12>+|23>}} in 2x3: cubic value = {hypersurface_2x3(v):.6f}")
print("  nonzero, so the subspace contains no product vector")
print(f"  numeric search agrees: found = {find_product_vector(v, rng=rng).found}")

# --- vanishing detects planted product vectors ------------------------------
print("\nplanted product vectors (value / degree-scaled norm):")
for dims, dim, poly, deg in (((2, 3), 2, hypersurface_2x3, 3),
                             ((2, 4), 3, hypersurface_2x4, 4)):
    planted = random_product_containing_subspace(*dims, dim, rng)
    generic = random_subspace(*dims, dim, rng)
    cp = pluecker_coords(planted)
    cg = pluecker_coords(generic)
    print(f"  {dims[0]}x{dims[1]}, dim {dim}: planted {abs(poly(planted, cp)) / degree_scale(cp, deg):.1e}"
          f"   generic {abs(poly(generic, cg)) / degree_scale(cg, deg):.1e}")

# --- the numeric search also returns the factors ----------------------------
v = random_product_containing_subspace(3, 3, 4, rng)
result = find_product_vector(v, rng=rng)
vec = np.kron(result.a, result.b)
member = result.coefficients @ v.basis
print(f"\n3x3, dim-4 subspace with a planted product (no known equation):")
print(f"  found = {result.found}, rank-1 defect = {result.best_defect:.1e}")
print(f"  |a x b - combination| = {np.linalg.norm(vec - member):.1e}")

# --- large subspaces always contain product vectors --------------------------
v = random_subspace(3, 3, 5, rng)
print(f"\nany 5-dimensional subspace of 3x3 contains one: "
      f"found = {find_product_vector(v, rng=rng).found}")
