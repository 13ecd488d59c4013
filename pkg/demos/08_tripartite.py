"""Tripartite pure states: a pure state cannot hide two bound-entangled pairs.

If the AB and AC reductions of a pure tripartite state are both
undistillable (PPT), then both are separable and the state is
sum_i |a_i>|i,i> up to local unitaries on B and C; if additionally the
BC reduction is PPT the state is a generalized GHZ state.  The GHZ test
runs two independent routes (PPT and zero-discord) and requires them to
agree.
"""

import numpy as np

from entcert.families import make_generalized_ghz
from entcert.random_states import complex_gaussian, random_unitary
from entcert.tripartite import TripartitePure, classify_pairs, ghz_test

rng = np.random.default_rng(0)

# --- the W state: both pairs NPT ---------------------------------------------
w_amp = np.zeros(8, complex)
w_amp[1] = w_amp[2] = w_amp[4] = 1.0
w = TripartitePure((2, 2, 2), w_amp)
pc = classify_pairs(w, rng=rng)
print("W state |001> + |010> + |100>:")
print(f"  PPT flags {pc.ppt}; certificates "
      f"{ {k: type(v).__name__ for k, v in pc.certificates.items()} }")

# --- sum_i |a_i>|ii>: both pairs PPT, canonical form recovered ----------------
d = 3
amp = np.zeros((2, d, d), complex)
for i in range(d):
    amp[:, i, i] = complex_gaussian(rng, 2)
psi = TripartitePure((2, d, d), amp.reshape(-1))
pc = classify_pairs(psi, rng=rng)
print(f"\nsum_i |a_i>|ii> with non-orthogonal a_i:")
print(f"  PPT flags {pc.ppt}; both reductions certified "
      f"{ {k: type(v).__name__ for k, v in pc.certificates.items()} }")
print(f"  canonical form residual {pc.canonical.residual:.2e}")
ok, _ = ghz_test(psi, rng=rng)
print(f"  generalized GHZ: {ok} (the a_i are not orthogonal)")

# --- a rotated generalized GHZ state: detected, coefficients recovered --------
coeffs = [1.0, 0.6, 0.3]
ghz = make_generalized_ghz(coeffs)
t = np.einsum("ai,bj,ck,ijk->abc", random_unitary(3, rng),
              random_unitary(3, rng), random_unitary(3, rng), ghz.tensor())
hidden = TripartitePure((3, 3, 3), t.reshape(-1))
ok, recovered = ghz_test(hidden, rng=rng)
print(f"\ngeneralized GHZ with coefficients {coeffs}, hidden by random local unitaries:")
print(f"  detected = {ok}, recovered coefficients {np.round(recovered, 6)}")

# --- generic states: no two undistillable entangled reductions ---------------
both_ppt = 0
for _ in range(50):
    dims = tuple(int(x) for x in rng.integers(2, 4, size=3))
    psi = TripartitePure(dims, complex_gaussian(rng, int(np.prod(dims))))
    pc = classify_pairs(psi, rng=rng)
    if pc.ppt["AB"] and pc.ppt["AC"]:
        both_ppt += 1
        assert pc.canonical is not None  # separability is forced
print(f"\n50 random pure states: {both_ppt} had both pairs PPT, "
      "and every such case came with a separability certificate")
