"""
Entrywise approximation of identity tensors
===========================================

The identity tensor has full TT rank, yet its factorization quasinorm is 1.
That is what makes low-rank approximation in the maximum norm possible at
ranks logarithmic in the size.
"""

import numpy as np

import ttmax

# The CP form of the identity, converted to a tensor train, has one-hot
# slices, so every core has norm one.
for d in (2, 3, 4):
    tt = ttmax.identity_tt(8, d)
    print(f"d={d}: TT ranks {tt.ranks}, quasinorm bound {ttmax.gamma_tt_upper(tt):.3f}")

# The rank that guarantees entrywise error eps grows with log(n), not n.
print("\n      n   rank for eps=0.1")
for n in (18694, 10**5, 10**7, 10**9):
    print(f"{n:>10}   {ttmax.rank_bound_matrix(n, n, 0.1)}")

# For tensors the constant is a placeholder, exposed as a parameter.
for d in (2, 3, 4):
    print(f"d={d}, n=1000: r <= {ttmax.rank_bound_tt((1000,) * d, 0.1, c_d=9)}")

# Coherences give a second, data-dependent route to the same guarantee.
a = ttmax.identity_tensor(6, 3)
r, bound, t = ttmax.coherence_error_bound(a, 0.1)
print(f"\ncoherence bound for the 6x6x6 identity at eps=0.1: {bound:.4f} (t={t})")
profile = ttmax.tt_core_coherences(a)
print("left coherences", np.round(profile.left, 3), "right", np.round(profile.right, 3))
