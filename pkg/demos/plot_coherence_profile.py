"""
TT core coherences
==================

Coherence measures how evenly the energy of an orthonormal basis spreads
across rows.  For a tensor train it is computed per core and does not depend
on which orthogonal factorization is used.
"""

import numpy as np

import ttmax

rng = np.random.default_rng(0)

# A random low-rank tensor is incoherent: coherences stay small.
cores = [rng.standard_normal(s) for s in [(1, 6, 2), (2, 6, 3), (3, 6, 1)]]
smooth = ttmax.tt_to_dense(ttmax.TTTensor(cores))

# A spike concentrates all its energy in one entry: maximal coherence.
spike = np.zeros((6, 6, 6))
spike[1, 2, 3] = 1.0

for name, a in [("random low rank", smooth), ("spike", spike), ("identity", ttmax.identity_tensor(6, 3))]:
    prof = ttmax.tt_core_coherences(a)
    print(f"{name:16s} ranks {prof.ranks} left {np.round(prof.left, 2)} right {np.round(prof.right, 2)}")

# The same numbers come out whichever core carries the norm.
tt = ttmax.tt_svd(smooth)
for t in (1, 2, 3):
    moved = ttmax.orthogonalize_t(tt, t)
    left = [ttmax.core_left_coherence(g) for g in moved.cores[: t - 1]]
    print(f"t={t}: left coherences of orthogonal cores {np.round(left, 6)}")

# The bound on the quasinorm built from coherences, at each pivot position.
for t in (1, 2, 3):
    print(f"t={t}: quasinorm bound {ttmax.gamma_bound_via_coherence(smooth, t):.4f}")
