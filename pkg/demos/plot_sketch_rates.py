"""
Random sketches of a tensor train
=================================

Sandwiching random matrices between the cores compresses a tensor train to
any rank ``r`` without bias.  The entrywise error falls like ``r^(-1/2)``
relative to the quasinorm bound.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import ttmax

out = Path(__file__).with_name("_output")
out.mkdir(exist_ok=True)

tt = ttmax.identity_tt(64, 2)
ranks = [4, 8, 16, 32, 64, 128]
medians = {}
for dist in ("gaussian", "rademacher"):
    medians[dist] = [
        ttmax.sketch_error_report(tt, ttmax.SketchConfig(r, dist, seed=0), trials=50).median_epsilon
        for r in ranks
    ]
    print(dist, np.round(medians[dist], 3))

# Quadrupling the rank should roughly halve the error.
g = medians["gaussian"]
print("ratio r=64 / r=16:", round(g[4] / g[2], 3))

fig, ax = plt.subplots()
for dist, values in medians.items():
    ax.loglog(ranks, values, marker="o", label=dist)
ax.loglog(ranks, 4 * np.array(ranks, dtype=float) ** -0.5, "k--", label="r^(-1/2)")
ax.set_xlabel("sketch rank r")
ax.set_ylabel("median max error / quasinorm bound")
ax.legend()
fig.savefig(out / "sketch_rates.svg")

# Inner rank one is a special case: Rademacher sketches reproduce it exactly.
rank_one = ttmax.TTTensor([np.ones((1, 3, 1))] * 3)
exact = ttmax.compress(rank_one, ttmax.SketchConfig(10, "rademacher", seed=1))
print("rank-1 error:", np.max(np.abs(ttmax.tt_to_dense(exact) - 1)))
