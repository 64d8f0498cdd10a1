"""
A point between two clusters
============================

Two five-point diamonds are joined by a single point at the origin. A
probabilistic mixture has to split that point's membership between the two
clusters; the evidential model can instead put its mass on the pair.
"""

import numpy as np

from egmm import EgmmConfig, egmm_fit, gen_diamond, hard_credal
from egmm.gmm import gmm_fit, gmm_responsibilities

d = gen_diamond()
model, part = egmm_fit(d.X, EgmmConfig(C=2, kappa=2, seed=0))

np.set_printoptions(precision=3, suppress=True)
print(part.structure.labels())
print(part.masses)

# Object 6 (row 5) sends most of its mass to {1,2}; it lands in the upper
# approximation of both clusters and the lower approximation of neither.
view = hard_credal(part)
for k in range(2):
    print(f"cluster {k + 1}: lower {view.lower[k] + 1}, upper {view.upper[k] + 1}")

# For comparison, the shared-covariance GMM splits the bridge point evenly.
g = gmm_fit(d.X, 2, "shared", seed=0)
print("GMM responsibilities of object 6:", gmm_responsibilities(d.X[5:6], g)[0])
