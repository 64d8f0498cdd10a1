"""
Mass functions, belief and plausibility
=======================================

A mass function spreads one unit of belief over non-empty subsets of the
clusters. This script builds a few by hand and looks at what each summary
tells us.
"""

import numpy as np

from egmm import MassFunction, bel, betp, conflict, dempster_combine, enumerate_focal_sets, pl

# Focal sets are stored as bitmasks in increasing order, so for three
# clusters the columns run {1}, {2}, {1,2}, {3}, {1,3}, {2,3}, {1,2,3}.
s = enumerate_focal_sets(3)
print(s.labels())

# An object that is probably in cluster 3, possibly in 2, and otherwise
# unknown.
m = MassFunction.from_dict({(2,): 0.1, (3,): 0.2, (2, 3): 0.4, (1, 2, 3): 0.3}, 3)

# Belief counts only the mass that is committed inside a set, plausibility
# all the mass that does not rule it out.
for A in ({3}, {2, 3}, {1}):
    print(f"A={sorted(A)}  bel={bel(m, A):.2f}  pl={pl(m, A):.2f}")

# The pignistic transform shares each set's mass equally among its members.
print("BetP:", betp(m))

# Two sources that both lean towards cluster 3 reinforce each other.
other = MassFunction.from_dict({(3,): 0.6, (1, 3): 0.4}, 3)
fused = dempster_combine(m, other)
print("conflict:", round(conflict(m, other), 4))
print({fused.structure.label(j): round(float(v), 4) for j, v in enumerate(fused.masses) if v > 0})

# With a cap of two, only singletons and pairs are kept; the number of
# focal sets then grows quadratically with C.
for C in (3, 5, 8):
    print(C, enumerate_focal_sets(C).M, enumerate_focal_sets(C, 2).M)

# The vacuous mass function is the neutral element of the combination.
assert np.allclose(dempster_combine(MassFunction.vacuous(3), m).masses, m.masses)
