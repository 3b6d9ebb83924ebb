"""
Possibility contours from probability distributions
====================================================

Turns a binomial and a gamma distribution into possibility contours,
marginalises a contour through a map, and computes the upper mean of a
monotone complexity prior.
"""

# %%
import numpy as np
from scipy import stats

from imstruct import Contour, MassFunction, extend, geometric_contour, grid_contour, most_diffuse, possibility_of
from imstruct import prob_to_poss, upper_expectation_monotone

# %%
# Bin(6, 0.2): each point's possibility is the total mass of points that are no
# more likely than it.  The mode gets 1.
support = np.arange(7)
binom = prob_to_poss(MassFunction(tuple(support.tolist()), stats.binom.pmf(support, 6, 0.2)))
for k, v in binom.items():
    print(f"pi({k}) = {v:.6f}")

# Possibility of a hypothesis is the largest contour value over it.
print("Pi(T >= 3) =", possibility_of(binom, [3, 4, 5, 6]))

# %%
# Gamma(2, 1) on a grid: the contour peaks at the density mode, 1.
grid = np.round(np.arange(0, 10.0001, 0.01), 10)
gam = grid_contour(lambda t: stats.gamma.pdf(t, 2.0), grid)
print("mode:", gam.mode(), " pi(3) =", round(gam[3.0], 4))

# %%
# Extension principle: the contour of a function of T takes maxima over preimages.
parity = extend(binom, lambda k: "even" if k % 2 == 0 else "odd")
print(parity.as_dict())

# %%
# A nonincreasing prior on complexity k = 0..3.  Its upper mean over the credal
# set equals the mean of the most diffuse compatible distribution.
q = geometric_contour(3, 1.0)
print("upper mean:", upper_expectation_monotone(q))
print("most diffuse masses:", most_diffuse(q).masses.round(4))
