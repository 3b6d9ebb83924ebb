"""
Which covariates matter?  A contour over variable subsets
=========================================================

Simulates a data set with eight candidate covariates, of which three are
active, and computes the possibility contour over all 256 subsets under the
complexity prior ``q(k) = exp(-2 k)``.
"""

# %%
import numpy as np

from imstruct import Dataset, PriorSpec, build_reference_table, confidence_set, marginal_complexity_contour
from imstruct import structure_contour

rng = np.random.default_rng(7)
n, p = 97, 8
x = rng.standard_normal((n, p))
beta = np.array([0.7, 0.3, 0, 0, 0.5, 0, 0, 0])
y = 2.0 + x @ beta + 0.7 * rng.standard_normal(n)
names = tuple(f"x{j}" for j in range(p))
data = Dataset(y, x, names)

# %%
# The reference table depends on the design and the prior only, so it can be
# built once and reused for any response.
prior = PriorSpec(gamma=2.0, p=p)
table = build_reference_table(data.design, prior, B=5000, master_seed=0)
sc = structure_contour(data, prior, table)

# %%
print("most plausible:", sc.argmax.names(names))
for s, v in confidence_set(sc, 0.05):
    print(f"  {v:.3f}  {s.names(names)}")

# %%
# Contour for the number of active covariates.
for k, v in marginal_complexity_contour(sc).items():
    print(f"k={k}: {v:.3f}")
