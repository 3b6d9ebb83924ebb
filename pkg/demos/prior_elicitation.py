"""
Choosing the strength of the sparsity prior
===========================================

The prior contour ``q(k) = exp(-gamma k)`` bounds the upper expected number
of active covariates.  Pick gamma so that the bound matches a belief such as
"about two active covariates out of p".
"""

# %%
import numpy as np

from imstruct import solve_gamma, upper_mean_curve

for p in (3, 8):
    print(f"p = {p}")
    for gamma, m in upper_mean_curve(p, [0.25, 0.5, 1.0, 1.5, 2.0, 3.0]):
        print(f"  gamma={gamma:4.2f}  upper mean={m:.4f}")

# %%
print("p=3, target 2/3 :", round(solve_gamma(3, 2 / 3), 4))
print("p=8, target 0.25:", round(solve_gamma(8, 0.25), 4))
