"""
Contours for the coefficients of one regression model
======================================================

For a fixed set of covariates the profile contour of the coefficient vector
has a closed form through the F distribution, and its level sets are the
usual F confidence ellipsoids.  The joint contour with the variance is
computed by simulating the likelihood-ratio pivot.
"""

# %%
import numpy as np
from scipy import stats

from imstruct import Dataset, joint_contour_mc, profile_contour_fixed

rng = np.random.default_rng(1)
n = 15
x = rng.standard_normal((n, 2))
xf = np.column_stack([np.ones(n), x])
y = xf @ [1.0, 0.5, -0.8] + rng.standard_normal(n)
data = Dataset(y, x)
coef = np.linalg.lstsq(xf, y, rcond=None)[0]

# %%
# Contour along a ray from the estimate.
for step in (0.0, 0.2, 0.4, 0.8, 1.2):
    phi = coef + step * np.array([1.0, 1.0, 0.0])
    print(f"step {step:.1f}: pi = {profile_contour_fixed(data, phi):.4f}")

# %%
# The 95% level set matches the F ellipsoid.
rss = np.sum((y - xf @ coef) ** 2)
crit = stats.f.ppf(0.95, 3, n - 3)
agree = 0
for _ in range(500):
    phi = coef + rng.normal(scale=0.7, size=3)
    d = coef - phi
    inside = d @ xf.T @ xf @ d / 3 / (rss / (n - 3)) <= crit
    agree += (profile_contour_fixed(data, phi) > 0.05) == inside
print(f"ellipsoid agreement: {agree}/500")

# %%
# Joint contour of (coefficients, variance) by Monte Carlo.
for lam in (0.3, 0.7, 1.5, 3.0):
    print(f"lambda {lam}: pi = {joint_contour_mc(data, coef, lam, mc_draws=20_000, seed=0):.3f}")
