"""
False confidence of a default Bayes posterior
=============================================

With intercept 0.3 and slope 0.1 the mean line crosses zero at -3, so the
hypothesis "root > -1" is false.  The posterior probability of that false
hypothesis is nevertheless often large.  The covariate is standard normal,
drawn once and held fixed; the size of the effect depends on that design.
"""

# %%
import numpy as np

from imstruct import false_confidence_experiment

report = false_confidence_experiment(n=25, coeffs=(0.3, 0.1), variance=1.0, datasets=1000, seed=0)
for level, cdf in report.cdf[::10]:
    print(f"P(posterior prob <= {level:.1f}) = {cdf:.3f}")
print("fraction above 0.6:", report.exceedance(0.6))

# %%
# A design spread over [-1, 1] gives a different picture.
design = np.random.default_rng(1).uniform(-1, 1, 25)
uniform = false_confidence_experiment(datasets=1000, seed=0, design=design)
print("uniform design, fraction above 0.6:", uniform.exceedance(0.6))
