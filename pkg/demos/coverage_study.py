"""
Coverage of structure confidence sets
=====================================

Draws data from laws compatible with the complexity prior and records how
often the true set of active covariates lands in the IM confidence set and
in the Bayes highest-posterior credible set.  A reduced run of 500
replications; ``CoverageConfig(replications=10_000)`` gives the full study.
"""

# %%
from imstruct.simulate import CoverageConfig, coverage_experiment, run_replicates, validity_experiment

config = CoverageConfig(p=3, n=25, gamma=1.0, replications=500, B=5000, seed=0)
results = run_replicates(config)
report = coverage_experiment(config, results)
print(report.to_csv())

# %%
# Distribution function of the contour at the truth; validity keeps it below
# the diagonal.
for alpha, cdf in validity_experiment(config, results):
    print(f"alpha={alpha:.2f}  P(pi <= alpha)={cdf:.3f}")
