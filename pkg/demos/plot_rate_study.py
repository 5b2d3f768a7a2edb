"""
Convergence rate study
======================

Repeat simulate, fit and score over a grid of sample sizes and fit the
log-log slope of the mean squared error against n. The target exponent for
p = 3 on the 2-sphere is -2p / (2p + d) = -0.75.

This reduced grid runs in well under a minute, but with five replications
per point the fitted slope is mostly noise. ``ExperimentConfig()`` with its
defaults runs the full study (20 replications, n up to 200, about two
minutes per core).
"""

from tphcov import ExperimentConfig, rate_study

config = ExperimentConfig(grid=((25, 5), (50, 5), (100, 5)), replications=5, error_samples=1000)
report = rate_study(config)

print(report.to_csv())
print("sensitivity to the penalty multiplier c0:")
for row in report.sweep:
    print(f"   n={row.n:4d} c0={row.c0:5.1f} error={row.mean_sq_error:.4f}")
print(f"slope {report.slope:.3f}, target {report.target}, band {report.band}")
