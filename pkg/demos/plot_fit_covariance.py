"""
Fitting a covariance from sparse replicates
===========================================

Simulate a few dozen random fields on the sphere, each seen at five random
locations with noise, and recover the covariance with the penalized
tensor-product estimator.
"""

import numpy as np

from tphcov import (
    NoiseSpec, assemble_pairs, default_model, fit, harmonic_mean, mc_l2_error,
    predict, sample_dataset, sample_uniform, space_params, theorem_eta, true_cov, zonal_green,
)

sp = space_params("sphere", 2)
model = default_model(sp)  # smooth isotropic part plus two anisotropic bumps
data = sample_dataset(model, n=60, r=5, noise=NoiseSpec(0.25), rng=1)

# %%
# Only off-diagonal products W_ij W_ik enter the fit, so the noise variance
# never biases the estimate.
design = assemble_pairs(data)
print(f"{data.n} subjects, {design.size} pair rows, weights sum to {design.weight.sum():.3f}")

k = zonal_green(sp, p=3.0)
eta = theorem_eta(data.n, harmonic_mean(data.r), p=3.0, d=2)
est = fit(k, design, eta)
print(f"eta = {eta:.4g}")

# %%
# Compare with the truth at a handful of pairs and over the whole product space.
u = sample_uniform(sp, 4, 2)
v = sample_uniform(sp, 4, 3)
for a, b in zip(u, v):
    print(f"   fitted {predict(est, a, b):+.3f}   true {true_cov(model, a, b):+.3f}")
err, se = mc_l2_error(est, model, 4000, 4)
print(f"squared L2 error {err:.4f} +- {se:.4f}")
