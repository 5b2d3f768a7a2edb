"""
Uniform points and the distance law
===================================

Points on projective spaces are stored as unit vectors over the reals,
complexes or quaternions, flattened to real arrays. Distances only see the
line through a vector, so multiplying by a unit scalar changes nothing.
"""

import numpy as np

from tphcov import cos_eps_rho, distance_cdf, sample_uniform, space_params

rng = np.random.default_rng(0)
sp = space_params("complex_projective", 4)
U = sample_uniform(sp, 20_000, rng)
V = sample_uniform(sp, 20_000, rng)
t = cos_eps_rho(sp, U, V)

# The statistic t = cos(eps * rho) of two independent uniform points follows
# the normalized Jacobi weight. Compare empirical and exact CDF at a few values.
for x in (-0.5, 0.0, 0.5):
    print(f"P(t <= {x:+.1f}): empirical {np.mean(t <= x):.4f}, exact {distance_cdf(sp, x):.4f}")

# %%
# A phase change (u -> u * e^{i phi}) leaves every distance untouched.
phase = np.exp(0.7j)
u_c = U[0].view(complex) * phase
print("phase invariance:", np.isclose(cos_eps_rho(sp, U[0], V[0]), cos_eps_rho(sp, u_c.view(float), V[0])))
