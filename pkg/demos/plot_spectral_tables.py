"""
Spectral tables on two-point homogeneous spaces
===============================================

Every space in the package is described by a pair of Jacobi parameters.
From them we get the Laplace-Beltrami eigenvalues, the eigenspace
dimensions and the addition-formula constants used everywhere else.
"""

import numpy as np

from tphcov import space_params, spectral_table, zonal_green, kernel_eval

# The five families, each at a small dimension. The Cayley plane has no point
# model but its spectral data is available all the same.
for kind, d in [("sphere", 2), ("real_projective", 2), ("complex_projective", 4),
                ("quaternion_projective", 8), ("cayley_plane", 16)]:
    sp = space_params(kind, d)
    tab = spectral_table(sp, 6)
    print(f"{sp.label:10s} alpha={sp.alpha:4} beta={sp.beta:4} eps={sp.eps}")
    print("   degrees    ", tab.ells.tolist())
    print("   eigenvalues", tab.lambdas.tolist())
    print("   dimensions ", np.round(tab.dims).astype(int).tolist())

# %%
# The Green's kernel of the Sobolev order p = 3 on the 2-sphere is truncated
# automatically so that the dropped tail is certified below 1e-8.
k = zonal_green(space_params("sphere", 2), p=3.0)
print(f"\nS^2, p = 3: truncated at degree {k.ell_max}, tail bound {k.tail_bound:.2e}")
for t in np.linspace(-1, 1, 5):
    print(f"   psi({t:+.2f}) = {kernel_eval(k, t):.6f}")
