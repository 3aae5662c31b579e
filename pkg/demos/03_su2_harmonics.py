"""Harmonic analysis on SU(2) and the Dirac operator on quaternion-valued maps.

Matrix coefficients of the degree-k representations give an orthonormal
basis (Peter-Weyl); on each degree the Dirac operator has eigenvalues k
and -(k+2).
"""
import numpy as np

from dirac_reduce import SU2Field, build_module, su2

nodes, weights = su2.haar_quadrature(6)
print(f"Haar rule: {len(nodes)} nodes, weights sum to {weights.sum():.15f}")
for k in range(4):
    T = su2.schur_orthonormal_basis(k)(nodes)
    gram = (T.conj().T * weights) @ T
    print(f"k = {k}: Gram defect {np.abs(gram - np.eye(len(gram))).max():.1e}")

m = build_module(3)
for k in range(1, 6):
    ev = np.unique(np.round(np.linalg.eigvalsh(su2.dirac_matrix(m, k)), 10))
    print(f"k = {k}: eigenvalues {ev}")

# The spectral operator agrees with differentiating along the one-parameter flows.
rng = np.random.default_rng(1)
f = SU2Field.random(m, 4, rng)
x = su2.random_points(rng, 5)
lhs = su2.haar_synthesize_field(su2.dirac_apply_su2(f), x)
print("spectral vs flow differences:", np.abs(lhs - su2.dirac_pointwise_oracle(f, x)).max())
