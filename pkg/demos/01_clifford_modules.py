"""Anti-commuting complex structures on R^n.

Builds the minimal module for r = 1..9, checks the identities and shows
the quaternion case used for SU(2).
"""
import numpy as np

from dirac_reduce import build_module, minimal_dimension, radon_hurwitz_bound
from dirac_reduce.clifford import pencil_symbol

for r in range(1, 10):
    m = build_module(r)
    print(f"r = {r}: n = {m.n} (bound on R^n allows {radon_hurwitz_bound(m.n)}), "
          f"violations: {m.violations() or 'none'}")

assert minimal_dimension(8) == 16

# Every nonzero combination of the structures is again a (scaled) complex structure.
m = build_module(3)
lam = np.array([0.3, -1.2, 0.5])
P = pencil_symbol(m, lam)
print("P^2 + |lam|^2 I =", np.abs(P @ P + lam @ lam * np.eye(4)).max())

# r = 3 is left multiplication by i, j, k on the quaternions.
J1, J2, J3 = m.J
print("hyperkahler:", m.hyperkahler, " J1 J2 == J3:", np.array_equal(J1 @ J2, J3))
