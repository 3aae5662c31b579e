"""Counting solutions of Dirac f = grad H(f) against SB(T^n) = 2^n.

A small Hamiltonian on W = T^2 (r = 1, time circle) has its four critical
points as constant solutions; the multistart search recovers them and
checks them at a finer truncation.  A Hamiltonian with a flat direction on
T^4 gives circles of solutions, counted as clusters against CL(T^4) + 1.
"""
import numpy as np

from dirac_reduce import (
    ReducedProblem,
    SearchParams,
    TrigHamiltonian,
    build_module,
    find_critical_points,
    refine_and_verify,
)

H = TrigHamiltonian.cosine_sum([0.05, 0.05], r=1)
P = ReducedProblem(build_module(1), H, 4)
records, report = find_critical_points(P, SearchParams(rng_seed=0))
print(report.message)
for r in records:
    _, disp, _ = refine_and_verify(P, r, 2)
    print(f"  w = {np.round(P.wrap(r.g[:2]), 6)}  action {r.action:+.4f}  "
          f"index window {r.morse_index_window}  min|eig| {r.hessian_min_abs_eigenvalue:.3f}  "
          f"refinement displacement {disp:.1e}")

# Degenerate example (about half a minute): no cosine in w4.
H = TrigHamiltonian.cosine_sum([0.05, 0.05, 0.05, 0.0], r=2)
P = ReducedProblem(build_module(2), H, 3)
records, report = find_critical_points(P, SearchParams(rng_seed=0))
print(report.message, f"({report.points} points)")
