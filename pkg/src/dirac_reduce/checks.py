"""Numerical self-checks of the spectral machinery, shared by the CLI and tests."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import su2, torus
from .clifford import CliffordModule


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tol)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<46s} {self.value:10.3e}  (tol {self.tol:.0e})"


def identity_checks(module: CliffordModule) -> list[Check]:
    """One failing check per violated identity, or a single passing one."""
    bad = module.violations()
    if not bad:
        return [Check("module identities", 0.0, 0.0)]
    return [Check(f"module identity: {name}", float("inf"), 0.0) for name in bad]


def torus_checks(module: CliffordModule, k_max: int = 5, seed: int = 0) -> list[Check]:
    out = identity_checks(module)
    if not out[0].passed:
        return out
    r = module.r
    modes = torus.canonical_modes(r, 1, k_max + 1)
    modes = modes[np.linalg.norm(modes, axis=1) <= k_max + 1e-12]
    fd = inv = nrm = 0.0
    for k in modes:
        A = torus.dirac_block(module, k)
        Ainv = torus.dirac_block_inverse(module, k)
        fd = max(fd, np.abs(A - torus.dirac_block_oracle(module, k)).max())
        inv = max(inv, np.abs(A @ Ainv - np.eye(len(A))).max())
        nrm = max(nrm, abs(np.linalg.norm(Ainv, 2) - 1 / (2 * np.pi * np.linalg.norm(k))))
    out += [Check("block vs finite-difference oracle", fd, 1e-8),
            Check("A A^-1 = I", inv, 1e-12),
            Check("|A^-1| = 1/(2 pi |k|)", nrm, 1e-10)]
    rng = np.random.default_rng(seed)
    N = min(k_max + 1, 6)
    f = torus.TorusField.random(module, N, rng)
    g = torus.TorusField.random(module, N, rng)
    G = 4 * N
    vals = torus.synthesize(f, G)
    back = torus.analyze(module, vals, N)
    rt = max(np.abs(back.coeffs - f.coeffs).max(), np.abs(back.mean - f.mean).max())
    pars = abs(np.mean(np.sum(vals**2, axis=-1)) - torus.l2_norm(f) ** 2)
    sa = abs(torus.l2_inner(torus.dirac_apply(f), g) - torus.l2_inner(f, torus.dirac_apply(g)))
    app = np.abs(torus.synthesize(torus.dirac_apply(f), G) - torus.dirac_apply_oracle(f, G)).max()
    out += [Check("synthesis/analysis round trip", rt, 1e-12),
            Check("Parseval", pars, 1e-10),
            Check("self-adjointness", sa, 1e-9),
            Check("dirac_apply vs FFT oracle", app, 1e-8)]
    return out


def su2_checks(module: CliffordModule, k_max: int = 8, seed: int = 0, fields: int = 5) -> list[Check]:
    out = identity_checks(module)
    if not out[0].passed:
        return out
    if module.r != 3 or not module.hyperkahler:
        return out + [Check("hyperkahler structure", float("inf"), 0.0)]
    lie = spec = inv = 0.0
    for k in range(1, k_max + 1):
        A = su2.dirac_matrix(module, k)
        lie = max(lie, np.abs(A - su2.dirac_matrix_lie(module, k)).max())
        ev = np.linalg.eigvalsh(A)
        target = np.where(ev > 0, k, -(k + 2))
        spec = max(spec, np.abs(ev - target).max())
        inv = max(inv, abs(np.linalg.norm(np.linalg.inv(A), 2) - 1 / k))
    out += [Check("closed-form blocks vs Lie-derivative assembly", lie, 1e-12),
            Check("spectrum {k, -(k+2)}", spec, 1e-9),
            Check("|A^-1| = 1/k", inv, 1e-9)]
    kq = min(k_max, 3)
    nodes, w = su2.haar_quadrature(2 * kq)
    gram = 0.0
    for k in range(kq + 1):
        T = su2.schur_orthonormal_basis(k)(nodes)
        gram = max(gram, np.abs((T.conj().T * w) @ T - np.eye(T.shape[1])).max())
    out.append(Check("Schur orthonormality (Gram = I)", gram, 1e-8))
    rng = np.random.default_rng(seed)
    N = 4
    nodes, w = su2.quadrature_for(N, 2)
    rt = pars = sa = app = 0.0
    for _ in range(fields):
        f = su2.SU2Field.random(module, N, rng)
        g = su2.SU2Field.random(module, N, rng)
        vals = su2.haar_synthesize_field(f, nodes)
        back = su2.haar_analyze_field(module, vals, nodes, w, N)
        rt = max(rt, np.abs(back.coeffs - f.coeffs).max(), np.abs(back.mean - f.mean).max())
        pars = max(pars, abs(w @ np.sum(vals**2, axis=1) - su2.l2_inner_su2(f, f)))
        sa = max(sa, abs(su2.l2_inner_su2(su2.dirac_apply_su2(f), g) - su2.l2_inner_su2(f, su2.dirac_apply_su2(g))))
        x = su2.random_points(rng, 8)
        app = max(app, np.abs(su2.haar_synthesize_field(su2.dirac_apply_su2(f), x)
                              - su2.dirac_pointwise_oracle(f, x)).max())
    out += [Check("synthesis/analysis round trip", rt, 1e-12),
            Check("Parseval", pars, 1e-10),
            Check("self-adjointness", sa, 1e-9),
            Check("dirac_apply_su2 vs Lie-derivative oracle", app, 1e-5)]
    return out
