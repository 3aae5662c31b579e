"""Finite-dimensional reduction of the action functional.

A field f = g + h is split into g in E_N = W x F_N (mean plus modes of
degree < N) and a tail h with modes N <= degree < N_tail.  For fixed g the
tail is the fixed point of

    h -> Dirac_N^{-1} P_N^perp grad H(g + h),

which is a contraction once hess_sup_bound(H) / gap(N) < 1 (gap = 2 pi N on
tori, N on SU(2)).  The generating function is Phi(g) = A_H(g + h(g)) with
the quadratic part taken as 1/2 <Dirac f, f>, so that grad Phi(g) =
Dirac g - P_N grad H(g + h(g)) exactly.

All integrals over M use the discretization held by :class:`ReducedProblem`
(uniform grid on T^r, Hopf product rule on SU(2)).  Synthesis and analysis
are exact adjoints under that quadrature, so the formulas above are the
exact derivatives of the discrete functional whatever the aliasing.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import su2, torus
from .clifford import CliffordModule
from .exceptions import (
    ContractionError,
    FixedPointNotConvergedError,
    InvalidModuleError,
    NotHyperkahlerError,
)
from .hamiltonian import TrigHamiltonian


class QuadratureWarning(UserWarning):
    pass


# -- discretizations ------------------------------------------------------------

class _TorusSpace:
    kind = "torus"

    def __init__(self, module: CliffordModule, N: int, N_hi: int, G: int):
        r = module.r
        self.module, self.n, self.N, self.N_hi, self.G = module, module.n, N, N_hi, G
        self.modes = torus.pair_modes(r, 1, N_hi)
        self.n_low = len(torus.pair_modes(r, 1, N))
        self.op = torus.PairOperator(module, torus.canonical_modes(r, 1, N_hi))
        self.tail_op = torus.PairOperator(module, torus.canonical_modes(r, N, N_hi))
        self.times = torus.grid_points(r, G).reshape(-1, r)
        self.weights = np.full(len(self.times), 1.0 / len(self.times))
        self.gap = 2 * np.pi * N
        if G < 2 * N_hi - 1:
            warnings.warn(f"grid G={G} is too coarse for modes below {N_hi}", QuadratureWarning, stacklevel=3)

    def synth(self, mean, C):
        vals = torus.synthesize_coeffs(self.module, mean, C, self.modes, self.G)
        return vals.reshape(-1, self.n)

    def analyze(self, values):
        shape = (self.G,) * self.module.r + (self.n,)
        return torus.analyze_coeffs(self.module, values.reshape(shape), self.modes)

    def field(self, mean, C, N=None):
        return torus.TorusField(self.module, N or self.N_hi, mean, C)


class _SU2Space:
    kind = "su2"

    def __init__(self, module: CliffordModule, N: int, N_hi: int, kmax: int):
        self.module, self.n, self.N, self.N_hi, self.kmax = module, module.n, N, N_hi, kmax
        self.modes = su2.su2_modes(1, N_hi)
        self.n_low = len(su2.su2_modes(1, N))
        self.op = su2.SU2Operator(module, 1, N_hi)
        self.tail_op = su2.SU2Operator(module, N, N_hi)
        self.times, self.weights = su2.haar_quadrature(kmax)
        self.table = su2.basis_table(self.times, 1, N_hi)
        self.gap = float(N)
        if kmax < N_hi - 1:
            warnings.warn(f"quadrature exact to k={kmax} is too coarse for modes below {N_hi}",
                          QuadratureWarning, stacklevel=3)

    def synth(self, mean, C):
        return su2.haar_synthesize(self.module, mean, C, self.table)

    def analyze(self, values):
        return su2.haar_analyze(self.module, values, self.table, self.weights)

    def field(self, mean, C, N=None):
        return su2.SU2Field(self.module, N or self.N_hi, mean, C)


# -- problem -----------------------------------------------------------------

class ReducedProblem:
    """Everything defining Phi on E_N: module, Hamiltonian, truncation, lattice, quadrature.

    Parameters
    ----------
    module : CliffordModule
    H : TrigHamiltonian
    N : int
        Truncation degree of the base E_N.
    domain : {"torus", "su2"}
    lattice : (n, n) array, optional
        Basis of the target lattice as columns (identity by default).
    N_tail : int, optional
        Upper end of the working tail band; defaults to 2N + time band of H.
    grid : int, optional
        Torus: grid points per axis (default 4 N_tail).  SU(2): degree to
        which the Haar rule is exact (default ``oversample * (N_tail - 1)``).
    """

    def __init__(self, module: CliffordModule, H: TrigHamiltonian, N: int, domain: str = "torus",
                 lattice=None, N_tail: int | None = None, grid: int | None = None, oversample: int = 2,
                 fixed_point_tol: float = 1e-12, max_fixed_point_iters: int = 200):
        if domain not in ("torus", "su2"):
            raise ValueError(f"domain must be 'torus' or 'su2', got {domain!r}")
        if domain == "su2" and (module.r != 3 or not module.hyperkahler):
            raise NotHyperkahlerError("the SU(2) domain needs a hyperkahler module (r = 3, J1 J2 = J3)")
        bad = module.violations()
        if bad:
            raise InvalidModuleError("module violates: " + "; ".join(bad))
        if H.n != module.n:
            raise ValueError(f"Hamiltonian target dimension {H.n} != module dimension {module.n}")
        if H.time_domain != domain:
            raise ValueError(f"Hamiltonian time domain {H.time_domain!r} != problem domain {domain!r}")
        if domain == "torus" and H.r not in (None, module.r):
            raise ValueError(f"Hamiltonian time torus has r = {H.r}, module has r = {module.r}")
        if N < 1:
            raise ValueError("N must be at least 1")
        self.module = module
        self.H = H
        self.N = int(N)
        self.domain = domain
        self.lattice = np.eye(module.n) if lattice is None else np.asarray(lattice, dtype=float)
        if not H.is_lattice_periodic(self.lattice):
            raise ValueError("Hamiltonian frequencies are not in the dual lattice")
        self.N_tail = int(N_tail) if N_tail is not None else 2 * self.N + H.time_band()
        if self.N_tail <= self.N:
            raise ValueError("N_tail must exceed N")
        self.oversample = int(oversample)
        if grid is None:
            grid = 4 * self.N_tail if domain == "torus" else max(2, self.oversample * (self.N_tail - 1))
        self.grid = int(grid)
        self.fixed_point_tol = float(fixed_point_tol)
        self.max_fixed_point_iters = int(max_fixed_point_iters)
        if self.contraction_bound >= 1.0:
            raise ContractionError(
                f"contraction certificate fails: hess_sup_bound/gap = {self.contraction_bound:.4g} >= 1 at N = {N}")

    # -- derived ----------------------------------------------------------------
    @property
    def n(self) -> int:
        return self.module.n

    @property
    def gap(self) -> float:
        return 2 * np.pi * self.N if self.domain == "torus" else float(self.N)

    @property
    def contraction_bound(self) -> float:
        """hess_sup_bound(H) / gap(N), the certified Lipschitz constant of the fiber map."""
        return self.H.hess_sup_bound() / self.gap

    def _space(self, N_hi: int, grid: int):
        if self.domain == "torus":
            return _TorusSpace(self.module, self.N, N_hi, grid)
        return _SU2Space(self.module, self.N, N_hi, grid)

    @cached_property
    def space(self):
        return self._space(self.N_tail, self.grid)

    @cached_property
    def time_factors(self) -> np.ndarray:
        return self.H.time_factors(self.space.times)

    @cached_property
    def residual_space(self):
        """A finer discretization (band 2 N_tail, grid doubled) used for certification."""
        N_res = 2 * self.N_tail
        if self.domain == "torus":
            return _TorusSpace(self.module, self.N_tail, N_res, max(4 * N_res, 2 * self.grid))
        return _SU2Space(self.module, self.N_tail, N_res, max(self.oversample * (N_res - 1), 2 * self.grid))

    @cached_property
    def residual_time_factors(self) -> np.ndarray:
        return self.H.time_factors(self.residual_space.times)

    @property
    def n_low(self) -> int:
        return self.space.n_low

    @property
    def dim(self) -> int:
        """Real dimension of E_N (W directions first, then fiber coefficients)."""
        return self.n * (1 + self.n_low)

    def with_truncation(self, N: int, **overrides) -> "ReducedProblem":
        """Same problem at another truncation (tail and grid follow their defaults)."""
        kw = dict(domain=self.domain, lattice=self.lattice, oversample=self.oversample,
                  fixed_point_tol=self.fixed_point_tol, max_fixed_point_iters=self.max_fixed_point_iters)
        kw.update(overrides)
        return ReducedProblem(self.module, self.H, N, **kw)

    # -- coordinates -------------------------------------------------------------
    def split(self, g):
        g = np.asarray(g, dtype=float)
        if g.shape != (self.dim,):
            raise ValueError(f"reduced point must have shape ({self.dim},), got {g.shape}")
        return g[: self.n], g[self.n:].reshape(self.n_low, self.n)

    def join(self, mean, C_low) -> np.ndarray:
        return np.concatenate([np.asarray(mean, float).ravel(), np.asarray(C_low, float).ravel()])

    def wrap(self, w) -> np.ndarray:
        """Representative of w in the fundamental cell of the lattice."""
        x = np.linalg.solve(self.lattice, np.asarray(w, float))
        x = x - np.floor(x)
        x[x > 1.0 - 1e-12] -= 1.0
        return self.lattice @ x

    def lattice_delta(self, w1, w2) -> np.ndarray:
        """Shortest (in lattice coordinates) representative of w1 - w2 modulo the lattice."""
        x = np.linalg.solve(self.lattice, np.asarray(w1, float) - np.asarray(w2, float))
        return self.lattice @ (x - np.rint(x))

    def reduced_from_field(self, f) -> np.ndarray:
        """P_N of a field, as reduced coordinates."""
        mean, C = self.field_arrays(f, self.N_tail)
        return self.join(mean, C[: self.n_low])

    def field_arrays(self, f, N_hi: int):
        f = f.embed(N_hi)
        return f.mean, f.coeffs

    def assemble(self, g, h):
        mean, Cl = self.split(g)
        return self.space.field(mean, np.vstack([Cl, h]))

    def zero_tail(self) -> np.ndarray:
        return np.zeros((len(self.space.modes) - self.n_low, self.n))

    def __repr__(self) -> str:
        return (f"ReducedProblem(domain={self.domain!r}, n={self.n}, r={self.module.r}, N={self.N}, "
                f"N_tail={self.N_tail}, grid={self.grid}, contraction={self.contraction_bound:.3g})")


# -- fiber fixed point -------------------------------------------------------------

@dataclass
class FiberSolution:
    h: np.ndarray
    iterations: int
    step_ratios: list
    steps: list
    values: np.ndarray  # f = g + h at the quadrature nodes
    grad_mean: np.ndarray  # mean of grad H(f)
    grad_coeffs: np.ndarray  # analysis of grad H(f) on all modes below N_tail

    @property
    def max_step_ratio(self) -> float:
        return max(self.step_ratios) if self.step_ratios else 0.0


def solve_fiber(problem: ReducedProblem, g, h0=None) -> FiberSolution:
    """Unique fixed point h(g) of the tail map, by plain Picard iteration from h0 (zero by default)."""
    sp = problem.space
    mean, Cl = problem.split(g)
    h = problem.zero_tail() if h0 is None else np.array(h0, dtype=float)
    tf = problem.time_factors
    tol = problem.fixed_point_tol
    steps, ratios = [], []
    for it in range(1, problem.max_fixed_point_iters + 1):
        C = np.vstack([Cl, h])
        F = sp.synth(mean, C)
        gm, GC = sp.analyze(problem.H.grad_from_factors(tf, F))
        h_new = sp.tail_op.apply_inverse(GC[sp.n_low:])
        step = float(np.linalg.norm(h_new - h))
        if steps and steps[-1] > 100 * tol:
            ratio = step / steps[-1]
            ratios.append(ratio)
            if ratio >= 1.0:
                raise ContractionError(f"measured Picard step ratio {ratio:.4g} >= 1 at iteration {it}")
        steps.append(step)
        h = h_new
        if step < tol:
            break
    else:
        raise FixedPointNotConvergedError(
            f"fixed point not reached in {problem.max_fixed_point_iters} iterations (last step {steps[-1]:.3g})")
    C = np.vstack([Cl, h])
    F = sp.synth(mean, C)
    gm, GC = sp.analyze(problem.H.grad_from_factors(tf, F))
    return FiberSolution(h, it, ratios, steps, F, gm, GC)


@dataclass
class ReducedPoint:
    g: np.ndarray
    h: np.ndarray
    phi: float
    grad_phi: np.ndarray
    fiber: FiberSolution

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.grad_phi))


def evaluate(problem: ReducedProblem, g, h0=None) -> ReducedPoint:
    """Phi(g), grad Phi(g) and h(g) in one fiber solve."""
    g = np.asarray(g, dtype=float)
    sol = solve_fiber(problem, g, h0)
    sp = problem.space
    _, Cl = problem.split(g)
    C = np.vstack([Cl, sol.h])
    DC = sp.op.apply(C)
    quad = 0.5 * float(np.sum(DC * C))
    potential = float(sp.weights @ problem.H.value_from_factors(problem.time_factors, sol.values))
    grad = problem.join(-sol.grad_mean, DC[: sp.n_low] - sol.grad_coeffs[: sp.n_low])
    return ReducedPoint(g, sol.h, quad - potential, grad, sol)


def generating_value(problem: ReducedProblem, g) -> float:
    return evaluate(problem, g).phi


def generating_grad(problem: ReducedProblem, g) -> np.ndarray:
    return evaluate(problem, g).grad_phi


def generating_hess(problem: ReducedProblem, g, step: float = 1e-5, base: ReducedPoint | None = None) -> np.ndarray:
    """Central differences of grad Phi, symmetrized.

    Fiber solves for the shifted points start from h(g); the fixed point is
    unique, so the start only changes the iteration count.
    """
    g = np.asarray(g, dtype=float)
    base = base or evaluate(problem, g)
    d = problem.dim
    Hs = np.empty((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = step
        gp = evaluate(problem, g + e, base.h).grad_phi
        gm = evaluate(problem, g - e, base.h).grad_phi
        Hs[:, i] = (gp - gm) / (2 * step)
    return 0.5 * (Hs + Hs.T)


# -- actions and residual --------------------------------------------------------

def _dirac_field(f):
    if isinstance(f, torus.TorusField):
        return torus.dirac_apply(f)
    return su2.dirac_apply_su2(f)


def action_quadratic(problem: ReducedProblem, f) -> float:
    """1/2 <Dirac f, f>_{L2}; independent of the mean."""
    return 0.5 * float(np.sum(_dirac_field(f).coeffs * f.coeffs))


#: caps on the adaptive quadrature of action_total
MAX_TORUS_POINTS = 2**22
MAX_SU2_DEGREE = 96


def composition_band(problem: ReducedProblem, f) -> int:
    """Degree up to which H(t, f(t)) carries appreciable spectral content.

    Carson's rule for cos(2 pi nu . f): with modulation index
    beta = 2 pi |nu| * 3 |f - mean|_{L2} the content ends near
    (beta + 3) N_f, plus the time band of H.
    """
    nu_max = max((float(np.linalg.norm(t.nu)) for t in problem.H.terms), default=0.0)
    beta = 2 * np.pi * nu_max * 3 * float(np.linalg.norm(f.coeffs))
    return int(math.ceil((beta + 3) * f.N)) + problem.H.time_band()


def _quadrature_space(problem: ReducedProblem, f, refine: int):
    N_hi = max(f.N, problem.N + 1)
    band = composition_band(problem, f)
    if problem.domain == "torus":
        G = refine * max(problem.grid, 4 * N_hi, 2 * band + 2)
        G += G % 2
        cap = int(MAX_TORUS_POINTS ** (1.0 / problem.module.r))
        if G > cap:
            warnings.warn(f"quadrature capped at {cap} points per axis (wanted {G})", QuadratureWarning, stacklevel=3)
            G = cap - cap % 2
        return _TorusSpace(problem.module, problem.N, N_hi, G)
    kmax = refine * max(problem.grid, problem.oversample * (N_hi - 1), band)
    if kmax > MAX_SU2_DEGREE:
        warnings.warn(f"quadrature capped at degree {MAX_SU2_DEGREE} (wanted {kmax})", QuadratureWarning, stacklevel=3)
        kmax = MAX_SU2_DEGREE
    return _SU2Space(problem.module, problem.N, N_hi, kmax)


def action_total(problem: ReducedProblem, f, refine: int = 1) -> float:
    """1/2 <Dirac f, f> - integral of H(t, f(t)) over M (probability measure).

    The quadrature is sized from :func:`composition_band`; ``refine``
    multiplies its resolution.  A QuadratureWarning is issued when the
    size had to be capped.
    """
    sp = _quadrature_space(problem, f, refine)
    mean, C = problem.field_arrays(f, sp.N_hi)
    F = sp.synth(mean, C)
    tf = problem.H.time_factors(sp.times)
    return action_quadratic(problem, f) - float(sp.weights @ problem.H.value_from_factors(tf, F))


def residual_parts(problem: ReducedProblem, f) -> tuple[float, float]:
    """(in-band, discarded) L2 norms of Dirac f - grad H(f), on the refined discretization.

    In-band covers the mean and modes below N_tail; discarded is the norm
    of grad H(f) on N_tail <= degree < 2 N_tail, where Dirac f vanishes.
    """
    sp = problem.residual_space
    if f.N > problem.N_tail:
        raise ValueError(f"field truncation {f.N} exceeds N_tail = {problem.N_tail}")
    mean, C = problem.field_arrays(f, sp.N_hi)
    F = sp.synth(mean, C)
    gm, GC = sp.analyze(problem.H.grad_from_factors(problem.residual_time_factors, F))
    inband = sp.op.apply(C)[: sp.n_low] - GC[: sp.n_low]
    in_norm = math.sqrt(float(gm @ gm) + float(np.sum(inband**2)))
    return in_norm, float(np.linalg.norm(GC[sp.n_low:]))


def residual(problem: ReducedProblem, f) -> float:
    """Certified measure of solving Dirac f = grad H(f): in-band plus discarded-band norm."""
    a, b = residual_parts(problem, f)
    return a + b


def fiber_direction(problem: ReducedProblem, rng) -> np.ndarray:
    """Random unit vector in the fiber of E_N (zero W component)."""
    u = np.zeros(problem.dim)
    u[problem.n:] = rng.standard_normal(problem.dim - problem.n)
    return u / np.linalg.norm(u)


def quadratic_part(problem: ReducedProblem, g) -> tuple[float, np.ndarray]:
    """Phi_0(g) = 1/2 <Dirac g, g> and its gradient Dirac g, in reduced coordinates."""
    _, Cl = problem.split(g)
    C = np.vstack([Cl, problem.zero_tail()])
    DC = problem.space.op.apply(C)[: problem.n_low]
    return 0.5 * float(np.sum(DC * Cl)), problem.join(np.zeros(problem.n), DC)
