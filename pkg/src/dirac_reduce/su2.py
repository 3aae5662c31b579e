"""Peter-Weyl analysis on SU(2) and the block form of the Dirac operator.

Conventions
-----------
* A point of SU(2) is a unit quaternion q = (q0, q1, q2, q3), identified with
  the matrix q0 I + q1 v1 + q2 v2 + q3 v3 where v1 = [[0, i], [i, 0]],
  v2 = [[0, -1], [1, 0]], v3 = [[i, 0], [0, -i]] (so v1 v2 = v3, as i j = k).
* P_k = homogeneous polynomials of degree k in (z1, z2), x.p = p o x^{-1},
  e_a = z1^a z2^(k-a), invariant product <e_a, e_b> = delta_ab a! (k-a)!.
* Matrix coefficients use the product antilinear in its *first* slot:
  e_ab(x) = <x.e_a, e_b> = conj(coefficient of e_b in x.e_a) * |e_b|^2,
  and we expose the unitary normalization u_ab = e_ab / (|e_a| |e_b|).
  With this choice the Dirac operator has exactly the block layout of the
  closed-form blocks: k*I on u_{a,0} V, and 2x2 blocks on
  u_ab V0 + u_{k-a,k-b+1} V2 and u_ab V1 + u_{k-a,k-b+1} V3.
* Right-invariant fields: L_v f(x) = d/ds f(exp(s v) x) at s = 0.
* A field is f(x) = mean + sum_{k,a,b} phi_kab(x) . c_kab with
  phi_kab = sqrt(k+1) u_kab (L2-orthonormal under the probability Haar
  measure) and the complex scalar acting on V through J3.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial, sqrt

import numpy as np

from .clifford import CliffordModule, quaternionic_split
from .exceptions import FrequencyBelowCutoffError, NotHyperkahlerError

V_AT_IDENTITY = (
    np.array([[0, 1j], [1j, 0]]),
    np.array([[0, -1], [1, 0]], dtype=complex),
    np.array([[1j, 0], [0, -1j]]),
)


class InsufficientQuadratureWarning(UserWarning):
    pass


# -- points -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SU2Point:
    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(4)
        if abs(np.linalg.norm(q) - 1.0) > 1e-12:
            raise ValueError("SU2Point needs a unit quaternion")
        object.__setattr__(self, "q", q)

    @property
    def matrix(self) -> np.ndarray:
        return quat_to_matrix(self.q)


def quat_to_matrix(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    q0, q1, q2, q3 = np.moveaxis(q, -1, 0)
    out = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = q0 + 1j * q3
    out[..., 0, 1] = -q2 + 1j * q1
    out[..., 1, 0] = q2 + 1j * q1
    out[..., 1, 1] = q0 - 1j * q3
    return out


def quat_mult(p, q) -> np.ndarray:
    p, q = np.asarray(p, float), np.asarray(q, float)
    a0, a1, a2, a3 = np.moveaxis(p, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(q, -1, 0)
    return np.stack([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ], axis=-1)


def flow(l: int, s: float, q) -> np.ndarray:
    """exp(s v_l) x for the right-invariant field v_l (1-based l)."""
    e = np.zeros(4)
    e[0] = np.cos(s)
    e[l] = np.sin(s)
    return quat_mult(e, q)


def random_points(rng, size: int) -> np.ndarray:
    q = rng.standard_normal((size, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def _as_quat(x) -> np.ndarray:
    if isinstance(x, SU2Point):
        return x.q
    return np.asarray(x, dtype=float)


# -- matrix coefficients -----------------------------------------------------

@lru_cache(maxsize=None)
def _norm_ratio(k: int) -> np.ndarray:
    nrm = np.array([sqrt(factorial(a) * factorial(k - a)) for a in range(k + 1)])
    return nrm[None, :] / nrm[:, None]  # |e_b| / |e_a|


def coefficient_matrix(k: int, x) -> np.ndarray:
    """All normalized coefficients u_ab(x), shape x.shape[:-1] + (k+1, k+1)."""
    q = _as_quat(x)
    alpha = q[..., 0] + 1j * q[..., 3]
    beta = q[..., 2] + 1j * q[..., 1]
    # conj of p(x^{-1} z): (alpha z1 + beta z2)^a (-conj(beta) z1 + conj(alpha) z2)^(k-a)
    A = alpha[..., None] ** np.arange(k + 1)
    Bt = beta[..., None] ** np.arange(k + 1)
    C = (-np.conj(beta))[..., None] ** np.arange(k + 1)
    D = np.conj(alpha)[..., None] ** np.arange(k + 1)
    out = np.zeros(q.shape[:-1] + (k + 1, k + 1), dtype=complex)
    for a in range(k + 1):
        for j in range(a + 1):
            left = comb(a, j) * A[..., j] * Bt[..., a - j]
            for i in range(k - a + 1):
                out[..., a, j + i] += left * comb(k - a, i) * C[..., i] * D[..., k - a - i]
    return out * _norm_ratio(k)


def matrix_coeff(k: int, a: int, b: int, x):
    """Normalized matrix coefficient u^(k)_ab(x); u(e) = delta_ab."""
    if not (0 <= a <= k and 0 <= b <= k):
        raise IndexError(f"indices ({a}, {b}) out of range for k = {k}")
    return coefficient_matrix(k, x)[..., a, b]


def su2_modes(lo: int, hi: int) -> np.ndarray:
    """(k, a, b) for lo <= k < hi (k >= 1), ordered by k, a, b."""
    rows = [(k, a, b) for k in range(max(lo, 1), hi) for a in range(k + 1) for b in range(k + 1)]
    return np.array(rows, dtype=int).reshape(-1, 3)


def basis_table(x, lo: int, hi: int) -> np.ndarray:
    """phi_kab(x) = sqrt(k+1) u_kab(x) for every mode of the band; shape (..., modes)."""
    q = _as_quat(x)
    cols = []
    for k in range(max(lo, 1), hi):
        cols.append(sqrt(k + 1) * coefficient_matrix(k, q).reshape(q.shape[:-1] + (-1,)))
    if not cols:
        return np.zeros(q.shape[:-1] + (0,), dtype=complex)
    return np.concatenate(cols, axis=-1)


def schur_orthonormal_basis(k: int):
    """Callable x -> (..., (k+1)^2) complex values sqrt(k+1) u_ab, an L2-orthonormal family.

    Real parts and imaginary parts are the real scalar functions; on V-valued
    fields the imaginary unit is realized by J3.
    """
    if k == 0:
        return lambda x: np.ones(_as_quat(x).shape[:-1] + (1,), dtype=complex)
    return lambda x: sqrt(k + 1) * coefficient_matrix(k, x).reshape(_as_quat(x).shape[:-1] + (-1,))


# -- Lie derivatives ------------------------------------------------------

@lru_cache(maxsize=None)
def lie_matrix(k: int, l: int) -> np.ndarray:
    """D with L_{v_l} u_ab = sum_b' D[b, b'] u_ab' (independent of a).

    From the infinitesimal action on monomials,
    d/ds p(exp(-s v) z) = -(a v11 + (k-a) v22) e_a - a v12 e_{a-1} - (k-a) v21 e_{a+1}.
    """
    v = V_AT_IDENTITY[l - 1]
    m = k + 1
    M = np.zeros((m, m), dtype=complex)
    for b in range(m):
        M[b, b] -= b * v[0, 0] + (k - b) * v[1, 1]
        if b > 0:
            M[b - 1, b] -= b * v[0, 1]
        if b < k:
            M[b + 1, b] -= (k - b) * v[1, 0]
    # first-slot antilinear product: L u_ab = -sum_b' M[b', b] (|e_b'| / |e_b|) u_ab'
    D = -M.T * _norm_ratio(k)
    D.setflags(write=False)
    return D


def lie_derivative_oracle(l: int, k: int, a: int, b: int, x, h: float = 1e-6):
    """Central difference of s -> u_ab(exp(s v_l) x) at s = 0."""
    q = _as_quat(x)
    return (matrix_coeff(k, a, b, flow(l, h, q)) - matrix_coeff(k, a, b, flow(l, -h, q))) / (2 * h)


def _require_hk(module: CliffordModule):
    if module.r != 3 or not module.hyperkahler or module.violations():
        raise NotHyperkahlerError("the SU(2) Dirac operator needs a valid hyperkahler module")


def _scalar(z: complex, J3: np.ndarray) -> np.ndarray:
    return z.real * np.eye(J3.shape[0]) + z.imag * J3


def dirac_matrix_lie(module: CliffordModule, k: int) -> np.ndarray:
    """Matrix of sum_l J_l L_{v_l} on F_k assembled from the Lie-algebra action.

    Independent of the closed-form blocks; uses conj(u_ab) = (-1)^(a+b) u_{k-a,k-b}
    and J_l (z . v) = conj(z) . J_l v for l = 1, 2.
    """
    _require_hk(module)
    n, m = module.n, k + 1
    J1, J2, J3 = module.J
    out = np.zeros((m * m * n, m * m * n))

    def blk(a, b):
        s = (a * m + b) * n
        return slice(s, s + n)

    for l, Jl in ((1, J1), (2, J2), (3, J3)):
        D = lie_matrix(k, l)
        for a in range(m):
            for b in range(m):
                for bb in range(m):
                    z = D[b, bb]
                    if z == 0:
                        continue
                    if l == 3:
                        out[blk(a, bb), blk(a, b)] += J3 @ _scalar(z, J3)
                    else:
                        zc = np.conj(z) * (-1) ** (a + bb)
                        out[blk(k - a, k - bb), blk(a, b)] += _scalar(zc, J3) @ Jl
    return out


def closed_form_block(k: int, a: int, b: int, part: str = "ii") -> np.ndarray:
    """2x2 block (in the orthonormal basis) on u_ab V0 + u_{k-a,k-b+1} V2 ("ii")
    or u_ab V1 + u_{k-a,k-b+1} V3 ("iii"), for 1 <= b <= k."""
    if not 1 <= b <= k:
        raise ValueError("paired blocks exist for 1 <= b <= k")
    s = (-1) ** (a + b) if part == "ii" else (-1) ** (a + b + 1)
    d = 2.0 * sqrt(b * (k - b + 1))
    return np.array([[k - 2 * b, s * d], [s * d, 2 * b - k - 2]], dtype=float)


_DIRAC_CACHE: dict = {}


def dirac_matrix(module: CliffordModule, k: int) -> np.ndarray:
    """Matrix of the Dirac operator on F_k (coefficients ordered (a, b, component)).

    Built from the block decomposition: k I on u_{a,0} V, and the 2x2
    blocks of :func:`closed_form_block` on the quaternionic split V0..V3.
    """
    key = (id(module), k)
    hit = _DIRAC_CACHE.get(key)
    if hit is not None and hit[0] is module:
        return hit[1]
    _require_hk(module)
    V0, V1, V2, V3 = quaternionic_split(module)
    n, m = module.n, k + 1
    out = np.zeros((m * m * n, m * m * n))

    def blk(a, b):
        s = (a * m + b) * n
        return slice(s, s + n)

    for a in range(m):
        out[blk(a, 0), blk(a, 0)] += k * np.eye(n)
        for b in range(1, m):
            P, R = blk(a, b), blk(k - a, k - b + 1)
            for (X, Y), part in (((V0, V2), "ii"), ((V1, V3), "iii")):
                B = closed_form_block(k, a, b, part)
                out[P, P] += B[0, 0] * X @ X.T
                out[P, R] += B[0, 1] * X @ Y.T
                out[R, P] += B[1, 0] * Y @ X.T
                out[R, R] += B[1, 1] * Y @ Y.T
    out.setflags(write=False)
    _DIRAC_CACHE[key] = (module, out)
    return out


class SU2Operator:
    """Per-degree application of the Dirac matrix (and its inverse) to coefficient arrays."""

    def __init__(self, module: CliffordModule, lo: int, hi: int):
        _require_hk(module)
        self.module = module
        self.ks = list(range(max(lo, 1), hi))
        self.slices = []
        start = 0
        for k in self.ks:
            size = (k + 1) ** 2
            self.slices.append(slice(start, start + size))
            start += size
        self.size = start

    def apply(self, C: np.ndarray) -> np.ndarray:
        out = np.empty_like(C)
        for k, sl in zip(self.ks, self.slices):
            out[sl] = (dirac_matrix(self.module, k) @ C[sl].reshape(-1)).reshape(-1, C.shape[1])
        return out

    def apply_inverse(self, C: np.ndarray) -> np.ndarray:
        # spectrum {k, -(k+2)} gives A^2 + 2A = k(k+2) I, so A^{-1} = (A + 2I) / (k(k+2))
        out = np.empty_like(C)
        for k, sl in zip(self.ks, self.slices):
            v = C[sl].reshape(-1)
            out[sl] = ((dirac_matrix(self.module, k) @ v + 2 * v) / (k * (k + 2))).reshape(-1, C.shape[1])
        return out


# -- fields -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SU2Field:
    """mean in R^n plus coefficients c_kab (w.r.t. sqrt(k+1) u_kab) for 1 <= k < N."""

    module: CliffordModule
    N: int
    mean: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", np.array(self.mean, dtype=float).reshape(self.module.n))
        object.__setattr__(self, "coeffs", np.array(self.coeffs, dtype=float).reshape(len(self.modes), self.module.n))

    @property
    def modes(self) -> np.ndarray:
        return su2_modes(1, self.N)

    @classmethod
    def zeros(cls, module: CliffordModule, N: int, mean=None) -> "SU2Field":
        mean = np.zeros(module.n) if mean is None else mean
        return cls(module, N, mean, np.zeros((len(su2_modes(1, N)), module.n)))

    @classmethod
    def random(cls, module: CliffordModule, N: int, rng, scale: float = 1.0) -> "SU2Field":
        M = len(su2_modes(1, N))
        return cls(module, N, rng.uniform(0, 1, module.n), scale * rng.standard_normal((M, module.n)))

    def embed(self, N: int) -> "SU2Field":
        out = SU2Field.zeros(self.module, N, self.mean)
        c = out.coeffs.copy()
        m = min(len(c), len(self.coeffs))
        c[:m] = self.coeffs[:m]
        return SU2Field(self.module, N, self.mean, c)

    def __add__(self, other: "SU2Field") -> "SU2Field":
        if other.N != self.N:
            raise ValueError("fields must share the truncation")
        return SU2Field(self.module, self.N, self.mean + other.mean, self.coeffs + other.coeffs)

    def scaled(self, s: float) -> "SU2Field":
        return SU2Field(self.module, self.N, s * self.mean, s * self.coeffs)

    def to_json(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "coeffs": [{"k": int(k), "a": int(a), "b": int(b), "v": v.tolist()}
                       for (k, a, b), v in zip(self.modes, self.coeffs)],
            "N": self.N,
        }

    @classmethod
    def from_json(cls, obj: dict, module: CliffordModule) -> "SU2Field":
        f = cls.zeros(module, int(obj["N"]), obj["mean"])
        index = {tuple(m): i for i, m in enumerate(f.modes)}
        c = f.coeffs.copy()
        for entry in obj["coeffs"]:
            key = (int(entry["k"]), int(entry["a"]), int(entry["b"]))
            if key not in index:
                raise ValueError(f"mode {key} outside truncation N = {f.N}")
            c[index[key]] = entry["v"]
        return cls(module, f.N, f.mean, c)


def dirac_apply_su2(field: SU2Field) -> SU2Field:
    op = SU2Operator(field.module, 1, field.N)
    return SU2Field(field.module, field.N, np.zeros(field.module.n), op.apply(field.coeffs))


def dirac_inverse_tail_su2(module: CliffordModule, coeffs, N: int, N_hi: int, lo: int | None = None) -> np.ndarray:
    """Inverse Dirac on a tail holding the modes lo <= k < N_hi (lo defaults to N)."""
    lo = N if lo is None else lo
    if lo < N:
        raise FrequencyBelowCutoffError(f"tail starts at k = {lo} < N = {N}")
    return SU2Operator(module, lo, N_hi).apply_inverse(np.asarray(coeffs, float))


def l2_inner_su2(a: SU2Field, b: SU2Field) -> float:
    if a.N != b.N or a.module.n != b.module.n:
        raise ValueError("fields must share module and N")
    return float(a.mean @ b.mean + np.sum(a.coeffs * b.coeffs))


# -- Haar quadrature ---------------------------------------------------------

def haar_quadrature(kmax: int):
    """Nodes (unit quaternions) and weights integrating u . conj(u') exactly for k, k' <= kmax.

    Hopf coordinates alpha = cos(chi) e^{i xi}, beta = sin(chi) e^{i eta}:
    Haar is uniform in (cos 2 chi, xi, eta).  Products of degree <= 2 kmax
    have angular frequencies <= 2 kmax (trapezoid with 2 kmax + 1 points) and
    are polynomials of degree <= kmax in cos 2 chi after the angular
    integrals (Gauss-Legendre with kmax // 2 + 1 points).
    """
    M = 2 * kmax + 1
    nu = kmax // 2 + 1
    u, wu = np.polynomial.legendre.leggauss(nu)
    ang = 2 * np.pi * np.arange(M) / M
    U, XI, ETA = np.meshgrid(u, ang, ang, indexing="ij")
    W = np.broadcast_to((wu / 2)[:, None, None], U.shape) / (M * M)
    ca = np.sqrt((1 + U) / 2)
    sb = np.sqrt((1 - U) / 2)
    q = np.stack([ca * np.cos(XI), sb * np.sin(ETA), sb * np.cos(ETA), ca * np.sin(XI)], axis=-1)
    return q.reshape(-1, 4), W.reshape(-1).copy()


def write_quadrature_csv(path, nodes, weights) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["q0", "q1", "q2", "q3", "weight"])
        for q, wt in zip(nodes, weights):
            w.writerow([repr(float(x)) for x in q] + [repr(float(wt))])


def haar_synthesize(module: CliffordModule, mean, coeffs, table: np.ndarray) -> np.ndarray:
    """Values mean + sum phi . c at the nodes of ``table`` (nodes x modes)."""
    C = np.asarray(coeffs, float)
    J3 = module.J[2]
    return np.asarray(mean, float) + table.real @ C + table.imag @ (C @ J3.T)


def haar_analyze(module: CliffordModule, values, table: np.ndarray, weights) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature projection onto the mean and the modes of ``table``."""
    wv = np.asarray(weights)[:, None] * values
    J3 = module.J[2]
    return wv.sum(axis=0), table.real.T @ wv - (table.imag.T @ wv) @ J3.T


def haar_synthesize_field(field: SU2Field, nodes) -> np.ndarray:
    return haar_synthesize(field.module, field.mean, field.coeffs, basis_table(nodes, 1, field.N))


def haar_analyze_field(module: CliffordModule, values, nodes, weights, N: int) -> SU2Field:
    mean, C = haar_analyze(module, values, basis_table(nodes, 1, N), weights)
    return SU2Field(module, N, mean, C)


def quadrature_for(N: int, oversample: int = 1):
    """Quadrature exact for fields with modes below N (times ``oversample``)."""
    kmax = max(oversample * (N - 1), 0)
    return haar_quadrature(kmax)


def check_quadrature(N: int, nodes_kmax: int) -> None:
    if nodes_kmax < N - 1:
        warnings.warn(f"quadrature exact to k={nodes_kmax} is insufficient for N={N}",
                      InsufficientQuadratureWarning, stacklevel=2)


def dirac_pointwise_oracle(field: SU2Field, x, h: float = 1e-6) -> np.ndarray:
    """sum_l J_l L_{v_l} f at the points x via central differences along the flows."""
    q = _as_quat(x)
    out = np.zeros(q.shape[:-1] + (field.module.n,))
    for l in (1, 2, 3):
        fp = haar_synthesize_field(field, flow(l, h, q))
        fm = haar_synthesize_field(field, flow(l, -h, q))
        out += ((fp - fm) / (2 * h)) @ field.module.J[l - 1].T
    return out
