"""Spectral calculus for maps T^r -> W = V / lattice.

A field is stored as its mean (a representative in R^n) plus one V-vector
per nonzero frequency k with |k| < N, in the mode basis
``exp(2 pi k.t J) v`` with J = J_r.  Since exp(theta J) is a rotation these
modes are L2-orthonormal, so coefficient arrays carry the L2 metric.

Modes are kept in pair order: for the p-th canonical frequency k (first
nonzero component positive) row 2p holds -k and row 2p+1 holds +k, which
is the slot order of the 2n x 2n block A_{k*}.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .clifford import CliffordModule
from .exceptions import FrequencyBelowCutoffError, ZeroFrequencyError


class GridTooCoarseWarning(UserWarning):
    pass


def is_canonical(k) -> bool:
    for c in k:
        if c != 0:
            return c > 0
    return False


def canonical(k) -> tuple:
    """Representative of the pair {-k, k} whose first nonzero entry is positive."""
    k = tuple(int(c) for c in k)
    if not any(k):
        raise ZeroFrequencyError("k = 0 is the kernel mode")
    return k if is_canonical(k) else tuple(-c for c in k)


@lru_cache(maxsize=None)
def _canonical_modes(r: int, lo: int, hi: int) -> np.ndarray:
    lo2, hi2 = lo * lo, hi * hi
    span = range(-(hi - 1), hi) if hi > 0 else range(0)
    ks = [k for k in itertools.product(span, repeat=r)
          if is_canonical(k) and lo2 <= sum(c * c for c in k) < hi2]
    ks.sort(key=lambda k: (sum(c * c for c in k), k))
    out = np.array(ks, dtype=int).reshape(-1, r)
    out.setflags(write=False)
    return out


def canonical_modes(r: int, lo: int, hi: int) -> np.ndarray:
    """Canonical frequencies with lo <= |k| < hi (k != 0), sorted by |k| then lexicographically."""
    return _canonical_modes(int(r), max(int(lo), 0), int(hi))


def pair_modes(r: int, lo: int, hi: int) -> np.ndarray:
    """All frequencies of the band in pair order (-k, +k, -k', +k', ...)."""
    canon = canonical_modes(r, lo, hi)
    out = np.empty((2 * len(canon), r), dtype=int)
    out[0::2] = -canon
    out[1::2] = canon
    return out


def _offdiag(module: CliffordModule, k) -> np.ndarray:
    """J sum_{l<r} k_l J_l with J = J_r."""
    J = module.J[-1]
    s = np.zeros((module.n, module.n))
    for kl, Jl in zip(k[:-1], module.J[:-1]):
        s += kl * Jl
    return J @ s


def dirac_block(module: CliffordModule, k) -> np.ndarray:
    """The 2n x 2n block A_{k*} acting on (coefficient of -k, coefficient of +k)."""
    k = np.asarray(k, dtype=int)
    if k.shape != (module.r,):
        raise ValueError(f"frequency must have length r = {module.r}")
    if not k.any():
        raise ZeroFrequencyError("the Dirac operator has no block at k = 0")
    if not is_canonical(k):
        raise ValueError(f"frequency {tuple(k)} is not canonical (first nonzero entry must be positive)")
    n = module.n
    eye = np.eye(n)
    S = _offdiag(module, k)
    kr = k[-1]
    return 2 * np.pi * np.block([[kr * eye, -S], [S, -kr * eye]])


def dirac_block_inverse(module: CliffordModule, k) -> np.ndarray:
    """A_{k*}^{-1} = A_{k*} / (4 pi^2 |k|^2)."""
    A = dirac_block(module, k)
    return A / (4 * np.pi**2 * float(np.dot(k, k)))


class PairOperator:
    """Blockwise application of A_{k*} (or its inverse) to pair-ordered coefficient arrays."""

    def __init__(self, module: CliffordModule, canon: np.ndarray):
        self.module = module
        self.canon = np.asarray(canon, dtype=int)
        self.kr = self.canon[:, -1].astype(float) if len(self.canon) else np.zeros(0)
        self.S = np.array([_offdiag(module, k) for k in self.canon]).reshape(-1, module.n, module.n)
        self.knorm2 = (self.canon**2).sum(axis=1).astype(float)

    def apply(self, C: np.ndarray) -> np.ndarray:
        X, Y = C[0::2], C[1::2]
        SX = np.einsum("pij,pj->pi", self.S, X)
        SY = np.einsum("pij,pj->pi", self.S, Y)
        out = np.empty_like(C)
        out[0::2] = 2 * np.pi * (self.kr[:, None] * X - SY)
        out[1::2] = 2 * np.pi * (SX - self.kr[:, None] * Y)
        return out

    def apply_inverse(self, C: np.ndarray) -> np.ndarray:
        scale = np.repeat(1.0 / (4 * np.pi**2 * self.knorm2), 2)
        return self.apply(C) * scale[:, None]


@dataclass(frozen=True, eq=False)
class TorusField:
    """Truncated field: mean in R^n and coefficients on the modes 0 < |k| < N.

    ``coeffs`` has shape (2P, n) in the pair order of :func:`pair_modes`.
    """

    module: CliffordModule
    N: int
    mean: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(self.module.n)
        coeffs = np.array(self.coeffs, dtype=float).reshape(len(self.modes), self.module.n)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def r(self) -> int:
        return self.module.r

    @property
    def modes(self) -> np.ndarray:
        return pair_modes(self.module.r, 1, self.N)

    @classmethod
    def zeros(cls, module: CliffordModule, N: int, mean=None) -> "TorusField":
        P = len(canonical_modes(module.r, 1, N))
        mean = np.zeros(module.n) if mean is None else mean
        return cls(module, N, mean, np.zeros((2 * P, module.n)))

    @classmethod
    def random(cls, module: CliffordModule, N: int, rng, scale: float = 1.0) -> "TorusField":
        P = len(canonical_modes(module.r, 1, N))
        return cls(module, N, rng.uniform(0, 1, module.n), scale * rng.standard_normal((2 * P, module.n)))

    def coeff(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=int)
        if not k.any():
            return self.mean
        hit = np.nonzero((self.modes == k).all(axis=1))[0]
        if len(hit) == 0:
            return np.zeros(self.module.n)
        return self.coeffs[hit[0]]

    def with_coeff(self, k, v) -> "TorusField":
        k = np.asarray(k, dtype=int)
        hit = np.nonzero((self.modes == k).all(axis=1))[0]
        if len(hit) == 0:
            raise ValueError(f"mode {tuple(k)} is outside the truncation |k| < {self.N}")
        c = self.coeffs.copy()
        c[hit[0]] = v
        return TorusField(self.module, self.N, self.mean, c)

    def embed(self, N: int) -> "TorusField":
        """Same function, stored at truncation N (modes above N are dropped)."""
        out = TorusField.zeros(self.module, N, self.mean)
        src = {tuple(k): i for i, k in enumerate(self.modes)}
        c = out.coeffs.copy()
        for j, k in enumerate(out.modes):
            i = src.get(tuple(k))
            if i is not None:
                c[j] = self.coeffs[i]
        return TorusField(self.module, N, self.mean, c)

    def __add__(self, other: "TorusField") -> "TorusField":
        if other.N != self.N:
            raise ValueError("fields must share the truncation")
        return TorusField(self.module, self.N, self.mean + other.mean, self.coeffs + other.coeffs)

    def scaled(self, s: float) -> "TorusField":
        return TorusField(self.module, self.N, s * self.mean, s * self.coeffs)

    def to_json(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "coeffs": [{"k": k.tolist(), "v": v.tolist()} for k, v in zip(self.modes, self.coeffs)],
            "N": self.N,
        }

    @classmethod
    def from_json(cls, obj: dict, module: CliffordModule) -> "TorusField":
        f = cls.zeros(module, int(obj["N"]), obj["mean"])
        index = {tuple(k): i for i, k in enumerate(f.modes)}
        c = f.coeffs.copy()
        for entry in obj["coeffs"]:
            key = tuple(int(x) for x in entry["k"])
            if key not in index:
                raise ValueError(f"mode {key} outside truncation N = {f.N}")
            c[index[key]] = entry["v"]
        return cls(module, f.N, f.mean, c)


def dirac_apply(field: TorusField) -> TorusField:
    """Sum_l J_l d/dt_l, applied blockwise; the mean is killed."""
    op = PairOperator(field.module, canonical_modes(field.r, 1, field.N))
    return TorusField(field.module, field.N, np.zeros(field.module.n), op.apply(field.coeffs))


def dirac_inverse_tail(module: CliffordModule, modes: np.ndarray, coeffs: np.ndarray, N: int) -> np.ndarray:
    """Apply the inverse blocks to a pair-ordered tail with every |k| >= N."""
    modes = np.asarray(modes, dtype=int)
    if len(modes) and ((modes**2).sum(axis=1) < N * N).any():
        raise FrequencyBelowCutoffError(f"tail contains modes with |k| < {N}")
    canon = modes[1::2]
    return PairOperator(module, canon).apply_inverse(np.asarray(coeffs, float))


# -- transforms -----------------------------------------------------------

def grid_points(r: int, G: int) -> np.ndarray:
    """Uniform grid on T^r, shape (G,)*r + (r,), ij indexing."""
    axes = np.meshgrid(*([np.arange(G) / G] * r), indexing="ij")
    return np.stack(axes, axis=-1)


def synthesize_coeffs(module: CliffordModule, mean, coeffs, modes, G: int) -> np.ndarray:
    """Values on the G^r grid of mean + sum_k exp(2 pi k.t J) c_k."""
    r, n = module.r, module.n
    modes = np.asarray(modes, dtype=int)
    if len(modes) and 2 * np.abs(modes).max() >= G:
        warnings.warn(f"grid G={G} aliases modes up to {np.abs(modes).max()}", GridTooCoarseWarning, stacklevel=2)
    J = module.J[-1]
    C = np.asarray(coeffs, dtype=float)
    Z = np.zeros((G,) * r + (n,), dtype=complex)
    if len(modes):
        idx = tuple((modes % G).T)
        np.add.at(Z, idx, C - 1j * (C @ J.T))
    Z[(0,) * r] += np.asarray(mean, dtype=float)
    return np.fft.ifftn(Z, axes=tuple(range(r)), norm="forward").real


def analyze_coeffs(module: CliffordModule, values: np.ndarray, modes) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature projection of grid values onto the mean and the given modes."""
    r = module.r
    G = values.shape[0]
    modes = np.asarray(modes, dtype=int)
    if len(modes) and 2 * np.abs(modes).max() >= G:
        warnings.warn(f"grid G={G} aliases modes up to {np.abs(modes).max()}", GridTooCoarseWarning, stacklevel=2)
    F = np.fft.fftn(values, axes=tuple(range(r)), norm="forward")
    mean = F[(0,) * r].real.copy()
    if not len(modes):
        return mean, np.zeros((0, module.n))
    Fk = F[tuple((modes % G).T)]
    J = module.J[-1]
    return mean, Fk.real + Fk.imag @ J.T


def synthesize(field: TorusField, G: int) -> np.ndarray:
    """Grid values of ``field`` on the uniform G^r grid; shape (G,)*r + (n,)."""
    if G < 2 * field.N - 1:
        warnings.warn(f"G={G} < 2N-1={2 * field.N - 1}", GridTooCoarseWarning, stacklevel=2)
    return synthesize_coeffs(field.module, field.mean, field.coeffs, field.modes, G)


def analyze(module: CliffordModule, values: np.ndarray, N: int) -> TorusField:
    """L2 projection (by grid quadrature) of grid values onto degree < N."""
    G = values.shape[0]
    if G < 2 * N - 1:
        warnings.warn(f"G={G} < 2N-1={2 * N - 1}", GridTooCoarseWarning, stacklevel=2)
    mean, C = analyze_coeffs(module, values, pair_modes(module.r, 1, N))
    return TorusField(module, N, mean, C)


def l2_inner(a: TorusField, b: TorusField) -> float:
    """<a, b>_{L2}: means are treated as tangent offsets from a common base point."""
    if a.module.n != b.module.n or a.r != b.r or a.N != b.N:
        raise ValueError("fields must share module, r and N")
    return float(a.mean @ b.mean + np.sum(a.coeffs * b.coeffs))


def l2_norm(a: TorusField) -> float:
    return float(np.sqrt(l2_inner(a, a)))


# -- oracles ----------------------------------------------------------------

def _mode_values(module: CliffordModule, k, v, t: np.ndarray) -> np.ndarray:
    theta = 2 * np.pi * (t @ np.asarray(k, float))
    J = module.J[-1]
    return np.cos(theta)[..., None] * v + np.sin(theta)[..., None] * (J @ v)


def dirac_block_oracle(module: CliffordModule, k, h: float = 1e-4, G: int | None = None) -> np.ndarray:
    """A_{k*} rebuilt from pointwise finite differences.

    Each basis function of F_{k*} is evaluated at grid points shifted by
    +-h, 2h along every t_l, differentiated with the fourth-order central
    stencil, multiplied by J_l, summed, and projected back onto (-k, +k)
    by grid quadrature.
    """
    k = np.asarray(k, dtype=int)
    n, r = module.n, module.r
    G = G or max(8, 2 * int(np.abs(k).max()) + 4)
    t = grid_points(r, G).reshape(-1, r)
    cols = []
    for slot, sign in ((0, -1), (1, 1)):
        for i in range(n):
            v = np.zeros(n)
            v[i] = 1.0
            out = np.zeros((len(t), n))
            for l in range(r):
                e = np.zeros(r)
                e[l] = h
                d = (-_mode_values(module, sign * k, v, t + 2 * e) + 8 * _mode_values(module, sign * k, v, t + e)
                     - 8 * _mode_values(module, sign * k, v, t - e) + _mode_values(module, sign * k, v, t - 2 * e)) / (12 * h)
                out += d @ module.J[l].T
            vals = out.reshape((G,) * r + (n,))
            _, C = analyze_coeffs(module, vals, np.array([-k, k]))
            cols.append(C.reshape(-1))
    return np.column_stack(cols)


def dirac_apply_oracle(field: TorusField, G: int = 64) -> np.ndarray:
    """Grid values of sum_l J_l d f/d t_l by per-component FFT differentiation."""
    r = field.r
    vals = synthesize(field, G)
    F = np.fft.fftn(vals, axes=tuple(range(r)))
    freqs = np.fft.fftfreq(G, d=1.0 / G)
    out = np.zeros_like(vals)
    for l in range(r):
        shape = [1] * r + [1]
        shape[l] = G
        ik = (2j * np.pi * freqs).reshape(shape)
        d = np.fft.ifftn(ik * F, axes=tuple(range(r))).real
        out += d @ field.module.J[l].T
    return out
