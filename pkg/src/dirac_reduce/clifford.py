"""Anti-commuting orthogonal complex structures on V = R^n.

A :class:`CliffordModule` holds r real n x n matrices J_1..J_r with
J_l^2 = -I, J_l J_m + J_m J_l = 0 (l != m) and J_l^T J_l = I.  The
symplectic forms omega_l(X, Y) = <J_l X, Y> are derived on demand.

Generators are built by Cayley-Dickson doubling (complex numbers,
quaternions, octonions; left multiplication by the imaginary units),
one further doubling for r = 8 and the period-8 tensor step beyond.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .exceptions import InvalidModuleError, NotHyperkahlerError

#: absolute tolerance for the algebraic identities; generators have entries in {-1, 0, 1}
IDENTITY_TOL = 1e-12

_EPS = np.array([[0.0, -1.0], [1.0, 0.0]])
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def radon_hurwitz_bound(n: int) -> int:
    """Maximal number of anti-commuting complex structures on R^n.

    Writing n = 2^(4d + c) * b with b odd and 0 <= c <= 3 the bound is
    8d + 2^c - 1.

    >>> [radon_hurwitz_bound(n) for n in (1, 2, 4, 8, 12, 16)]
    [0, 1, 3, 7, 3, 8]
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    e = 0
    while n % 2 == 0:
        n //= 2
        e += 1
    d, c = divmod(e, 4)
    return 8 * d + 2**c - 1


def minimal_dimension(r: int) -> int:
    """Smallest n with ``radon_hurwitz_bound(n) >= r``."""
    n = 1
    while radon_hurwitz_bound(n) < r:
        n *= 2
    return n


@dataclass(frozen=True, eq=False)
class CliffordModule:
    """r anti-commuting orthogonal complex structures on R^n.

    Construct with :func:`build_module`, :meth:`from_json`, or directly
    from a list of matrices.  Direct construction only checks shapes;
    call :meth:`check` (or :meth:`violations`) to validate the algebra.
    """

    J: tuple
    hyperkahler: bool = field(default=False)

    def __post_init__(self):
        mats = tuple(np.array(j, dtype=float) for j in self.J)
        if not mats:
            raise InvalidModuleError("a module needs at least one structure")
        n = mats[0].shape[0]
        for j in mats:
            if j.shape != (n, n):
                raise InvalidModuleError(f"structure of shape {j.shape}, expected {(n, n)}")
            j.setflags(write=False)
        object.__setattr__(self, "J", mats)

    @property
    def n(self) -> int:
        return self.J[0].shape[0]

    @property
    def r(self) -> int:
        return len(self.J)

    def violations(self, tol: float = IDENTITY_TOL) -> list[str]:
        """Names of the violated module identities (empty when valid)."""
        bad = []
        eye = np.eye(self.n)
        for l, j in enumerate(self.J, start=1):
            if np.abs(j.T @ j - eye).max() > tol:
                bad.append(f"orthogonality J{l}^T J{l} = I")
            if np.abs(j @ j + eye).max() > tol:
                bad.append(f"complex structure J{l}^2 = -I")
        for l in range(self.r):
            for m in range(l + 1, self.r):
                a = self.J[l] @ self.J[m] + self.J[m] @ self.J[l]
                if np.abs(a).max() > tol:
                    bad.append(f"anti-commutation J{l + 1} J{m + 1} + J{m + 1} J{l + 1} = 0")
        if self.hyperkahler:
            if self.r != 3:
                bad.append("hyperkahler requires r = 3")
            elif np.abs(self.J[0] @ self.J[1] - self.J[2]).max() > tol:
                bad.append("quaternionic relation J1 J2 = J3")
        if self.r > radon_hurwitz_bound(self.n):
            bad.append(f"Radon-Hurwitz bound r <= {radon_hurwitz_bound(self.n)}")
        return bad

    def check(self, tol: float = IDENTITY_TOL) -> "CliffordModule":
        bad = self.violations(tol)
        if bad:
            raise InvalidModuleError("module violates: " + "; ".join(bad))
        return self

    def omega(self, l: int) -> np.ndarray:
        """Matrix of omega_l (1-based l): omega_l(X, Y) = X^T Omega Y = <J_l X, Y>."""
        return self.J[l - 1].T.copy()

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "J": [j.tolist() for j in self.J],
            "hyperkahler": bool(self.hyperkahler),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CliffordModule":
        try:
            mats = [np.asarray(j, dtype=float) for j in obj["J"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidModuleError(f"malformed module object: {exc}") from exc
        mod = cls(tuple(mats), hyperkahler=bool(obj.get("hyperkahler", False)))
        if "n" in obj and obj["n"] != mod.n:
            raise InvalidModuleError(f"declared n={obj['n']} but matrices are {mod.n}x{mod.n}")
        if "r" in obj and obj["r"] != mod.r:
            raise InvalidModuleError(f"declared r={obj['r']} but {mod.r} matrices given")
        return mod


def _cd_mult(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # Cayley-Dickson: (a, b)(c, d) = (ac - conj(d) b, d a + b conj(c))
    if x.size == 1:
        return x * y
    h = x.size // 2
    a, b, c, d = x[:h], x[h:], y[:h], y[h:]
    return np.concatenate([
        _cd_mult(a, c) - _cd_mult(_cd_conj(d), b),
        _cd_mult(d, a) + _cd_mult(b, _cd_conj(c)),
    ])


def _cd_conj(x: np.ndarray) -> np.ndarray:
    if x.size == 1:
        return x.copy()
    h = x.size // 2
    return np.concatenate([_cd_conj(x[:h]), -x[h:]])


@lru_cache(maxsize=None)
def _left_units(level: int) -> tuple:
    """Left multiplication by e_1..e_{2^level - 1} in the level-th Cayley-Dickson algebra."""
    dim = 2**level
    eye = np.eye(dim)
    mats = []
    for u in range(1, dim):
        mats.append(np.column_stack([_cd_mult(eye[u], eye[c]) for c in range(dim)]))
    return tuple(mats)


def _generators(r: int) -> list[np.ndarray]:
    if r <= 1:
        return [_EPS.copy()]
    if r <= 3:
        return [m.copy() for m in _left_units(2)[:r]]
    if r <= 7:
        return [m.copy() for m in _left_units(3)[:r]]
    if r == 8:
        base = _left_units(3)
        gens = [np.kron(g, _SIGMA_Z) for g in base]
        gens.append(np.kron(np.eye(8), _EPS))
        return gens
    # period 8: E_j (x) I and omega (x) gamma_i with omega = E_1 ... E_8
    e8 = _generators(8)
    vol = np.eye(16)
    for e in e8:
        vol = vol @ e
    inner = _generators(r - 8)
    d = inner[0].shape[0]
    return [np.kron(e, np.eye(d)) for e in e8] + [np.kron(vol, g) for g in inner]


def build_module(r: int, hyperkahler_requested: bool = False) -> CliffordModule:
    """Minimal-dimension module with r structures.

    For r = 3 the structures are left multiplication by i, j, k on the
    quaternions (basis 1, i, j, k), so J1 J2 = J3 and ``hyperkahler`` is set.
    """
    if r < 1:
        raise InvalidModuleError(f"r must be positive, got {r}")
    if hyperkahler_requested and r != 3:
        raise InvalidModuleError(f"hyperkahler structure needs r = 3, got r = {r}")
    gens = [np.rint(g) for g in _generators(r)]
    hk = r == 3 and np.array_equal(gens[0] @ gens[1], gens[2])
    mod = CliffordModule(tuple(gens), hyperkahler=bool(hk))
    assert mod.n == minimal_dimension(r)
    return mod.check()


def pencil_symbol(module: CliffordModule, lam) -> np.ndarray:
    """sum_l lam_l J_l; its square is -(sum lam_l^2) I."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (module.r,):
        raise ValueError(f"expected {module.r} coefficients, got shape {lam.shape}")
    return np.tensordot(lam, np.stack(module.J), axes=1)


def quaternionic_split(module: CliffordModule) -> list[np.ndarray]:
    """Orthonormal bases (as columns) of V0, V1 = J1 V0, V2 = J2 V0, V3 = J3 V0.

    V0 is grown greedily from the standard basis; each new vector is taken
    orthogonal to the quaternionic span of the previous ones, which is
    invariant under the J's, so its complement is too.
    """
    if module.r != 3 or not module.hyperkahler or module.violations():
        raise NotHyperkahlerError("quaternionic split needs a valid hyperkahler module")
    n = module.n
    J1, J2, J3 = module.J
    chosen: list[np.ndarray] = []
    span = np.zeros((n, 0))
    for i in range(n):
        if span.shape[1] == n:
            break
        v = np.zeros(n)
        v[i] = 1.0
        v -= span @ (span.T @ v)
        nv = np.linalg.norm(v)
        if nv < 1e-8:
            continue
        v /= nv
        chosen.append(v)
        span = np.column_stack([span, v, J1 @ v, J2 @ v, J3 @ v])
    V0 = np.column_stack(chosen)
    return [V0, J1 @ V0, J2 @ V0, J3 @ V0]
