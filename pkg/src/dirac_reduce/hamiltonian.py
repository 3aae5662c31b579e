"""Trigonometric Hamiltonians H: M x W -> R with exact derivatives.

Every term has the form ``amp * T(t) * cos(2 pi nu . w + phase)`` where
``nu`` is an integer (dual-lattice) frequency vector and ``T`` is a time
factor bounded by one in absolute value:

* constant: ``T = 1``;
* torus: ``T(t) = cos(2 pi m . t + time_phase)``;
* su2: real or imaginary part of a normalized matrix coefficient.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainMismatchError


@dataclass(frozen=True)
class ConstTime:
    def to_json(self) -> dict:
        return {"type": "const"}


@dataclass(frozen=True)
class TorusTime:
    m: tuple
    phase: float = 0.0

    def to_json(self) -> dict:
        return {"type": "torus", "m": list(self.m), "phase": self.phase}


@dataclass(frozen=True)
class SU2Time:
    k: int
    a: int
    b: int
    part: str = "re"

    def __post_init__(self):
        if self.part not in ("re", "im"):
            raise ValueError(f"part must be 're' or 'im', got {self.part!r}")
        if not (0 <= self.a <= self.k and 0 <= self.b <= self.k):
            raise ValueError(f"matrix coefficient index out of range: {(self.k, self.a, self.b)}")

    def to_json(self) -> dict:
        return {"type": "su2", "k": self.k, "a": self.a, "b": self.b, "part": self.part}


def _time_from_json(obj) -> ConstTime | TorusTime | SU2Time:
    if obj is None:
        return ConstTime()
    kind = obj.get("type", "const")
    if kind == "const":
        return ConstTime()
    if kind == "torus":
        return TorusTime(tuple(int(x) for x in obj["m"]), float(obj.get("phase", 0.0)))
    if kind == "su2":
        return SU2Time(int(obj["k"]), int(obj["a"]), int(obj["b"]), obj.get("part", "re"))
    raise ValueError(f"unknown time factor type {kind!r}")


@dataclass(frozen=True)
class Term:
    nu: tuple
    amp: float
    phase: float = 0.0
    time: ConstTime | TorusTime | SU2Time = field(default_factory=ConstTime)

    def to_json(self) -> dict:
        return {"time": self.time.to_json(), "nu": list(self.nu), "amp": self.amp, "phase": self.phase}

    @classmethod
    def from_json(cls, obj: dict) -> "Term":
        return cls(
            nu=tuple(int(x) for x in obj["nu"]),
            amp=float(obj["amp"]),
            phase=float(obj.get("phase", 0.0)),
            time=_time_from_json(obj.get("time")),
        )


class TrigHamiltonian:
    """Finite trigonometric sum on M x W.

    Parameters
    ----------
    n : int
        Dimension of the target W = R^n / lattice.
    terms : sequence of Term
    time_domain : {"torus", "su2"}
    r : int, optional
        Dimension of the time torus (ignored for su2).
    """

    def __init__(self, n: int, terms=(), time_domain: str = "torus", r: int | None = None):
        if time_domain not in ("torus", "su2"):
            raise ValueError(f"time_domain must be 'torus' or 'su2', got {time_domain!r}")
        self.n = int(n)
        self.time_domain = time_domain
        self.r = 3 if time_domain == "su2" else r
        self.terms = tuple(terms)
        for term in self.terms:
            if len(term.nu) != self.n:
                raise ValueError(f"frequency {term.nu} has wrong length for n = {self.n}")
            if not math.isfinite(term.amp) or not math.isfinite(term.phase):
                raise ValueError("amplitude and phase must be finite")
            if isinstance(term.time, TorusTime):
                if time_domain != "torus":
                    raise DomainMismatchError("torus time factor in an su2 Hamiltonian")
                if self.r is not None and len(term.time.m) != self.r:
                    raise ValueError(f"time frequency {term.time.m} has wrong length for r = {self.r}")
            if isinstance(term.time, SU2Time) and time_domain != "su2":
                raise DomainMismatchError("su2 time factor in a torus Hamiltonian")
        self._nu = np.array([t.nu for t in self.terms], dtype=float).reshape(-1, self.n)
        self._amp = np.array([t.amp for t in self.terms], dtype=float)
        self._phase = np.array([t.phase for t in self.terms], dtype=float)

    # -- construction helpers -------------------------------------------------
    @classmethod
    def zero(cls, n: int, time_domain: str = "torus", r: int | None = None) -> "TrigHamiltonian":
        return cls(n, (), time_domain, r)

    @classmethod
    def cosine_sum(cls, amplitudes, time_domain: str = "torus", r: int | None = None) -> "TrigHamiltonian":
        """sum_i amp_i cos(2 pi w_i); zero amplitudes are dropped."""
        n = len(amplitudes)
        terms = []
        for i, a in enumerate(amplitudes):
            if a != 0.0:
                nu = [0] * n
                nu[i] = 1
                terms.append(Term(tuple(nu), float(a)))
        return cls(n, terms, time_domain, r)

    def plus(self, *terms: Term) -> "TrigHamiltonian":
        return TrigHamiltonian(self.n, self.terms + tuple(terms), self.time_domain, self.r)

    @property
    def is_time_independent(self) -> bool:
        return all(isinstance(t.time, ConstTime) for t in self.terms)

    def time_band(self) -> int:
        """Largest time frequency degree appearing in H (0 when time independent)."""
        band = 0
        for t in self.terms:
            if isinstance(t.time, TorusTime):
                band = max(band, int(math.ceil(np.linalg.norm(t.time.m) - 1e-12)))
            elif isinstance(t.time, SU2Time):
                band = max(band, t.time.k)
        return band

    # -- evaluation ---------------------------------------------------------
    def _check_times(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        width = 4 if self.time_domain == "su2" else self.r
        if width is not None and t.shape[-1] != width:
            raise DomainMismatchError(
                f"time points of width {t.shape[-1]} do not match domain {self.time_domain}"
                + (f" (r = {self.r})" if self.time_domain == "torus" else "")
            )
        if self.time_domain == "su2" and np.abs(np.linalg.norm(t, axis=-1) - 1.0).max() > 1e-9:
            raise DomainMismatchError("su2 time points must be unit quaternions")
        return t

    def time_factors(self, t) -> np.ndarray:
        """Array of shape t.shape[:-1] + (num_terms,) with T_j(t)."""
        t = self._check_times(t)
        out = np.ones(t.shape[:-1] + (len(self.terms),))
        for j, term in enumerate(self.terms):
            tf = term.time
            if isinstance(tf, TorusTime):
                out[..., j] = np.cos(2 * np.pi * (t @ np.asarray(tf.m, float)) + tf.phase)
            elif isinstance(tf, SU2Time):
                from .su2 import matrix_coeff

                val = matrix_coeff(tf.k, tf.a, tf.b, t)
                out[..., j] = val.real if tf.part == "re" else val.imag
        return out

    def _arg(self, w):
        w = np.asarray(w, dtype=float)
        if w.shape[-1] != self.n:
            raise ValueError(f"points of width {w.shape[-1]} for target dimension {self.n}")
        return 2 * np.pi * (w @ self._nu.T) + self._phase

    def value_from_factors(self, tf, w) -> np.ndarray:
        return (tf * self._amp * np.cos(self._arg(w))).sum(axis=-1)

    def grad_from_factors(self, tf, w) -> np.ndarray:
        c = tf * self._amp * np.sin(self._arg(w))
        return -2 * np.pi * (c @ self._nu)

    def hess_from_factors(self, tf, w) -> np.ndarray:
        c = tf * self._amp * np.cos(self._arg(w))
        return -4 * np.pi**2 * np.einsum("...j,ja,jb->...ab", c, self._nu, self._nu)

    def eval(self, t, w):
        """H(t, w); broadcasts over leading axes of t and w."""
        return self.value_from_factors(self.time_factors(t), w)

    def grad_w(self, t, w):
        return self.grad_from_factors(self.time_factors(t), w)

    def hess_w(self, t, w):
        return self.hess_from_factors(self.time_factors(t), w)

    def hess_sup_bound(self) -> float:
        """sum |amp| (2 pi |nu|)^2, a uniform bound on the operator norm of hess_w."""
        return float(np.sum(np.abs(self._amp) * (2 * np.pi) ** 2 * np.sum(self._nu**2, axis=1)))

    def grad_sup_bound(self) -> float:
        return float(np.sum(np.abs(self._amp) * 2 * np.pi * np.linalg.norm(self._nu, axis=1)))

    def sup_bound(self) -> float:
        return float(np.sum(np.abs(self._amp)))

    def is_lattice_periodic(self, lattice: np.ndarray) -> bool:
        """True when every frequency lies in the dual of ``lattice`` (columns = basis)."""
        if not self.terms:
            return True
        dual = self._nu @ np.asarray(lattice, float)
        return bool(np.abs(dual - np.rint(dual)).max() < 1e-9)

    # -- serialization ------------------------------------------------------
    def to_json(self) -> list:
        return [t.to_json() for t in self.terms]

    @classmethod
    def from_json(cls, terms, n: int, time_domain: str = "torus", r: int | None = None) -> "TrigHamiltonian":
        return cls(n, [Term.from_json(t) for t in terms], time_domain, r)

    def __repr__(self) -> str:
        return f"TrigHamiltonian(n={self.n}, time_domain={self.time_domain!r}, terms={len(self.terms)})"


def min_truncation(H: TrigHamiltonian, time_domain: str | None = None, rho: float = 0.5) -> int:
    """Smallest N making the fiber map a rho-contraction.

    torus: hess_sup_bound / (2 pi N) <= rho;  su2: hess_sup_bound / N <= rho.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    domain = time_domain or H.time_domain
    bound = H.hess_sup_bound()
    scale = 2 * np.pi if domain == "torus" else 1.0
    return max(1, int(math.ceil(bound / (scale * rho) - 1e-12)))
