"""Run configuration: a JSON document describing one experiment.

Example::

    {
      "domain": "torus",
      "r": 1,
      "module": {"auto": 1},
      "hamiltonian": [{"nu": [1, 0], "amp": 0.05}, {"nu": [0, 1], "amp": 0.05}],
      "N": "auto",
      "search": {"oversample": 2},
      "rng_seed": 0,
      "output": {"dir": "out"}
    }

``module`` is either ``{"auto": r}`` or an inline module object with keys
n, r, J and hyperkahler.  Hamiltonian terms follow ``Term.to_json``.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

from .clifford import CliffordModule, build_module
from .exceptions import ConfigError, InvalidModuleError
from .hamiltonian import TrigHamiltonian, min_truncation
from .solver import SearchParams

#: safety factor of the "auto" truncation policy
AUTO_RHO = 0.5

_KEYS = {"domain", "r", "module", "hamiltonian", "N", "search", "rng_seed", "output",
         "verify", "spectrum", "record_timings", "N_tail", "grid", "lattice"}


@dataclass
class RunConfig:
    domain: str = "torus"
    r: int = 1
    module: dict = field(default_factory=lambda: {"auto": 1})
    hamiltonian: list = field(default_factory=list)
    N: int | str = "auto"
    search: dict = field(default_factory=dict)
    rng_seed: int = 0
    output: dict = field(default_factory=lambda: {"dir": "out"})
    verify: dict = field(default_factory=dict)
    spectrum: dict = field(default_factory=lambda: {"k_min": 0, "k_max": 5})
    record_timings: bool = True
    N_tail: int | None = None
    grid: int | None = None
    lattice: list | None = None

    # -- parsing -------------------------------------------------------------
    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - _KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d = copy.deepcopy(d)
        domain = d.get("domain", "torus")
        if domain not in ("torus", "su2"):
            raise ConfigError(f"domain must be 'torus' or 'su2', got {domain!r}")
        r = d.get("r", 3 if domain == "su2" else 1)
        if domain == "su2" and r != 3:
            raise ConfigError("su2 domain fixes r = 3")
        if not isinstance(r, int) or r < 1:
            raise ConfigError(f"r must be a positive integer, got {r!r}")
        cfg = cls(domain=domain, r=r, module=d.get("module", {"auto": r}),
                  hamiltonian=d.get("hamiltonian", []), N=d.get("N", "auto"),
                  search=d.get("search", {}), rng_seed=d.get("rng_seed", 0),
                  output=d.get("output", {"dir": "out"}),
                  verify=d.get("verify", {}),
                  spectrum=d.get("spectrum", {"k_min": 0, "k_max": 5}),
                  record_timings=d.get("record_timings", True),
                  N_tail=d.get("N_tail"), grid=d.get("grid"), lattice=d.get("lattice"))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "r": self.r,
            "module": copy.deepcopy(self.module),
            "hamiltonian": copy.deepcopy(self.hamiltonian),
            "N": self.N,
            "search": dict(self.search),
            "rng_seed": self.rng_seed,
            "output": dict(self.output),
            "verify": dict(self.verify),
            "spectrum": dict(self.spectrum),
            "record_timings": self.record_timings,
            "N_tail": self.N_tail,
            "grid": self.grid,
            "lattice": copy.deepcopy(self.lattice),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    # -- validation and construction -----------------------------------------
    def validate(self) -> None:
        mod = self.build_module_unchecked()
        if self.domain == "su2" and (mod.r != 3 or not mod.hyperkahler):
            raise ConfigError("su2 domain requires a hyperkahler module (r = 3 with J1 J2 = J3)")
        if self.domain == "torus" and mod.r != self.r:
            raise ConfigError(f"module has r = {mod.r} but config r = {self.r}")
        self.build_hamiltonian()
        if self.N != "auto" and (not isinstance(self.N, int) or self.N < 1):
            raise ConfigError(f"N must be a positive integer or 'auto', got {self.N!r}")
        if not isinstance(self.rng_seed, int):
            raise ConfigError("rng_seed must be an integer")
        try:
            SearchParams.from_dict(self.search)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def build_module_unchecked(self) -> CliffordModule:
        """The configured module without checking the algebra (``verify`` does that)."""
        m = self.module
        if not isinstance(m, dict):
            raise ConfigError("module must be an object")
        try:
            if "auto" in m:
                return build_module(int(m["auto"]), hyperkahler_requested=self.domain == "su2")
            return CliffordModule.from_json(m)
        except (InvalidModuleError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid module: {exc}") from exc

    def build_hamiltonian(self) -> TrigHamiltonian:
        n = self.build_module_unchecked().n
        try:
            return TrigHamiltonian.from_json(self.hamiltonian, n, self.domain,
                                             None if self.domain == "su2" else self.r)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid hamiltonian: {exc}") from exc

    def truncation(self) -> tuple[int, str]:
        """(N, policy) where policy is 'auto' or 'fixed'."""
        if self.N == "auto":
            return min_truncation(self.build_hamiltonian(), self.domain, AUTO_RHO), "auto"
        return int(self.N), "fixed"

    def search_params(self, threads: int | None = None) -> SearchParams:
        d = dict(self.search)
        d["rng_seed"] = self.rng_seed
        if threads is not None:
            d["workers"] = threads
        return SearchParams.from_dict(d)

    @property
    def out_dir(self) -> Path:
        return Path(self.output.get("dir", "out"))
