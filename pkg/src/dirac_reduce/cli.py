"""Command-line front end: ``dirac-reduce verify|solve|spectrum --config PATH``.

Exit codes: 0 success, 1 configuration error, 2 failed verification check,
3 contraction impossible at a fixed truncation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, su2, torus
from .checks import su2_checks, torus_checks
from .config import AUTO_RHO, RunConfig
from .exceptions import ConfigError, ContractionError, InvalidModuleError
from .reduction import ReducedProblem
from .solver import find_critical_points, points_json, summary_csv

EXIT_OK, EXIT_CONFIG, EXIT_CHECK, EXIT_CONTRACTION = 0, 1, 2, 3


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_verify(cfg: RunConfig, out_dir: Path | None = None) -> int:
    module = cfg.build_module_unchecked()
    k_max = int(cfg.verify.get("k_max", 5 if cfg.domain == "torus" else 8))
    if cfg.domain == "torus":
        checks = torus_checks(module, k_max, seed=cfg.rng_seed)
    else:
        checks = su2_checks(module, k_max, seed=cfg.rng_seed)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    if out_dir is not None:
        rows = [{"name": c.name, "value": c.value, "tol": c.tol, "passed": c.passed} for c in checks]
        _write(out_dir / "verify.json", json.dumps(rows, indent=2) + "\n")
    return EXIT_CHECK if failed else EXIT_OK


def _problem(cfg: RunConfig):
    module = cfg.build_module_unchecked()
    H = cfg.build_hamiltonian()
    N, policy = cfg.truncation()
    kw = dict(domain=cfg.domain, N_tail=cfg.N_tail, grid=cfg.grid,
              lattice=None if cfg.lattice is None else np.asarray(cfg.lattice, float))
    try:
        return ReducedProblem(module, H, N, **kw), policy
    except ContractionError:
        if policy == "fixed":
            raise
        while True:  # "auto" keeps raising N until the certificate holds
            N += 1
            try:
                return ReducedProblem(module, H, N, **kw), policy
            except ContractionError:
                continue


def cmd_solve(cfg: RunConfig, out_dir: Path, threads: int | None = None) -> int:
    t0 = time.perf_counter()
    try:
        problem, policy = _problem(cfg)
    except ContractionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACTION
    except (InvalidModuleError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    params = cfg.search_params(threads)
    t1 = time.perf_counter()
    records, report = find_critical_points(problem, params)
    t2 = time.perf_counter()
    search = params.to_dict()
    search.pop("workers")  # the worker count does not change the result
    doc = {
        "tool": "dirac-reduce",
        "version": __version__,
        "config": cfg.to_dict(),
        "problem": {
            "domain": problem.domain, "n": problem.n, "r": problem.module.r,
            "N": problem.N, "N_policy": policy, "rho": AUTO_RHO if policy == "auto" else None,
            "N_tail": problem.N_tail, "grid": problem.grid,
            "contraction_bound": problem.contraction_bound, "reduced_dim": problem.dim,
        },
        "search": search,
        "report": report.to_json(),
    }
    if cfg.record_timings:
        doc["timings"] = {"setup_s": t1 - t0, "search_s": t2 - t1}
    _write(out_dir / "points.json", points_json(records) + "\n")
    _write(out_dir / "summary.csv", summary_csv(records))
    _write(out_dir / "report.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(report.message)
    print(f"wrote {len(records)} points to {out_dir}")
    return EXIT_OK


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def spectrum_rows(cfg: RunConfig) -> list[list[str]]:
    module = cfg.build_module_unchecked()
    spec = cfg.spectrum
    rows = []
    if cfg.domain == "torus":
        if "modes" in spec:
            modes = [tuple(int(x) for x in k) for k in spec["modes"]]
        else:
            lo, hi = int(spec.get("k_min", 0)), int(spec.get("k_max", 5))
            modes = [tuple(k) for k in torus.canonical_modes(module.r, 1, hi + 1)
                     if lo <= np.linalg.norm(k) <= hi]
            if lo == 0:
                modes = [(0,) * module.r] + modes
        for k in modes:
            norm = float(np.linalg.norm(k))
            label = " ".join(str(x) for x in k)
            if norm == 0:
                rows.append([label, "0", "0", "kernel mode", "", "", ""])
                continue
            A = torus.dirac_block(module, torus.canonical(k))
            ev = np.linalg.eigvalsh(A)
            inv = np.linalg.norm(np.linalg.inv(A), 2)
            pred_inv = 1 / (2 * np.pi * norm)
            dev = max(abs(inv - pred_inv), np.abs(np.abs(ev) - 2 * np.pi * norm).max())
            uniq = sorted(set(np.round(ev, 9)))
            rows.append([label, _fmt(norm), ";".join(_fmt(e) for e in uniq), _fmt(inv), _fmt(pred_inv),
                         f"{_fmt(-2 * np.pi * norm)};{_fmt(2 * np.pi * norm)}", f"{dev:.3e}"])
    else:
        ks = [int(k) for k in spec["modes"]] if "modes" in spec else \
            list(range(int(spec.get("k_min", 0)), int(spec.get("k_max", 8)) + 1))
        for k in ks:
            if k == 0:
                rows.append(["0", "0", "0", "kernel mode", "", "", ""])
                continue
            A = su2.dirac_matrix(module, k)
            ev = np.linalg.eigvalsh(A)
            inv = np.linalg.norm(np.linalg.inv(A), 2)
            dev = max(abs(inv - 1 / k), np.abs(ev - np.where(ev > 0, k, -(k + 2))).max())
            uniq = sorted(set(np.round(ev, 9)))
            rows.append([str(k), str(k), ";".join(_fmt(e) for e in uniq), _fmt(inv), _fmt(1 / k),
                         f"{-(k + 2)};{k}", f"{dev:.3e}"])
    return rows


SPECTRUM_HEADER = ["mode", "norm", "eigenvalues", "inverse_norm", "predicted_inverse_norm",
                   "predicted_eigenvalues", "deviation"]


def cmd_spectrum(cfg: RunConfig, out_dir: Path) -> int:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SPECTRUM_HEADER)
    w.writerows(spectrum_rows(cfg))
    text = buf.getvalue()
    print(text, end="")
    _write(out_dir / "spectrum.csv", text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dirac-reduce", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=["verify", "solve", "spectrum"])
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--seed", type=int, help="overrides rng_seed")
    p.add_argument("--threads", type=int, help="maximum worker processes for the search")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = RunConfig.load(args.config)
        if args.seed is not None:
            cfg.rng_seed = args.seed
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be positive")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out) if args.out else cfg.out_dir
    if args.command == "verify":
        return cmd_verify(cfg, out_dir if args.out else None)
    if args.command == "solve":
        return cmd_solve(cfg, out_dir, args.threads)
    return cmd_spectrum(cfg, out_dir)


if __name__ == "__main__":
    sys.exit(main())
