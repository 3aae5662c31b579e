"""Multistart search for critical points of the generating function.

Each seed runs a Levenberg-Marquardt iteration on grad Phi = 0, which is a
trust-region Newton method whose steps shrink toward (regularized)
gradient descent on |grad Phi|^2 when the Newton step fails to reduce the
gradient.  Converged points are classified by the eigenvalues of the
finite-difference Hessian, deduplicated modulo the lattice and counted
against SB(T^n) = 2^n and CL(T^n) + 1 = n + 1.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ContractionError, FixedPointNotConvergedError, RefinementDivergedError
from .reduction import ReducedPoint, ReducedProblem, evaluate, generating_hess, residual

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchParams:
    """Knobs of :func:`find_critical_points`.

    ``seed_count`` defaults to 2^n * oversample.  Seeds come in groups of
    2^n: the half-lattice {0, 1/2}^n shifted by a random offset.
    """

    seed_count: int | None = None
    oversample: int = 2
    rng_seed: int = 0
    grad_tol: float = 1e-10
    dedup_radius: float = 1e-4
    max_newton_steps: int = 60
    fiber_scale: float = 1e-3
    degeneracy_tol: float = 1e-6
    residual_tol: float = 1e-6
    hess_step: float = 1e-5
    escalate: bool = True
    workers: int = 1

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "SearchParams":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown search parameters: {sorted(unknown)}")
        return cls(**d)


@dataclass
class CriticalPointRecord:
    g: np.ndarray
    f: object
    action: float
    residual: float
    grad_norm: float
    hessian_min_abs_eigenvalue: float = float("nan")
    nondegenerate: bool = False
    morse_index_window: int = -1
    basin_seed: int = -1
    eigenvalues: np.ndarray | None = field(default=None, repr=False)
    null_space: np.ndarray | None = field(default=None, repr=False)
    steps: int = 0

    def to_json(self) -> dict:
        return {
            "g": [float(x) for x in self.g],
            "f": self.f.to_json(),
            "action": float(self.action),
            "residual": float(self.residual),
            "grad_norm": float(self.grad_norm),
            "hessian_min_abs_eigenvalue": float(self.hessian_min_abs_eigenvalue),
            "nondegenerate": bool(self.nondegenerate),
            "morse_index_window": int(self.morse_index_window),
            "basin_seed": int(self.basin_seed),
        }


@dataclass
class CountReport:
    found: int
    sb_bound: int
    cl_bound: int
    all_nondegenerate: bool
    satisfied_sb: bool | None
    satisfied_cl: bool
    points: int = 0
    clusters: int = 0
    dropped_seeds: int = 0
    seeds: int = 0
    escalated: bool = False
    message: str = ""

    def to_json(self) -> dict:
        return dict(self.__dict__)


# -- local solver -----------------------------------------------------------------

def newton_solve(problem: ReducedProblem, g0, grad_tol: float = 1e-10, max_steps: int = 60,
                 hess_step: float = 1e-5, h0=None) -> tuple[ReducedPoint, bool, int]:
    """Levenberg-Marquardt on grad Phi = 0 from g0.

    The Hessian is reused while the gradient drops by at least half per step.
    Returns (last point, converged, steps).
    """
    pt = evaluate(problem, g0, h0)
    hess = None
    mu = 0.0
    for step in range(max_steps):
        if pt.grad_norm < grad_tol:
            return pt, True, step
        if hess is None:
            lam, V = np.linalg.eigh(generating_hess(problem, pt.g, hess_step, base=pt))
            hess = (lam, V)
            mu = 1e-12 * (1.0 + float(np.max(lam**2)))
        lam, V = hess
        gr = V.T @ pt.grad_phi
        while True:
            d = -V @ (lam * gr / (lam**2 + mu))
            trial = evaluate(problem, pt.g + d, pt.h)
            if trial.grad_norm < pt.grad_norm:
                break
            mu = max(mu * 10.0, 1e-12)
            if mu > 1e8 * (1.0 + float(np.max(lam**2))):
                return pt, False, step
        if trial.grad_norm > 0.5 * pt.grad_norm:
            hess = None
        else:
            mu = mu / 10.0
        pt = trial
    return pt, pt.grad_norm < grad_tol, max_steps


def classify(problem: ReducedProblem, record: CriticalPointRecord, degeneracy_tol: float = 1e-6,
             hess_step: float = 1e-5) -> CriticalPointRecord:
    """Fill Hessian eigenvalue data; the Morse index is relative to the computed window."""
    lam, V = np.linalg.eigh(generating_hess(problem, record.g, hess_step))
    absl = np.abs(lam)
    record.eigenvalues = lam
    record.hessian_min_abs_eigenvalue = float(absl.min())
    record.nondegenerate = bool(absl.min() > degeneracy_tol)
    record.morse_index_window = int(np.sum(lam < -degeneracy_tol))
    record.null_space = V[:, absl <= degeneracy_tol]
    return record


def _record_from_point(problem: ReducedProblem, pt: ReducedPoint, seed_id: int, steps: int) -> CriticalPointRecord:
    mean, Cl = problem.split(pt.g)
    g = problem.join(problem.wrap(mean), Cl)
    f = problem.assemble(g, pt.h)
    return CriticalPointRecord(g=g, f=f, action=pt.phi, residual=residual(problem, f),
                               grad_norm=pt.grad_norm, basin_seed=seed_id, steps=steps)


def _run_seed(args):
    problem, g0, seed_id, params = args
    try:
        pt, ok, steps = newton_solve(problem, g0, params.grad_tol, params.max_newton_steps, params.hess_step)
    except (ContractionError, FixedPointNotConvergedError) as exc:
        log.debug("seed %d dropped: %s", seed_id, exc)
        return None
    if not ok:
        return None
    rec = _record_from_point(problem, pt, seed_id, steps)
    if rec.residual >= params.residual_tol:
        return None
    return classify(problem, rec, params.degeneracy_tol, params.hess_step)


def make_seeds(problem: ReducedProblem, count: int, rng: np.random.Generator, first_id: int = 0):
    n = problem.n
    corners = np.array(np.meshgrid(*[[0.0, 0.5]] * n, indexing="ij")).reshape(n, -1).T
    seeds = []
    while len(seeds) < count:
        offset = rng.uniform(0.0, 0.5, n)
        for c in corners:
            if len(seeds) == count:
                break
            w = problem.lattice @ (offset + c)
            seeds.append((first_id + len(seeds), w, rng.standard_normal(problem.dim - n)))
    return seeds


def distance(problem: ReducedProblem, g1, g2, drop=None) -> float:
    """W-distance modulo the lattice plus fiber L2 distance; ``drop`` columns are projected out first."""
    d = np.asarray(g1, float) - np.asarray(g2, float)
    d[: problem.n] = problem.lattice_delta(g1[: problem.n], g2[: problem.n])
    if drop is not None and drop.size:
        d = d - drop @ (drop.T @ d)
    return float(np.linalg.norm(d[: problem.n]) + np.linalg.norm(d[problem.n:]))


def _sort_key(rec: CriticalPointRecord):
    return (round(rec.action, 12), tuple(np.round(rec.g, 9)))


def deduplicate(problem: ReducedProblem, records, radius: float):
    records = sorted(records, key=_sort_key)
    kept: list[CriticalPointRecord] = []
    for rec in records:
        for i, other in enumerate(kept):
            if distance(problem, rec.g, other.g) < radius:
                if rec.residual < other.residual:
                    kept[i] = rec
                break
        else:
            kept.append(rec)
    return sorted(kept, key=_sort_key)


def cluster_count(problem: ReducedProblem, records, radius: float) -> int:
    """Connected components under 'distance < radius after removing near-null Hessian directions'."""
    parent = list(range(len(records)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, a in enumerate(records):
        for j in range(i + 1, len(records)):
            b = records[j]
            near = any(
                distance(problem, a.g, b.g, drop=ns) < radius
                for ns in (a.null_space, b.null_space)
            )
            if near:
                parent[find(i)] = find(j)
    return len({find(i) for i in range(len(records))})


def count_report(records, n: int, clusters: int | None = None, **diag) -> CountReport:
    """Compare the found points with SB(T^n) = 2^n and CL(T^n) + 1 = n + 1.

    With degenerate points the count is the number of clusters and the SB
    comparison is not asserted (``satisfied_sb`` is None).
    """
    records = list(records)
    all_nd = bool(records) and all(r.nondegenerate for r in records)
    found = len(records) if all_nd or clusters is None else clusters
    sb, cl = 2**n, n + 1
    sat_sb = (found >= sb) if all_nd else None
    sat_cl = found >= cl
    if all_nd:
        msg = f"found {found} >= SB = {sb}" if sat_sb else \
            f"found {found} < SB = {sb} (search incomplete or bound violated)"
    else:
        msg = f"degenerate: {found} clusters " + (f">= CL + 1 = {cl}" if sat_cl else f"< CL + 1 = {cl}")
    if not (sat_sb if all_nd else sat_cl):
        log.warning(msg)
    return CountReport(found=found, sb_bound=sb, cl_bound=cl, all_nondegenerate=all_nd,
                       satisfied_sb=sat_sb, satisfied_cl=sat_cl, points=len(records),
                       clusters=clusters if clusters is not None else len(records), message=msg, **diag)


def _search(problem, params, seeds):
    tasks = []
    for sid, w, fib in seeds:
        g0 = np.concatenate([w, params.fiber_scale * fib])
        tasks.append((problem, g0, sid, params))
    if params.workers > 1:
        with ProcessPoolExecutor(max_workers=params.workers) as ex:
            out = list(ex.map(_run_seed, tasks))
    else:
        out = [_run_seed(t) for t in tasks]
    found = [r for r in out if r is not None]
    return found, len(out) - len(found)


def find_critical_points(problem: ReducedProblem, params: SearchParams | None = None):
    """Multistart search; returns (deduplicated records sorted by action, CountReport).

    Deterministic given ``params.rng_seed`` (the worker count does not
    affect the result).
    """
    params = params or SearchParams()
    rng = np.random.default_rng(params.rng_seed)
    count = params.seed_count or 2**problem.n * params.oversample
    seeds = make_seeds(problem, count, rng)
    raw, dropped = _search(problem, params, seeds)
    records = deduplicate(problem, raw, params.dedup_radius)
    clusters = cluster_count(problem, records, params.dedup_radius)
    report = count_report(records, problem.n, clusters, dropped_seeds=dropped, seeds=count)
    reached = report.satisfied_sb if report.all_nondegenerate else report.satisfied_cl
    if params.escalate and not reached:
        more = make_seeds(problem, count, rng, first_id=count)
        raw2, dropped2 = _search(problem, params, more)
        records = deduplicate(problem, records + raw2, params.dedup_radius)
        clusters = cluster_count(problem, records, params.dedup_radius)
        report = count_report(records, problem.n, clusters, dropped_seeds=dropped + dropped2,
                              seeds=2 * count, escalated=True)
    return records, report


def refine_and_verify(problem: ReducedProblem, record: CriticalPointRecord, N_plus: int = 2,
                      grad_tol: float = 1e-10, max_steps: int = 60, displacement_tol: float = 1e-5,
                      residual_slack: float = 1e-7):
    """Re-solve at truncation N + N_plus from the embedded point.

    Returns (refined record, displacement, residual change).  Raises
    RefinementDivergedError unless Newton converges, the field moves by
    less than ``displacement_tol`` in L2 and the residual does not grow by
    more than ``residual_slack``.
    """
    fine = problem.with_truncation(problem.N + N_plus)
    g0 = fine.reduced_from_field(record.f)
    try:
        pt, ok, steps = newton_solve(fine, g0, grad_tol, max_steps)
    except (ContractionError, FixedPointNotConvergedError) as exc:
        raise RefinementDivergedError(f"refinement failed: {exc}") from exc
    if not ok:
        raise RefinementDivergedError(f"Newton did not converge at N = {fine.N} (|grad| = {pt.grad_norm:.3g})")
    new = _record_from_point(fine, pt, record.basin_seed, steps)
    top = max(new.f.N, record.f.N)
    a, b = new.f.embed(top), record.f.embed(top)
    dmean = fine.lattice_delta(a.mean, b.mean)
    displacement = float(np.sqrt(dmean @ dmean + np.sum((a.coeffs - b.coeffs) ** 2)))
    change = new.residual - record.residual
    if displacement >= displacement_tol:
        raise RefinementDivergedError(f"displacement {displacement:.3g} >= {displacement_tol:g}")
    if change > residual_slack:
        raise RefinementDivergedError(f"residual grew by {change:.3g}")
    new = replace(new, hessian_min_abs_eigenvalue=record.hessian_min_abs_eigenvalue,
                  nondegenerate=record.nondegenerate, morse_index_window=record.morse_index_window)
    return new, displacement, change


# -- output -------------------------------------------------------------------------

def points_json(records) -> str:
    return json.dumps([r.to_json() for r in records], indent=2, sort_keys=True)


def summary_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "action", "residual", "min_abs_eig", "nondegenerate", "morse_index_window"])
    for i, r in enumerate(records):
        w.writerow([i, repr(float(r.action)), repr(float(r.residual)),
                    repr(float(r.hessian_min_abs_eigenvalue)), int(r.nondegenerate), r.morse_index_window])
    return buf.getvalue()
