import csv
import io
import json

import numpy as np
import pytest

from dirac_reduce import (
    ReducedProblem,
    RefinementDivergedError,
    SearchParams,
    TrigHamiltonian,
    build_module,
    classify,
    count_report,
    find_critical_points,
    refine_and_verify,
    residual,
)
from dirac_reduce.solver import (
    CriticalPointRecord,
    _record_from_point,
    deduplicate,
    distance,
    newton_solve,
    points_json,
    summary_csv,
)

from benchmarks import t2_problem, t4_time_dependent_problem


@pytest.fixture(scope="module")
def t2_run():
    return find_critical_points(t2_problem(), SearchParams(rng_seed=7))


def _fake(nondeg):
    return CriticalPointRecord(g=np.zeros(2), f=None, action=0.0, residual=0.0, grad_norm=0.0,
                               nondegenerate=nondeg)


def test_count_report_bound_arithmetic():
    rep = count_report([_fake(True)] * 4, 2)
    assert (rep.found, rep.sb_bound, rep.cl_bound, rep.satisfied_sb) == (4, 4, 3, True)
    rep = count_report([_fake(True), _fake(False)] * 2 + [_fake(True)], 4, clusters=5)
    assert rep.satisfied_cl and rep.satisfied_sb is None and not rep.all_nondegenerate
    rep = count_report([_fake(True)] * 3, 2)
    assert rep.satisfied_sb is False and "search incomplete" in rep.message


def test_t2_benchmark_finds_the_four_constant_maps(t2_run):
    records, rep = t2_run
    assert rep.found == 4 and rep.satisfied_sb and rep.all_nondegenerate
    P = t2_problem()
    exact = [np.array(w) for w in [(0.0, 0.0), (0.0, 0.5), (0.5, 0.0), (0.5, 0.5)]]
    hits = [min(range(4), key=lambda i: np.linalg.norm(P.lattice_delta(r.g[:2], exact[i]))) for r in records]
    assert sorted(hits) == [0, 1, 2, 3]
    assert all(np.linalg.norm(P.lattice_delta(r.g[:2], exact[i])) < 1e-9 for r, i in zip(records, hits))
    for r in records:
        assert np.abs(r.g[2:]).max() < 1e-9
        assert r.grad_norm < 1e-10 and r.residual < 1e-6
        assert r.residual == pytest.approx(residual(P, r.f))
    # actions are -H(w*) = -eps (cos + cos)
    assert sorted(np.round([r.action for r in records], 10)) == [-0.1, 0.0, 0.0, 0.1]


def test_search_is_deterministic(t2_run):
    again, _ = find_critical_points(t2_problem(), SearchParams(rng_seed=7))
    assert points_json(again) == points_json(t2_run[0])


def test_workers_do_not_change_the_result(t2_run):
    par, _ = find_critical_points(t2_problem(), SearchParams(rng_seed=7, workers=2))
    assert points_json(par) == points_json(t2_run[0])


def test_dedup_soundness(t2_run):
    P = t2_problem()
    recs = t2_run[0]
    for i in range(len(recs)):
        for j in range(i + 1, len(recs)):
            assert distance(P, recs[i].g, recs[j].g) >= 1e-4
    # shifting a record by a lattice vector makes it a duplicate
    moved = [CriticalPointRecord(**{**recs[0].__dict__, "g": recs[0].g + np.r_[1.0, -2.0, np.zeros(P.dim - 2)],
                                    "residual": recs[0].residual * 2})]
    kept = deduplicate(P, recs + moved, 1e-4)
    assert len(kept) == 4 and all(k.residual < 1e-6 for k in kept)


def test_zero_hamiltonian_is_flagged_degenerate():
    P = ReducedProblem(build_module(1), TrigHamiltonian.zero(2, r=1), 2)
    recs, rep = find_critical_points(P, SearchParams(escalate=False))
    assert recs and not any(r.nondegenerate for r in recs)
    assert rep.satisfied_sb is None and rep.clusters == 1
    assert all(r.hessian_min_abs_eigenvalue < 1e-6 for r in recs)


def test_classify_at_maximum():
    P = t2_problem()
    pt, ok, _ = newton_solve(P, P.join([0.0, 0.0], np.zeros((P.n_low, 2))))
    rec = classify(P, _record_from_point(P, pt, 0, 0))
    assert ok and rec.nondegenerate
    assert rec.hessian_min_abs_eigenvalue == pytest.approx(4 * np.pi**2 * 0.05, rel=1e-6)


def test_eigenvalues_stable_under_truncation():
    ev = []
    for N in (4, 6):
        P = t2_problem(N)
        pt, ok, _ = newton_solve(P, P.join([0.5, 0.0], np.zeros((P.n_low, 2))))
        ev.append(classify(P, _record_from_point(P, pt, 0, 0)).eigenvalues)
    assert max(np.abs(ev[1] - e).min() for e in ev[0]) < 1e-4


def test_refine_exact_constant_solution(t2_run):
    P = t2_problem()
    new, disp, change = refine_and_verify(P, t2_run[0][0], 2)
    assert disp < 1e-12 and change < 1e-7
    assert new.f.N == P.with_truncation(P.N + 2).N_tail


def test_refine_time_dependent_solution():
    P = t4_time_dependent_problem()
    pt, ok, _ = newton_solve(P, P.join([0.0, 0.5, 0.0, 0.5], np.zeros((P.n_low, 4))))
    assert ok
    rec = _record_from_point(P, pt, 0, 0)
    assert np.abs(rec.g[4:]).max() > 1e-4  # a genuinely non-constant solution
    _, disp, _ = refine_and_verify(P, rec, 2)
    assert disp < 1e-5


def test_refine_rejects_loose_solution():
    P = t2_problem()
    pt, ok, _ = newton_solve(P, P.join([0.07, 0.43], np.zeros((P.n_low, 2))), grad_tol=1e-2)
    assert ok and pt.grad_norm > 1e-4
    with pytest.raises(RefinementDivergedError):
        refine_and_verify(P, _record_from_point(P, pt, 0, 0), 2)


def test_outputs(t2_run):
    recs = t2_run[0]
    doc = json.loads(points_json(recs))
    assert len(doc) == 4 and set(doc[0]) >= {"g", "f", "action", "residual", "nondegenerate", "morse_index_window"}
    rows = list(csv.reader(io.StringIO(summary_csv(recs))))
    assert rows[0] == ["index", "action", "residual", "min_abs_eig", "nondegenerate", "morse_index_window"]
    assert len(rows) == 5


def test_search_params_round_trip():
    p = SearchParams(seed_count=10, grad_tol=1e-9)
    assert SearchParams.from_dict(p.to_dict()) == p
    with pytest.raises(ValueError):
        SearchParams.from_dict({"bogus": 1})
