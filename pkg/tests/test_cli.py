import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_reduce import ConfigError, build_module
from dirac_reduce.cli import main
from dirac_reduce.config import RunConfig

T2 = {"domain": "torus", "r": 1, "module": {"auto": 1},
      "hamiltonian": [{"nu": [1, 0], "amp": 0.05}, {"nu": [0, 1], "amp": 0.05}], "N": 4}


def _cfg(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_verify_torus(tmp_path, capsys, r):
    assert main(["verify", "--config", _cfg(tmp_path, {"r": r, "module": {"auto": r}})]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_verify_su2(tmp_path, capsys):
    assert main(["verify", "--config", _cfg(tmp_path, {"domain": "su2"})]) == 0
    out = capsys.readouterr().out
    assert "spectrum {k, -(k+2)}" in out and "FAIL" not in out


def test_su2_with_non_hyperkahler_module_is_config_error(tmp_path, capsys):
    m = build_module(3).to_json()
    m["hyperkahler"] = False
    assert main(["verify", "--config", _cfg(tmp_path, {"domain": "su2", "module": m})]) == 1
    assert "hyperkahler" in capsys.readouterr().err


def test_corrupted_module_names_the_identity(tmp_path, capsys):
    m = build_module(2).to_json()
    m["J"][1] = m["J"][0]
    assert main(["verify", "--config", _cfg(tmp_path, {"r": 2, "module": m})]) == 2
    assert "anti-commutation J1 J2 + J2 J1 = 0" in capsys.readouterr().out


def test_bad_configs(tmp_path):
    assert main(["verify", "--config", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", "--config", str(bad)]) == 1
    assert main(["solve", "--config", _cfg(tmp_path, {**T2, "N": 0})]) == 1
    assert main(["solve", "--config", _cfg(tmp_path, {**T2, "typo": 1})]) == 1
    assert main(["solve", "--config", _cfg(tmp_path, {**T2, "hamiltonian": [{"nu": [1], "amp": 1}]})]) == 1


def test_solve_t2(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["solve", "--config", _cfg(tmp_path, T2), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["report"]["found"] == 4 and report["report"]["satisfied_sb"] is True
    assert report["config"]["N"] == 4 and "timings" in report and report["version"]
    assert len(json.loads((out / "points.json").read_text())) == 4
    assert len((out / "summary.csv").read_text().splitlines()) == 5


def test_solve_outputs_are_byte_stable(tmp_path):
    cfg = _cfg(tmp_path, {**T2, "record_timings": False})
    for d in ("a", "b"):
        assert main(["solve", "--config", cfg, "--out", str(tmp_path / d), "--seed", "3"]) == 0
    for f in ("points.json", "summary.csv", "report.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_solve_zero_hamiltonian(tmp_path):
    out = tmp_path / "out"
    assert main(["solve", "--config", _cfg(tmp_path, {**T2, "hamiltonian": [], "N": 2,
                                                        "search": {"escalate": False}}), "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())["report"]
    assert rep["all_nondegenerate"] is False and rep["satisfied_sb"] is None


def test_contraction_impossible_exit_code(tmp_path):
    cfg = {**T2, "hamiltonian": [{"nu": [1, 0], "amp": 0.5}], "N": 1}
    assert main(["solve", "--config", _cfg(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 3
    cfg["N"] = "auto"
    assert main(["solve", "--config", _cfg(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert rep["problem"]["N_policy"] == "auto" and rep["problem"]["rho"] == 0.5
    assert rep["problem"]["contraction_bound"] <= 0.5


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_spectrum_torus(tmp_path, capsys):
    cfg = {"r": 2, "module": {"auto": 2}, "spectrum": {"modes": [[3, 4], [0, 0]]}}
    assert main(["spectrum", "--config", _cfg(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    rows = _rows((tmp_path / "spectrum.csv").read_text())
    assert float(rows[0]["inverse_norm"]) == pytest.approx(1 / (10 * np.pi), abs=1e-12)
    assert float(rows[0]["deviation"]) < 1e-10
    assert rows[1]["inverse_norm"] == "kernel mode"


def test_spectrum_su2(tmp_path):
    cfg = {"domain": "su2", "spectrum": {"k_min": 0, "k_max": 6}}
    assert main(["spectrum", "--config", _cfg(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    rows = {r["mode"]: r for r in _rows((tmp_path / "spectrum.csv").read_text())}
    assert [float(x) for x in rows["5"]["eigenvalues"].split(";")] == [-7.0, 5.0]
    assert float(rows["5"]["inverse_norm"]) == pytest.approx(0.2, abs=1e-12)
    assert rows["0"]["inverse_norm"] == "kernel mode"


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "dirac_reduce", "spectrum", "--config",
                          _cfg(tmp_path, {"spectrum": {"k_max": 2}}), "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("mode,norm,eigenvalues")


_terms = st.lists(st.fixed_dictionaries({
    "nu": st.lists(st.integers(-3, 3), min_size=2, max_size=2),
    "amp": st.floats(-1, 1, allow_nan=False),
    "phase": st.floats(-3, 3, allow_nan=False),
}), max_size=4)


@settings(max_examples=40, deadline=None)
@given(_terms, st.one_of(st.just("auto"), st.integers(1, 9)), st.integers(0, 10**6),
       st.booleans(), st.integers(1, 4))
def test_config_round_trip(terms, N, seed, timings, over):
    doc = {**T2, "hamiltonian": terms, "N": N, "rng_seed": seed, "record_timings": timings,
           "search": {"oversample": over}}
    cfg = RunConfig.from_dict(doc)
    again = RunConfig.from_dict(json.loads(cfg.dumps()))
    assert again.to_dict() == cfg.to_dict()
    assert again.dumps() == cfg.dumps()


def test_config_validation():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"domain": "su2", "r": 2})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"domain": "sphere"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"r": 2, "module": {"auto": 1}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**T2, "search": {"nope": 1}})
