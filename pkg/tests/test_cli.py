import csv
import functools
import json
from pathlib import Path

import numpy as np
import pytest

from pencon import __version__, solvers
from pencon.cli import EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_OK, EXIT_PROPERTY, main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(cmd, name, out, *extra):
    return main([cmd, "--config", str(CONFIGS / name), "--out", str(out), "--workers", "1", *extra])


def load(path):
    return json.loads(Path(path).read_text())


# -- solve --------------------------------------------------------------------------------

def test_solve_gdemo(tmp_path):
    assert run("solve", "gdemo.json", tmp_path) == EXIT_OK
    rep = load(tmp_path / "solve.json")
    first = rep["records"][0]
    assert first["problem"] == "P1" and first["tau"] == 1.0
    assert first["lambda_of_dual"] == pytest.approx(6.0, abs=1e-6)
    assert first["minimizer"][0] == pytest.approx(1.0, abs=1e-6)
    assert first["regime"]["label"] == "interior" and first["converged"]
    for key in ("objective", "norm_Lx", "residuals", "iterations", "dual_witness"):
        assert key in first
    by_param = {(r["problem"], r.get("tau", r.get("lambda"))): r for r in rep["records"]}
    assert by_param[("P1", 3.0)]["regime"]["label"] == "saturated"
    assert by_param[("P2", 8.0)]["regime"]["label"] == "at_zero"
    assert by_param[("D1", 1.0)]["lambda_of_dual"] == pytest.approx(6.0, abs=1e-6)


def test_solve_flags_non_unique_argmin(tmp_path):
    assert run("solve", "remark2_1.json", tmp_path) == EXIT_OK
    rec = load(tmp_path / "solve.json")["records"][0]
    assert rec["non_unique_argmin"] is True
    assert rec["argmin_oracle"]["kind"] == "interval_1d"
    assert abs(rec["argmin_oracle"]["lo"]) <= 2e-3 and abs(rec["argmin_oracle"]["hi"] - 2.0) <= 2e-3


def test_malformed_norm_writes_nothing(tmp_path, capsys):
    out = tmp_path / "out"
    assert run("solve", "bad_norm.json", out) == EXIT_CONFIG
    assert not out.exists()
    assert "config error" in capsys.readouterr().err


@pytest.mark.parametrize("payload", [
    "{not json",
    json.dumps({"instance": {"phi": {"name": "no_such_phi", "X1": [0]}, "L": [[1.0]], "norm": "L2"},
                "solve": [{"tau": 1.0}]}),
    json.dumps({"instance": {"phi": {"name": "piecewise_gdemo", "X1": [0]}, "L": [[1.0]], "norm": "L2"},
                "solve": [{"tau": 1.0, "lambda": 2.0}]}),
    json.dumps({"instance": {"phi": {"name": "piecewise_gdemo", "X1": [0]}, "L": [[1.0]], "norm": "L2"},
                "solve": [{"tau": 1.0}], "tolerances": {"cert_tol": -1}}),
])
def test_config_errors(tmp_path, payload):
    cfg = tmp_path / "c.json"
    cfg.write_text(payload)
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert not (tmp_path / "o").exists()


def test_solve_not_converged_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(solvers, "solve_penalized", functools.partial(solvers.solve_penalized, max_iter=3))
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"instance": {"phi": {"name": "piecewise_gdemo", "X1": [0]}, "L": [[1.0]],
                                            "norm": "L2"}, "solve": [{"lambda": 6.0}]}))
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONVERGENCE
    assert load(tmp_path / "solve.json")["records"][0]["converged"] is False


# -- curve --------------------------------------------------------------------------------

def test_curve_gdemo(tmp_path):
    assert run("curve", "gdemo.json", tmp_path) == EXIT_OK
    with open(tmp_path / "curve.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["tau", "lambda", "primal_obj", "dual_obj", "max_residual"]
    assert len(rows) == 9
    lam = [float(r["lambda"]) for r in rows]
    assert all(b < a for a, b in zip(lam, lam[1:]))
    for r in rows:
        t = float(r["tau"])
        assert float(r["lambda"]) == pytest.approx(2 * (4 - t) if t <= 2 else 4 * (3 - t), abs=1e-6)
    summary = load(tmp_path / "curve_summary.json")
    assert summary["c"] == pytest.approx(3.0, abs=1e-9)
    assert summary["d"] == pytest.approx(8.0, abs=1e-3)
    assert summary["monotone_decreasing"] is True and summary["all_converged"] is True


def test_curve_remark2_against_brute_force(tmp_path):
    assert run("curve", "remark2.json", tmp_path) == EXIT_OK
    summary = load(tmp_path / "curve_summary.json")
    assert summary["c"] == pytest.approx(2.0, abs=1e-9) and summary["d"] == pytest.approx(4.0, abs=1e-3)
    with open(tmp_path / "curve.csv") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        t = float(r["tau"])
        if t > 1.0:
            assert float(r["lambda"]) == pytest.approx(2 * (2 - t), abs=1e-6)
            # brute force: argmin phi + lambda |x| is {tau}
            pi = _remark2()
            s = solvers.brute_force_argmin(solvers.penalized_objective(pi, float(r["lambda"])), [(-1, 3)], 1e-3, 1e-9)
            assert s.contains(np.array([t]), inflate=2e-3)


def _remark2():
    from conftest import scalar_instance
    return scalar_instance("piecewise_remark2", [-4.0])


def test_single_sample_rejected(tmp_path):
    assert run("curve", "single_sample.json", tmp_path / "o") == EXIT_CONFIG
    assert not (tmp_path / "o").exists()


def test_curve_workers_do_not_change_output(tmp_path):
    assert main(["curve", "--config", str(CONFIGS / "gdemo.json"), "--out", str(tmp_path / "a"),
                 "--workers", "1"]) == EXIT_OK
    assert main(["curve", "--config", str(CONFIGS / "gdemo.json"), "--out", str(tmp_path / "b"),
                 "--workers", "2"]) == EXIT_OK
    for f in ("curve.csv", "curve_summary.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


# -- coercivity ------------------------------------------------------------------------

def test_coercivity_locally_bounded(tmp_path):
    assert run("coercivity", "coercivity_locally_bounded.json", tmp_path) == EXIT_OK
    rep = load(tmp_path / "coercivity.json")["sum"]
    assert rep["status"] == "witness_found" and rep["reason"] == "capability"
    d = np.array(rep["probe_whole_space"]["witness_direction"])
    assert abs(d[1]) > 0.99 and abs(d[0]) < 1e-3


def test_coercivity_non_orthogonal(tmp_path):
    assert run("coercivity", "coercivity_non_orthogonal.json", tmp_path) == EXIT_OK
    rep = load(tmp_path / "coercivity.json")["sum"]
    assert rep["reason"] == "orthogonality"
    assert rep["flags"] == {"orth1": True, "orth2": False}
    assert rep["probe_on_complement"]["verdict"] == "supported"
    assert rep["certified_basis"] is None


def test_coercivity_orthogonal_and_composite(tmp_path):
    assert run("coercivity", "coercivity_orthogonal.json", tmp_path) == EXIT_OK
    rep = load(tmp_path / "coercivity.json")
    assert rep["sum"]["status"] == "certified_on"
    assert np.array(rep["sum"]["certified_basis"]).shape == (2, 2)
    assert rep["composite"]["coercive"] is True and rep["composite"]["stacked_normcoercive"] is True


# -- verify -------------------------------------------------------------------------------

def test_verify_gdemo_passes(tmp_path):
    assert run("verify", "gdemo.json", tmp_path) == EXIT_OK
    props = load(tmp_path / "verify.json")["properties"]
    assert all(p["pass"] for p in props.values())
    for key in ("round_trip_f_of_g", "round_trip_g_of_f", "monotone_decreasing", "sol_equality",
                "localization_disjoint"):
        assert key in props


def test_verify_corrupted_pair_fails(tmp_path):
    assert run("verify", "gdemo_corrupted.json", tmp_path) == EXIT_PROPERTY
    props = load(tmp_path / "verify.json")["properties"]
    assert props["sol_equality"]["pass"] is False


def test_verify_burg_dual_unbounded(tmp_path):
    assert run("verify", "burg.json", tmp_path) == EXIT_OK
    props = load(tmp_path / "verify.json")["properties"]
    assert props["dual_at_zero"]["pass"] is True
    assert "DualUnbounded" in json.dumps(props["dual_at_zero"])


# -- determinism and metadata ----------------------------------------------------------------

@pytest.mark.parametrize("cmd,name,files", [
    ("solve", "gdemo.json", ["solve.json"]),
    ("curve", "gdemo.json", ["curve.csv", "curve_summary.json"]),
    ("verify", "quad2d.json", ["verify.json"]),
    ("coercivity", "coercivity_non_orthogonal.json", ["coercivity.json"]),
])
def test_outputs_byte_identical(tmp_path, cmd, name, files):
    run(cmd, name, tmp_path / "a")
    run(cmd, name, tmp_path / "b")
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_meta_echo(tmp_path):
    assert run("solve", "gdemo.json", tmp_path, "--tol", "1e-6", "--seed", "7") == EXIT_OK
    meta = load(tmp_path / "solve.json")["meta"]
    assert meta["version"] == __version__
    assert meta["tolerances"]["cert_tol"] == 1e-6
    assert meta["seed"] == 7
    assert len(meta["config_sha256"]) == 64
