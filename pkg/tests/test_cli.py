import csv
import json
from pathlib import Path

import numpy as np
import pytest

from carleman_lcu.cli import EXIT_CONFIG, EXIT_OK, apply_override, load_config, main

ROOT = Path(__file__).resolve().parents[1]
REFERENCE = str(ROOT / "configs" / "reference.toml")


def _run(tmp_path, *argv):
    return main([argv[0], "--config", REFERENCE, "--out", str(tmp_path), *argv[1:]])


def _json(path):
    return json.loads(Path(path).read_text())


def test_reference_config_matches_defaults():
    assert load_config(REFERENCE, []) == load_config(None, [])


def test_overrides():
    cfg = load_config(None, ["grid.n_x=8", "seed=7", "vqls.ansatz='circuit18'"])
    assert cfg["grid"]["n_x"] == 8
    assert cfg["vqls"]["seed"] == 7
    assert cfg["vqls"]["ansatz"] == "circuit18"
    with pytest.raises(ValueError):
        load_config(None, ["grid.bogus=1"])
    with pytest.raises(ValueError):
        apply_override(cfg, "no_equals_sign")


def test_build_golden(tmp_path, capsys):
    assert _run(tmp_path, "build") == EXIT_OK
    info = _json(tmp_path / "system.json")
    assert info["embedded"]["dim"] == 128
    assert info["embedded"]["qubits"] == 7
    assert info["embedded"]["nnz_L_e"] == 464
    assert info["carleman"]["dim"] == 80
    assert "dim=128" in capsys.readouterr().out
    manifest = _json(tmp_path / "manifest_build.json")
    assert manifest["config"]["grid"]["n_x"] == 4
    assert set(manifest["artifacts"]) == {"system.json"}


def test_build_alpha_one(tmp_path):
    assert main(["build", "--out", str(tmp_path), "--set", "alpha=1"]) == EXIT_OK
    assert _json(tmp_path / "system.json")["embedded"]["dim"] == 4 * 4


def test_build_rejects_non_power_of_two(tmp_path, capsys):
    assert main(["build", "--out", str(tmp_path), "--set", "n_x=6"]) == EXIT_CONFIG
    assert "power of two" in capsys.readouterr().err


def test_unknown_override_is_config_error(tmp_path):
    assert main(["build", "--out", str(tmp_path), "--set", "grid.nx=4"]) == EXIT_CONFIG


def test_decompose_golden(tmp_path, capsys):
    assert _run(tmp_path, "decompose", "--verify") == EXIT_OK
    rep = _json(tmp_path / "decompose_report.json")
    assert rep["enumerated"] == rep["formula"] == 49
    assert rep["pauli"] == 1142
    assert rep["literature_count"] == 73
    assert rep["class_counts"] == {"L1": 3, "L2a": 42, "L2b": 4}
    assert rep["max_abs_err"] <= 1e-12
    out = capsys.readouterr().out
    assert "enumerated=49" in out and "pauli=1142" in out


def test_decompose_small_config(tmp_path):
    assert main(["decompose", "--out", str(tmp_path), "--set", "n_t=2", "--set", "alpha=1"]) == EXIT_OK
    rep = _json(tmp_path / "decompose_report.json")
    assert rep["enumerated"] == rep["formula"] == 16


def test_encode_all_verified(tmp_path, capsys):
    assert _run(tmp_path, "encode", "--verify") == EXIT_OK
    doc = _json(tmp_path / "circuits.json")
    assert len(doc["encodings"]) == 49
    assert all(e["verified"] for e in doc["encodings"])
    assert "verified=49/49" in capsys.readouterr().out


def test_encode_single_term_and_bad_id(tmp_path):
    assert _run(tmp_path, "encode", "--term", "3") == EXIT_OK
    assert [e["term_id"] for e in _json(tmp_path / "circuits.json")["encodings"]] == [3]
    assert _run(tmp_path, "encode", "--term", "99") == EXIT_CONFIG


def test_encode_skips_verification_above_cap(tmp_path, caplog):
    argv = ["encode", "--out", str(tmp_path), "--set", "n_x=16", "--set", "n_t=16", "--term", "0", "--verify"]
    assert main(argv) == EXIT_OK
    summary = _json(tmp_path / "manifest_encode.json")["summary"]
    assert summary["verification_skipped"] is True
    assert "verification skipped" in caplog.text


def test_resources_and_sweep(tmp_path):
    assert _run(tmp_path, "resources", "--sweep", "n_x=4,8,16,32,64;alpha=2") == EXIT_OK
    agg = _json(tmp_path / "resources.json")
    assert agg["qubits"] == 8
    with open(tmp_path / "resources.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 49
    sweep = _json(tmp_path / "sweep.json")["alpha=2,n_t=n_x"]
    assert sweep["qubits"] == [8, 11, 14, 17, 20]
    assert sweep["class_counts"] == {"L1": 3, "L2a": 42, "L2b": 4}


def test_bad_sweep_spec(tmp_path):
    assert _run(tmp_path, "resources", "--sweep", "foo=1") == EXIT_CONFIG


def test_solve_classical_only(tmp_path):
    assert _run(tmp_path, "solve", "--classical-only") == EXIT_OK
    with open(tmp_path / "trajectory.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 16
    assert rows[0]["u_vqls"] == ""
    assert not (tmp_path / "vqls_state.npy").exists()


def test_solve_is_deterministic_and_compare_reads_state(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert _run(d, "solve", "--seed", "0") == EXIT_OK
    assert (a / "manifest_solve.json").read_bytes() == (b / "manifest_solve.json").read_bytes()
    m = _json(a / "manifest_solve.json")
    assert m["vqls"]["seed"] == 0 and m["vqls"]["params"] == 21
    assert _run(a, "compare") == EXIT_OK
    cmp = _json(a / "comparison.json")
    assert cmp["fidelity"] == pytest.approx(m["vqls"]["fidelity"])
    assert np.load(a / "vqls_state.npy").shape == (128,)


def test_compare_without_state(tmp_path):
    assert _run(tmp_path, "compare") == EXIT_CONFIG
