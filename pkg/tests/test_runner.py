import json
import math
import os

import numpy as np
import pytest

from spinlab.errors import ArgumentError
from spinlab.runner import RunResult, parse_mixture, run, validate_config
from spinlab.__main__ import main


def test_parse_mixture():
    m = parse_mixture("p4")
    assert m.gammas == {4: 1.0} and m.h == 0.0
    m = parse_mixture("0.5*p2+p4")
    assert m.gammas == {2: 0.5, 4: 1.0}
    m = parse_mixture({"gammas": {"2": 0.7}, "h": 0.3})
    assert m.gammas == {2: 0.7} and m.h == 0.3
    with pytest.raises(ArgumentError):
        parse_mixture("q4")


def test_schema_validation():
    with pytest.raises(ArgumentError, match="subcommand"):
        validate_config({"subcommand": "nope"})
    with pytest.raises(ArgumentError):
        validate_config({})
    validate_config({"subcommand": "thresholds", "mixture": "p4"})


def test_thresholds_run(tmp_path):
    res = run({"subcommand": "thresholds", "mixture": "p4"}, out_dir=str(tmp_path))
    assert res.status == 0
    assert res.payload["alg_sp"]["value"] == pytest.approx(math.sqrt(3.0), abs=1e-9)
    data = json.loads((tmp_path / "run.json").read_text())
    assert data["results"]["alg_sp"]["value"] == pytest.approx(math.sqrt(3.0), abs=1e-12)


def test_optimize_run_artifacts(tmp_path):
    config = {
        "subcommand": "optimize",
        "mixture": "p2",
        "n": 32,
        "seeds": [0, 1],
        "alg": {"name": "subag", "delta": 0.25},
    }
    res = run(config, out_dir=str(tmp_path))
    assert res.status == 0
    assert (tmp_path / "trajectory_seed0.csv").exists()
    assert (tmp_path / "trajectory_seed1.csv").exists()
    assert len(res.payload["runs"]) == 2


def test_byte_reproducibility(tmp_path):
    config = {
        "subcommand": "chi",
        "mixture": "p2",
        "n": 16,
        "reps": 10,
        "seed": 3,
        "alg": {"name": "constant", "value": 0.5},
        "p_grid": [0.0, 0.5, 1.0],
    }
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run(config, out_dir=str(out1))
    run(config, out_dir=str(out2))
    d1 = json.loads((out1 / "run.json").read_text())
    d2 = json.loads((out2 / "run.json").read_text())
    assert d1["results"] == d2["results"]
    assert d1["config"] == d2["config"]
    assert (out1 / "chi.csv").read_bytes() == (out2 / "chi.csv").read_bytes()


def test_pde_run(tmp_path):
    config = {
        "subcommand": "pde",
        "mixture": "p2",
        "zeta": {"breaks": [0.0], "values": [0.0]},
        "grid": [6.0, 0.01],
    }
    res = run(config, out_dir=str(tmp_path))
    assert res.status == 0
    want = math.sqrt(2.0) * math.sqrt(2 / math.pi)
    assert res.payload["phi_at_0_h"] == pytest.approx(want, abs=1e-5)


def test_embed_run(tmp_path):
    config = {
        "subcommand": "embed",
        "mixture": "p2",
        "n": 64,
        "tree": {"star": 2},
        "delta": 0.25,
        "seed": 1,
    }
    res = run(config, out_dir=str(tmp_path))
    assert res.status == 0
    assert res.payload["validated"]
    assert (tmp_path / "embedding.csv").exists()


def test_concentration_run(tmp_path):
    config = {
        "subcommand": "concentration",
        "mixture": "p2",
        "n": 16,
        "reps": 30,
        "lambda": 0.2,
        "alg": {"name": "constant", "value": 0.5},
    }
    res = run(config, out_dir=str(tmp_path))
    assert res.status == 0
    assert res.payload["sd"] == 0.0


def test_branching_run(tmp_path):
    config = {
        "subcommand": "branching",
        "mixture": "p2",
        "n": 24,
        "ks": [2],
        "qladder": [0.0, 1.0],
        "pladder": [0.0, 1.0],
        "alg": {"name": "constant", "value": 0.5},
        "reps": 1,
    }
    res = run(config, out_dir=str(tmp_path))
    assert res.status == 0
    assert (tmp_path / "overlap_rep0.csv").exists()


def test_sandwich_run(tmp_path):
    config = {
        "subcommand": "sandwich",
        "mixture": "p2",
        "n": 24,
        "ks": [1],
        "qladder": [0.2, 1.0],
        "pladder": [0.0, 1.0],
        "eta": 0.3,
        "restarts": 2,
        "B": 2.0,
        "beta": 2.0,
    }
    res = run(config, out_dir=str(tmp_path))
    assert res.status == 0
    assert "bound_per_n" in res.payload


def test_selftest_subset(tmp_path):
    res = run({"subcommand": "selftest", "criteria": ["1", "6"]}, out_dir=str(tmp_path))
    assert res.status == 0
    assert len(res.payload["criteria"]) == 2
    assert all(c["passed"] for c in res.payload["criteria"])


def test_cli_exit_codes(tmp_path):
    assert main(["thresholds", "--mixture", "p4", "--out", str(tmp_path / "x")]) == 0
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"subcommand": "nope"}))
    assert main(["run", str(bad)]) == 2


def test_cli_set_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"subcommand": "thresholds", "mixture": "p2"}))
    code = main(["run", str(cfg), "--set", "mixture=p4", "--out", str(tmp_path / "o")])
    assert code == 0
    data = json.loads((tmp_path / "o" / "run.json").read_text())
    assert data["results"]["alg_sp"]["value"] == pytest.approx(math.sqrt(3.0), abs=1e-9)
