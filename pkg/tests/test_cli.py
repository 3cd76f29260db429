import json
import os

import pytest

from qasfg.cli import main

FAST_CONFIG = {
    "design": {"L_mm": 1.0, "target": "deltak", "grid_N": 1001},
    "simulation": {"steps": 4000},
    "sweeps": {
        "period": {"min_pct": -2.0, "max_pct": 2.0, "samples": 9},
        "bandwidth": {"samples": 21},
        "signal": {"samples": 5},
        "length": {"min_mm": 0.5, "max_mm": 2.0, "samples": 3},
    },
}


def write_config(tmp_path, extra=None, name="config.json"):
    cfg = json.loads(json.dumps(FAST_CONFIG))
    if extra:
        for key, block in extra.items():
            if isinstance(block, dict):
                cfg.setdefault(key, {}).update(block)
            else:
                cfg[key] = block
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_design_outputs_and_determinism(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out1 = str(tmp_path / "out1")
    out2 = str(tmp_path / "out2")
    assert main(["design", "--config", cfg, "--out", out1]) == 0
    assert main(["design", "--config", cfg, "--out", out2]) == 0
    for name in ("design.csv", "design.json", "boundary_check.json"):
        b1 = open(os.path.join(out1, name), "rb").read()
        b2 = open(os.path.join(out2, name), "rb").read()
        assert b1 == b2

    payload = json.loads(open(os.path.join(out1, "design.json")).read())
    assert 74.2 <= payload["kappa_per_cm"] <= 78.2
    assert payload["config_sha256"]
    assert payload["version"]
    report = json.loads(open(os.path.join(out1, "boundary_check.json")).read())
    assert report["all_ok"]
    header = open(os.path.join(out1, "design.csv")).readline()
    assert "qasfg" in header


def test_unknown_config_key(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"design": {"length_mm": 1.0}}))
    assert main(["design", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["design", "--config", str(path)]) == 2


def test_kl_constraint_named(tmp_path, capsys):
    cfg = write_config(tmp_path, {"design": {"kappa_min_per_cm": 20.0,
                                             "kappa_max_per_cm": 30.0}})
    code = main(["design", "--config", cfg, "--out", str(tmp_path / "o")])
    assert code == 2
    assert "pi" in capsys.readouterr().err


def test_zero_steps_rejected(tmp_path):
    cfg = write_config(tmp_path, {"simulation": {"steps": 0}})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_unknown_sweep_name(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["sweep", "wavelength", "--config", cfg]) == 2
    assert "bandwidth" in capsys.readouterr().err


def test_simulate_roundtrip_through_design_file(tmp_path):
    cfg = write_config(tmp_path)
    out = str(tmp_path / "out")
    assert main(["design", "--config", cfg, "--out", out]) == 0
    assert main(["simulate", "--config", cfg, "--out", out,
                 "--design", os.path.join(out, "design.json")]) == 0
    summary = json.loads(open(os.path.join(out, "simulate_summary.json")).read())
    assert summary["eta"] >= 0.99
    assert os.path.exists(os.path.join(out, "trajectory.csv"))


def test_simulate_depleted_mode(tmp_path):
    cfg = write_config(tmp_path, {"simulation": {"steps": 6000, "depleted": True,
                                                 "signal_pump_ratio": 1.0}})
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    summary = json.loads(open(os.path.join(out, "simulate_summary.json")).read())
    assert summary["depleted"] is True
    assert 0.6 < summary["eta"] < 0.9
    header = open(os.path.join(out, "trajectory.csv")).read().splitlines()[2]
    assert header.endswith("re_A2,im_A2")


def test_simulate_missing_design_file(tmp_path):
    cfg = write_config(tmp_path)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o"),
                 "--design", str(tmp_path / "missing.json")]) == 2


def test_period_sweep_outputs(tmp_path):
    cfg = write_config(tmp_path)
    out = str(tmp_path / "out")
    assert main(["sweep", "period", "--config", cfg, "--out", out]) == 0
    summary = json.loads(open(os.path.join(out, "period_summary.json")).read())
    assert "tolerance_intervals" in summary["summary"]
    assert summary["design"]["target"] == "deltak"
    lines = open(os.path.join(out, "period.csv")).read().splitlines()
    assert len(lines) == 2 + 1 + 9  # two headers, column row, 9 samples


def test_length_sweep_outputs(tmp_path):
    cfg = write_config(tmp_path)
    out = str(tmp_path / "out")
    assert main(["sweep", "length", "--config", cfg, "--out", out]) == 0
    lines = open(os.path.join(out, "length.csv")).read().splitlines()
    assert lines[2] == "length_m,eta_designed,eta_chirp_baseline"
    assert len(lines) == 3 + 3
    summary = json.loads(open(os.path.join(out, "length_summary.json")).read())
    assert summary["designed"]["flatness_max_minus_min"] < 0.01
    assert "chirp_baseline" in summary


def test_optimize_outputs(tmp_path):
    cfg = write_config(tmp_path)
    out = str(tmp_path / "out")
    assert main(["optimize", "--config", cfg, "--out", out]) == 0
    payload = json.loads(open(os.path.join(out, "optimize.json")).read())
    assert 74.2 <= payload["kappa_per_cm"] <= 78.2
    assert not payload["at_boundary"]
    assert os.path.exists(os.path.join(out, "kappa_trace.csv"))


def test_workers_env_fallback(tmp_path, monkeypatch):
    cfg = write_config(tmp_path)
    monkeypatch.setenv("QASFG_WORKERS", "not-a-number")
    assert main(["sweep", "period", "--config", cfg,
                 "--out", str(tmp_path / "o")]) == 2
    monkeypatch.setenv("QASFG_WORKERS", "1")
    assert main(["sweep", "period", "--config", cfg,
                 "--out", str(tmp_path / "o")]) == 0
