import csv
import json
import math
import subprocess
import sys

import pytest

from warpgeo import _io
from warpgeo.cli import ExperimentConfig, load_config, main


def _write(tmp_path, cfg):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    return str(p)


def test_config_round_trip(tmp_path):
    cfg = ExperimentConfig({"family": "drawstring", "params": {"A": 3.0}}, {"n_r": 8}, {}, "x", 4)
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    assert load_config(_write(tmp_path, cfg.to_dict())) == cfg
    assert load_config(None) == ExperimentConfig()


def test_io_formats_floats_and_nan(tmp_path):
    text = _io.dumps({"a": 0.1, "b": float("nan"), "c": [1, 2.5]})
    assert json.loads(text) == {"a": 0.1, "b": None, "c": [1, 2.5]}
    path = _io.write_csv([{"x": 1 / 3, "y": float("nan")}], str(tmp_path / "t.csv"))
    rows = list(csv.DictReader(open(path)))
    assert float(rows[0]["x"]) == 1 / 3 and rows[0]["y"] == "nan"


def test_curvature_command(tmp_path, capsys):
    cfg = {"metric": {"family": "c1alpha", "params": {"alpha": 0.5, "k": 2.0}},
           "task": {"n_r": 8, "n_theta": 8, "n_window": 40}}
    assert main(["curvature", "--config", _write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["min_scalar"] >= 0.625
    rows = list(csv.DictReader(open(tmp_path / "curvature.csv")))
    assert len(rows) == 64 + 1600
    assert set(rows[0]) == {"r", "theta", "scalar", "ric_rtheta", "mask"}


def test_report_command(tmp_path, capsys):
    assert main(["report", "--out", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["volume"] == pytest.approx(8 * math.pi**2)
    assert out["minA_candidate"] == pytest.approx(4 * math.pi**2)
    assert out["xi_slice_area"] == pytest.approx(4 * math.pi)
    assert out["diameter"] == pytest.approx(math.pi)


def test_shortcut_command(tmp_path, capsys):
    cfg = {"task": {"A_list": [2, 3]}}
    assert main(["shortcut", "--config", _write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "shortcut.csv")))
    assert [float(r["A"]) for r in rows] == [2.0, 3.0]
    assert all(float(r["d_upper"]) < float(r["pi"]) for r in rows)


def test_pairing_command(tmp_path, capsys):
    cfg = {"task": {"eps": [0.08, 0.04], "test": {"kind": "radial_bump", "center": 1.5,
                                                    "width": 0.3}}}
    assert main(["pairing", "--config", _write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["rows"]) == 2


def test_expansion_ball_command(tmp_path, capsys):
    cfg = {"task": {"kind": "ball"}}
    assert main(["expansion", "--config", _write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ratio"] == pytest.approx(1.0, abs=0.01)


def test_verify_command_and_rejection(tmp_path, capsys):
    cfg = {"task": {"n_pairs": 2}}
    assert main(["verify", "--config", _write(tmp_path, cfg), "--out", str(tmp_path),
                 "--seed", "3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["passed"] and out["seed"] == 3
    bad = {"task": {"pair": {"seed": 3, "roughness": 0.8, "f_scale": 3.0}}}
    assert main(["verify", "--config", _write(tmp_path, bad), "--out", str(tmp_path)]) == 2
    assert "AdmissibilityError" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "warpgeo", "--help"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and "curvature" in proc.stdout
