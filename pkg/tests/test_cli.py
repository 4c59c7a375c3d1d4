import json
import subprocess
import sys

import numpy as np
import pytest

from surfspec import reports
from surfspec.cli import UsageError, main, parse_list
from surfspec.config import RunConfig, config_hash, from_dict, to_dict


def read_csv(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    return header, [dict(zip(header, l.split(","))) for l in lines[1:]]


def test_parse_list():
    assert parse_list("0.08,0.04,0.02") == (0.08, 0.04, 0.02)
    assert parse_list("0.1:0.5:9") == pytest.approx(tuple(np.linspace(0.1, 0.5, 9)))
    assert parse_list("0.1:0.5:3")[1] == 0.3
    assert parse_list("0.2:0.3") == (0.2, 0.3)
    with pytest.raises(UsageError):
        parse_list("a,b")


def test_config_roundtrip_and_hash():
    cfg = RunConfig(eps=(0.1, 0.05), k=6)
    back = from_dict(RunConfig, to_dict(cfg))
    assert back == cfg
    assert config_hash(back) == config_hash(cfg)
    assert config_hash(RunConfig(k=7)) != config_hash(cfg)
    assert config_hash(RunConfig(eps=(0.1, 0.05), k=6, out="elsewhere", jobs=4)) == config_hash(cfg)
    with pytest.raises(ValueError):
        from_dict(RunConfig, {"nonsense": 1})


def test_spectrum_equilateral(tmp_path, capsys):
    rc = main(["spectrum", "--surface", "flat-torus:equilateral", "--k", "6", "--out", str(tmp_path)])
    assert rc == 0
    header, rows = read_csv(tmp_path / "spectrum.csv")
    assert header == ["index", "eigenvalue", "lambda_area", "cluster"]
    assert float(rows[1]["lambda_area"]) == pytest.approx(8 * np.pi**2 / np.sqrt(3), rel=5e-3)
    text = (tmp_path / "spectrum.csv").read_text()
    assert "# config_hash: " in text and "# units: " in text
    doc = json.loads((tmp_path / "spectrum.json").read_text())
    assert doc["eigenvectors"]["dtype"] == "<f8"
    assert "lambda_1 * area" in capsys.readouterr().out


def test_reruns_are_byte_identical(tmp_path):
    bodies = []
    for d in ("a", "b"):
        assert main(["spectrum", "--surface", "flat-torus:square", "--res", "12", "--k", "6",
                     "--out", str(tmp_path / d)]) == 0
        bodies.append(reports.body((tmp_path / d / "spectrum.csv").read_text()))
    assert bodies[0] == bodies[1]
    assert (tmp_path / "a" / "spectrum.f64").read_bytes() == (tmp_path / "b" / "spectrum.f64").read_bytes()


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"surface": "round-sphere", "res": 4, "k": 4}))
    assert main(["spectrum", "--config", str(cfg), "--k", "5", "--out", str(tmp_path / "o")]) == 0
    used = json.loads((tmp_path / "o" / "spectrum.config.json").read_text())["config"]
    assert used["surface"] == "round-sphere"
    assert used["k"] == 5
    _, rows = read_csv(tmp_path / "o" / "spectrum.csv")
    assert len(rows) == 5


def test_usage_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": "blue"}))
    assert main(["spectrum", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["spectrum", "--eps", "-1", "--out", str(tmp_path)]) == 2
    assert main(["sweep", "--surface", "flat-torus:square", "--out", str(tmp_path)]) == 2
    assert main(["sweep", "--surface", "projective-plane", "--attach", "handle", "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["spectrum", "--surface", "moebius"])
    assert exc.value.code == 2


def test_geometry_error_exit(tmp_path):
    rc = main(["mesh", "--surface", "round-sphere", "--res", "4", "--attach", "handle", "--eps", "0.1",
               "--h", "0.5", "--out", str(tmp_path)])
    assert rc == 2


def test_mesh_command(tmp_path):
    rc = main(["mesh", "--surface", "flat-torus:square", "--res", "30", "--attach", "cross-cap", "--eps", "0.2",
               "--h", "0.5", "--out", str(tmp_path)])
    assert rc == 0
    info = json.loads((tmp_path / "mesh.summary.json").read_text())
    assert info["euler_characteristic"] == -1
    assert info["orientable"] is False
    assert info["units"] == {"area": "length^2"}


def test_sweep_command(tmp_path):
    rc = main(["sweep", "--surface", "flat-torus:square", "--attach", "cross-cap", "--eps", "0.08,0.04",
               "--h", "0.3", "--res", "30", "--out", str(tmp_path)])
    assert rc in (0, 1)
    header, rows = read_csv(tmp_path / "sweep.csv")
    assert header[:3] == ["eps", "h", "k"]
    assert all(float(r["deviation"]) < 1e-6 for r in rows if r["k"] == "0")
    dat = (tmp_path / "sweep.dat").read_text().splitlines()
    assert dat[4].startswith("# eps h k")
    doc = json.loads((tmp_path / "sweep.json").read_text())
    assert rc == (0 if all(doc["monotone"].values()) else 1)


def test_heightscan_bad_bracket(tmp_path):
    rc = main(["heightscan", "--surface", "flat-torus:equilateral", "--attach", "cross-cap", "--eps", "0.04",
               "--h", "0.3,0.4", "--out", str(tmp_path)])
    assert rc == 2


def test_heightscan_reports_status(tmp_path):
    rc = main(["heightscan", "--surface", "flat-torus:equilateral", "--attach", "cross-cap", "--eps", "0.01",
               "--out", str(tmp_path)])
    doc = json.loads((tmp_path / "heightscan.json").read_text())
    assert rc == (0 if doc["status"] == "CROSSED" else 1)
    assert doc["h_epsilon"] == pytest.approx(doc["h_star"], rel=0.1)


def test_maximize_and_resume(tmp_path):
    args = ["maximize", "--surface", "flat-torus:equilateral", "--res", "12", "--max-iter", "3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    summary = json.loads((tmp_path / "a" / "maximize.json").read_text())
    assert summary["value"] == pytest.approx(8 * np.pi**2 / np.sqrt(3), rel=3e-2)
    assert (tmp_path / "a" / "maximizer.eigenframe.f64").exists()
    assert main(args + ["--resume", str(tmp_path / "a" / "maximizer.json"), "--out", str(tmp_path / "b")]) == 0
    again = json.loads((tmp_path / "b" / "maximize.json").read_text())
    assert again["value"] >= summary["value"] * (1 - 1e-12)


def test_verify_quick(tmp_path):
    rc = main(["verify", "--suite", "quick", "--out", str(tmp_path)])
    doc = json.loads((tmp_path / "manifest.json").read_text())
    assert set(doc["checks"]) == {"criterion_1", "criterion_2", "criterion_8", "criterion_9"}
    assert rc == (0 if all(v["passed"] for v in doc["checks"].values()) else 1)


def test_no_temp_files_left(tmp_path):
    main(["spectrum", "--surface", "flat-torus:square", "--res", "12", "--out", str(tmp_path)])
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".")]


def test_console_script_help():
    out = subprocess.run([sys.executable, "-m", "surfspec.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("mesh", "spectrum", "sweep", "heightscan", "maximize", "verify"):
        assert cmd in out.stdout
