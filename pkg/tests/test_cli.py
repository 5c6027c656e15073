import json
import math
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from lamsol.cli import parse_real, run

SCHEMA = json.loads(resources.files("lamsol").joinpath("report.schema.json").read_text())


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _json(capsys, *argv):
    code, out, err = _run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


@pytest.mark.parametrize("text, value", [
    ("pi", math.pi), ("-pi/2", -math.pi / 2), ("2pi", 2 * math.pi),
    ("0.5*pi", 0.5 * math.pi), ("1.25", 1.25), ("-3e-2", -0.03),
])
def test_parse_real(text, value):
    assert parse_real(text) == pytest.approx(value)


def test_example_classify_cyl(capsys):
    rep = _json(capsys, "classify", "cyl", "--lambda", "1", "--v3", "1", "--theta0", "0")
    assert rep["regime"] == "SuperCritical"
    assert rep["period"] is not None
    jsonschema.validate(rep, SCHEMA)


def test_example_phase(capsys):
    doc = _json(capsys, "phase", "--lambda", "0.25")
    q1 = next(s for s in doc["singularities"] if s["name"] == "Q1")
    assert q1["theta"] == pytest.approx(math.pi / 2, abs=1e-15)
    assert q1["x"] == 2.0
    assert q1["stability"] == "StableImproperNode"


def test_example_classify_rot_plane(capsys):
    rep = _json(capsys, "classify", "rot", "--from-axis", "--lambda", "-0.5")
    assert rep["regime"] == "HorizontalPlane"
    jsonschema.validate(rep, SCHEMA)


@pytest.mark.parametrize("argv", [
    ["classify", "cyl", "--lambda", "0.25", "--theta0", "pi"],
    ["classify", "cyl", "--lambda", "0.5", "--theta0", "pi"],
    ["classify", "rot", "--x0", "1", "--theta0", "0", "--lambda", "1"],
    ["classify", "rot", "--from-axis", "--lambda", "0.15"],
])
def test_reports_validate(capsys, argv):
    jsonschema.validate(_json(capsys, *argv), SCHEMA)


def test_cyl_csv_to_stdout(capsys):
    code, out, _ = _run(capsys, "cyl", "--lambda", "0.5", "--s-range=-1:1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "s,y,z,theta"
    assert float(lines[1].split(",")[0]) == -1.0


def test_cyl_out_and_verify(tmp_path, capsys):
    path = tmp_path / "c.csv"
    summary = _json(capsys, "cyl", "--lambda", "1", "--v3", "0.8", "--theta0", "0.3",
                    "--s-range=-3:3", "--out", str(path))
    assert summary["samples"] > 10 and path.exists()
    res = _json(capsys, "verify", "--kind", "cyl", "--in", str(path), "--lambda", "1",
                "--v", "0.6,0,0.8")
    assert res["residual"]["max"] < 1e-2
    assert res["arc_length"]["max"] < 1e-2


def test_verify_kind_mismatch(tmp_path, capsys):
    path = tmp_path / "c.csv"
    _json(capsys, "cyl", "--lambda", "0", "--out", str(path))
    code, _, err = _run(capsys, "verify", "--kind", "rot", "--in", str(path), "--lambda", "0")
    assert code == 2 and "not rot" in err


def test_rot_and_trans(tmp_path, capsys):
    code, out, _ = _run(capsys, "rot", "--from-axis", "--lambda", "0.25", "--s-range", "0:5")
    assert code == 0 and out.startswith("s,x,z,theta\n0,0,0,0\n")
    code, out, _ = _run(capsys, "trans", "--a", "0", "--v", "1,0,0", "--lambda", "0.5",
                        "--y-range=-0.5:0.5", "--g0", "1")
    assert code == 0 and out.startswith("y,g,gp\n")


def test_phase_files(tmp_path, capsys):
    por, sng = tmp_path / "p.csv", tmp_path / "s.json"
    doc = _json(capsys, "phase", "--lambda", "1", "--portrait", str(por), "--singularities", str(sng))
    assert doc["portrait"]["orbits"] == 96
    assert por.read_text().startswith("orbit,s,theta,x\n")
    assert json.loads(sng.read_text())["singularities"][3]["stability"] == "StableSpiral"


def test_mesh(tmp_path, capsys):
    out = tmp_path / "m.obj"
    doc = _json(capsys, "mesh", "--kind", "rot", "--from-axis", "--lambda", "0", "--s-range", "0:2",
                "--nt", "16", "--ns", "21", "--out", str(out))
    assert doc["shape"] == [21, 16]
    assert doc["residual"]["max"] < 1e-9
    text = out.read_text()
    assert text.count("\nf ") + text.startswith("f ") == 20 * 15


def test_foliation(capsys):
    doc = _json(capsys, "foliation", "--lambda", "0", "--s0", "0", "--a-prime", "1",
                "--b-prime", "2", "--r", "1")
    assert doc["A"][6] == pytest.approx(3.65625, abs=1e-9)


def test_sweep_serial_matches_parallel(capsys):
    argv = ["sweep", "--lambda-grid", "0:1:3", "--mode", "cyl"]
    code, serial, _ = _run(capsys, *argv)
    code2, parallel, _ = _run(capsys, *argv, "--jobs", "2")
    assert code == code2 == 0
    assert serial == parallel
    lines = [json.loads(l) for l in serial.splitlines()]
    assert [l["regime"] for l in lines] == ["GrimReaper", "Critical", "SuperCritical"]
    for rep in lines:
        jsonschema.validate(rep, SCHEMA)


def test_determinism(tmp_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"c{k}.csv"
        _json(capsys, "cyl", "--lambda", "0.3", "--out", str(path))
        outs.append(path.read_bytes())
        outs.append(_run(capsys, "classify", "rot", "--from-axis", "--lambda", "1")[1])
    assert outs[0] == outs[2] and outs[1] == outs[3]


@pytest.mark.parametrize("argv", [
    ["cyl", "--lambda", "x"],
    ["cyl"],
    ["cyl", "--lambda", "1", "--s-range", "3:1"],
    ["cyl", "--lambda", "1", "--v3", "1.5"],
    ["rot", "--lambda", "1"],
    ["rot", "--lambda", "1", "--x0", "-1"],
    ["rot", "--lambda", "1", "--from-axis", "--s-range=-1:1"],
    ["trans", "--lambda", "0", "--v", "0,0,0"],
    ["foliation", "--lambda", "0", "--a-prime", "1", "--b-prime", "1", "--r", "1", "--nt", "16"],
    ["sweep", "--lambda-grid", "0:1", "--mode", "cyl"],
    ["nosuchcommand"],
])
def test_argument_errors_exit_2(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 2
    assert "usage" in err.lower()


def test_numerical_failure_names_subsystem(capsys):
    code, _, err = _run(capsys, "cyl", "--lambda", "1", "--v3", "0")
    assert code == 1
    assert "error in cylindrical" in err


def test_unwritable_output(tmp_path, capsys):
    code, _, err = _run(capsys, "cyl", "--lambda", "1", "--out", str(tmp_path / "no" / "c.csv"))
    assert code == 1 and "cannot write" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lamsol", "classify", "cyl", "--lambda", "0"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["regime"] == "GrimReaper"
