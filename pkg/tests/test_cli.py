import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from geomech.cli import SystemFileError, load_text, run

EXAMPLES = Path(__file__).resolve().parent.parent / "examples_sys"


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, text, name="sys.sys"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_derive_el_kepler():
    code, out, _ = cli("derive-el", EXAMPLES / "kepler.sys")
    assert code == 0
    assert "E_1 = -q1_tt - q1/(q1^2 + q2^2 + q3^2)^(3/2)" in out
    assert out.rstrip().endswith("status: pass")


def test_helmholtz_failure_exits_2():
    code, out, _ = cli("helmholtz", EXAMPLES / "friction-op.sys")
    assert code == 2
    assert "NonZero" in out


@pytest.mark.parametrize("command, name, expected", [
    ("hamiltonize", "kepler.sys", 0),
    ("conserve", "kepler.sys", 0),
    ("symmetry-check", "kepler.sys", 0),
    ("newton-check", "friction.sys", 0),
    ("frame-transform", "rotating.sys", 0),
    ("coriolis", "rotating.sys", 0),
    ("relative-accel", "havas.sys", 0),
    ("curvature", "oscillator.sys", 2),
    ("noether-identities", "gauge.sys", 2),
    ("conserve", "havas.sys", 2),
    ("legendre", "friction-op.sys", 1),
])
def test_exit_codes(command, name, expected):
    code, _, err = cli(command, EXAMPLES / name)
    assert code == expected, err


def test_json_report(tmp_path):
    report = tmp_path / "report.json"
    code, _, _ = cli("hamiltonize", EXAMPLES / "havas.sys", "--out", report)
    assert code == 0
    data = json.loads(report.read_text())
    assert {"command", "system", "results"} <= set(data)
    assert data["command"] == "hamiltonize"
    for item in data["results"]:
        assert "name" in item
        assert len({"expression", "verdict", "stats"} & set(item)) == 1
    exprs = [r["expression"] for r in data["results"] if "expression" in r]
    assert "1/2*p1^2*exp(-k*t/m0)/m0" in exprs


def test_json_to_stdout():
    code, out, _ = cli("symmetry-check", EXAMPLES / "havas.sys", "--json")
    data = json.loads(out)
    assert code == 0 and data["status"] == "pass"
    assert any(r.get("verdict") == "Exact" for r in data["results"])


def test_simulate_writes_csv_and_drift(tmp_path):
    path = tmp_path / "traj.csv"
    code, out, _ = cli("simulate", EXAMPLES / "kepler.sys", "--tmax", "1", "--csv", path,
                       "--conserve", "energy,M12")
    assert code == 0
    assert "drift energy" in out and "drift M12" in out
    rows = list(csv.reader(open(path, encoding="utf-8")))
    assert rows[0] == ["t", "q1", "q2", "q3", "q1_t", "q2_t", "q3_t"]
    assert len(rows) == 1002
    # 17 significant digits, so the value read back is the stored double
    assert rows[-1][1] == "0.54030230586813921"


def test_simulate_hamiltonian_columns(tmp_path):
    path = tmp_path / "traj.csv"
    code, _, _ = cli("simulate", EXAMPLES / "kepler-ham.sys", "--tmax", "0.5", "--csv", path)
    assert code == 0
    assert next(csv.reader(open(path, encoding="utf-8")))[4:] == ["p1", "p2", "p3"]


def test_simulate_reports_drift_failure():
    code, out, _ = cli("simulate", EXAMPLES / "havas.sys", "--conserve", "energy", "--tmax", "1")
    assert code == 2 and "status: fail" in out


def test_undeclared_symbol_is_named(tmp_path):
    p = write(tmp_path, "[system]\ndim = 1\n\n[lagrangian]\nL = \"1/2*q1_t^2 - omega*q1\"\n")
    code, _, err = cli("derive-el", p)
    assert code == 1
    assert "omega" in err and f"{p}:5:" in err


def test_syntax_error_has_line_number(tmp_path):
    p = write(tmp_path, "[system]\ndim = 1\n# comment\n[lagrangian]\nL = \"q1_t^2 +\"\n")
    code, _, err = cli("derive-el", p)
    assert code == 1 and f"{p}:5:" in err


@pytest.mark.parametrize("text, line", [
    ("[system]\ndim = 1\n[bogus]\n", 3),
    ("[system]\ndim = 1\n[lagrangian]\nM = \"q1\"\n", 4),
    ("[system]\ndim = 1\n[lagrangian]\nL = \"q1\"\n[hamiltonian]\nH = \"p1\"\n", 5),
    ("[system]\ndim = two\n", 2),
])
def test_malformed_files(text, line):
    with pytest.raises(SystemFileError) as ei:
        load_text(text, "bad.sys")
    assert ei.value.line == line


def test_missing_file():
    code, _, err = cli("derive-el", "/nonexistent/file.sys")
    assert code == 1 and "error" in err


def test_wrong_section_for_command():
    code, _, err = cli("hamilton-eqs", EXAMPLES / "rotating.sys")
    assert code == 1 and "[hamiltonian]" in err


def test_seed_is_accepted():
    code, _, _ = cli("helmholtz", EXAMPLES / "kepler.sys", "--seed", "11")
    assert code == 0


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "geomech.cli", "current", str(EXAMPLES / "kepler.sys")],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert "q1*q2_t" in proc.stdout
