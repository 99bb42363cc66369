from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from fracairy.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main, write_grid_csv, write_report
from fracairy.verification import VerificationReport, compare


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_solve_writes_grid_csv(tmp_path):
    out = tmp_path / "u.csv"
    code = main(["solve", "--problem", "2", "--alpha", "0.5", "--preset", "psi1=poly:2",
                 "--n-steps", "8", "--n-x", "4", "--out", str(out)])
    assert code == EXIT_OK
    rows = _rows(out.read_text())
    assert rows[0] == ["x", "t", "u"]
    assert len(rows) == 1 + 9 * 5
    # ordered by t, then x
    assert [r[1] for r in rows[1:6]] == ["0"] * 5
    assert rows[1:6][-1][0] == "2"
    assert float(rows[-1][2]) != 0.0


def test_csv_uses_twelve_significant_digits():
    buf = io.StringIO()
    write_grid_csv(buf, np.array([1 / 3]), np.array([0.0]), np.array([[math.pi]]))
    assert buf.getvalue().splitlines()[1] == "0.333333333333,0,3.14159265359"


def test_sampled_boundary_data_round_trip(tmp_path):
    data = tmp_path / "psi.csv"
    t = np.linspace(0, 1, 9)
    data.write_text("t,value\n" + "".join(f"{a:.12g},{a**2:.12g}\n" for a in t))
    args = ["solve", "--problem", "3", "--alpha", "0.5", "--n-steps", "8", "--n-x", "4"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--preset", f"psi={data}", "--out", str(a)]) == EXIT_OK
    assert main(args + ["--preset", "psi=poly:2", "--out", str(b)]) == EXIT_OK
    ua = np.array([float(r[2]) for r in _rows(a.read_text())[1:]])
    ub = np.array([float(r[2]) for r in _rows(b.read_text())[1:]])
    assert np.allclose(ua, ub, rtol=1e-10, atol=1e-12)


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nproblem = 1\nalpha = 0.4\nn_steps = 8\nn_x = 4\n\n[data]\nphi1 = sin\n")
    assert main(["solve", "--config", str(cfg)]) == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 1 + 9 * 5
    # command-line flags win over the file
    assert main(["solve", "--config", str(cfg), "--n-steps", "4"]) == EXIT_OK
    assert len(_rows(capsys.readouterr().out)) == 1 + 5 * 5


@pytest.mark.parametrize(
    "text",
    ["[run]\nseed = 3\n", "[solver]\nalpha = 0.5\n", "[run]\nalpha = half\n", "[run\n"],
)
def test_config_rejections(tmp_path, capsys, text):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(text)
    assert main(["solve", "--config", str(cfg)]) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--alpha", "1.5"],
        ["solve", "--alpha", "0.5", "--preset", "psi1"],
        ["solve", "--alpha", "0.5", "--preset", "psi1=cosh"],
        ["solve", "--alpha", "0.5", "--problem", "7"],
        ["solve", "--alpha", "0.5,0.6"],
        ["solve", "--alpha", "0.5", "--threads", "0"],
        ["solve", "--alpha", "0.5", "--config", "/nonexistent.ini"],
        ["frobnicate"],
        ["solve", "--n-steps", "many"],
    ],
)
def test_configuration_exit_code(argv, capsys):
    assert main(argv) == EXIT_CONFIG


def test_alpha_message(capsys):
    main(["solve", "--alpha", "1.5"])
    assert "0<alpha<1" in capsys.readouterr().err


def test_incompatible_data_exit_code(tmp_path):
    data = tmp_path / "psi.csv"
    data.write_text("t,value\n0,1\n1,2\n")
    assert main(["solve", "--problem", "3", "--alpha", "0.5", "--preset", f"psi={data}"]) == EXIT_CONFIG


def test_numerical_exit_code():
    assert main(["specfun", "eval", "--function", "wright", "--rho", "-0.3", "--mu", "0.5", "--z", "-300"]) == EXIT_NUMERICAL


def test_kernel_eval(capsys):
    assert main(["kernel", "eval", "--alpha", "0.5", "--mu", str(1 / 3), "--x", "0", "--t", "1"]) == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert rows[0] == ["x", "t", "value"]
    assert float(rows[1][2]) == pytest.approx(1 / (3 * math.gamma(1 / 3)), rel=1e-11)


def test_kernel_table(capsys):
    assert main(["kernel", "table", "--alpha", "0.5", "--branch", "V", "--x", "0.1,1,4", "--t", "0.5,1,3"]) == EXIT_OK
    assert len(_rows(capsys.readouterr().out)) == 1 + 12
    assert main(["kernel", "table", "--alpha", "0.5", "--x", "0,1", "--t", "0.5,1,3"]) == EXIT_CONFIG
    assert main(["kernel", "eval", "--alpha", "0.5", "--x", "0", "--t", "0"]) == EXIT_CONFIG
    assert main(["kernel", "eval", "--alpha", "0.5", "--branch", "V", "--x", "-1", "--t", "1"]) == EXIT_CONFIG


def test_specfun(capsys):
    assert main(["specfun", "eval", "--function", "wright", "--rho", "-0.5", "--mu", "0.5", "--z", "-1"]) == EXIT_OK
    row = _rows(capsys.readouterr().out)[1]
    assert float(row[2]) == pytest.approx(math.exp(-0.25) / math.sqrt(math.pi), rel=1e-11)
    assert main(["specfun", "eval", "--function", "mittag_leffler", "--nu", "1", "--z", "1"]) == EXIT_OK
    assert float(_rows(capsys.readouterr().out)[1][2]) == pytest.approx(math.e, rel=1e-11)
    assert main(["specfun", "eval", "--function", "m_wright", "--nu", "0.5", "--z", "bad"]) == EXIT_CONFIG
    assert main(["specfun", "eval", "--function", "mittag_leffler", "--z", "1j"]) == EXIT_CONFIG


def test_verify_rejects_bad_order(capsys):
    assert main(["verify", "--battery", "lemmas", "--alpha", "1.5"]) == EXIT_CONFIG


def test_report_lines_include_rejections():
    rep = VerificationReport((compare("zero_data", "z[1]", 0.0, 0.0, 0.0),), ("t=-1.0: times must be positive",))
    buf = io.StringIO()
    write_report(buf, rep)
    lines = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert lines[0]["id"] == "z[1]" and lines[0]["pass"] is True
    assert lines[1] == {"rejected": "t=-1.0: times must be positive"}


def test_verify_problem_battery(tmp_path, capsys):
    report = tmp_path / "r.jsonl"
    code = main(["verify", "--battery", "problems", "--alpha", "0.5", "--report", str(report)])
    recs = [json.loads(line) for line in report.read_text().splitlines()]
    assert code == EXIT_OK
    assert {r["check"] for r in recs} >= {"boundary_residual", "pde_residual", "energy_inequality"}
    assert all(r["pass"] for r in recs)
    err = capsys.readouterr().err.splitlines()
    assert len(err) == len(recs) and all(line.startswith("PASS ") for line in err)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fracairy", "specfun", "eval", "--function", "m_wright",
                           "--nu", "0.5", "--z", "0"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "function,z,re,im,abs_error"
