import csv
import json
import math
import subprocess
import sys

import pytest

from cycleint.cli import main
from cycleint.verify import ROW_KEYS


def run(*args):
    return subprocess.run([sys.executable, "-m", "cycleint", *args], capture_output=True, text=True)


def test_integral_const(capsys):
    assert main(["integral", "--form", "1,0,-2", "--family", "const"]) == 0
    out = capsys.readouterr().out
    value = float(out.split("C(F, Q)")[1].split()[0])
    assert value == pytest.approx(2 * math.log(3 + 2 * math.sqrt(2)), rel=1e-12)


def test_integral_square_discriminant(capsys):
    assert main(["integral", "--form", "2,1,-1"]) == 2
    assert "square discriminant 9" in capsys.readouterr().err


def test_integral_by_discriminant_with_operator(capsys):
    assert main(["integral", "--D", "13", "--family", "productE4E6", "--op", "xi"]) == 0
    out = capsys.readouterr().out
    assert "174.69234798" in out


@pytest.mark.parametrize("argv", [
    ["integral", "--form", "1,2"],
    ["integral"],
    ["integral", "--D", "5", "--family", "eisenstein", "--s", "0.9"],
    ["integral", "--D", "5", "--M", "0"],
    ["integral", "--D", "5", "--tol", "-1"],
    ["classes", "--D", "4"],
    ["verify", "--suite", "default", "--threads", "0"],
    ["verify", "--tol", "0"],
])
def test_invalid_input_exit_2(argv, capsys):
    assert main(argv) == 2


def test_argparse_errors_exit_2():
    r = run("integral", "--family", "nope")
    assert r.returncode == 2
    assert run("frobnicate").returncode == 2


def test_quadrature_failure_exit_3(capsys):
    assert main(["integral", "--D", "13", "--family", "Delta", "--tol", "1e-300"]) == 3


def test_classes(capsys):
    assert main(["classes", "--D", "5"]) == 0
    out = capsys.readouterr().out
    assert "1 class" in out and "[1,1,-1]" in out and "(3+1*sqrt(5))/2" in out
    assert main(["classes", "--D", "8"]) == 0
    out = capsys.readouterr().out
    assert f"{3 + 2 * math.sqrt(2):.10f}"[:10] in out
    assert main(["classes", "--D", "60"]) == 0
    assert "4 classes" in capsys.readouterr().out


def test_verify_empty_suite(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "", "--out", str(out)]) == 0
    assert json.loads(out.read_text()) == []


def test_verify_default_json_and_sidecar(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "default", "--out", str(out)]) == 0
    rows = json.loads(out.read_text())
    assert len(rows) >= 12
    assert all(list(r) == list(ROW_KEYS) for r in rows)
    meta = json.loads((tmp_path / "r.json.meta.json").read_text())
    assert meta["wall_time"] > 0 and len(meta["reports"]) == len(rows)


def test_verify_tolerance_below_noise(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "default", "--tol", "1e-15", "--out", str(out)]) == 1
    rows = json.loads(out.read_text())
    assert len(rows) >= 12 and not all(r["pass"] for r in rows)


def test_verify_csv_and_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    out = tmp_path / "r.csv"
    cfg.write_text(f"# batch run\nsuite = default\nforms = 1,1,-1\nformat = json\nout = {out}\n")
    assert main(["verify", "--config", str(cfg), "--format", "csv"]) == 0  # flag wins
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == ROW_KEYS
    assert all(r[2] == "[1,1,-1]" and r[-1] == "true" for r in rows[1:])


def test_verify_config_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("suite = default\ncolour = blue\n")
    assert main(["verify", "--config", str(cfg)]) == 2


def test_verify_square_form_override(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--forms", "2,1,-1", "--out", str(out)]) == 2
    rows = json.loads(out.read_text())
    assert rows and all(r["pass"] is False and r["lhs_re"] is None for r in rows)


def test_verify_byte_identical_runs(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("verify", "--suite", "default", "--out", str(a)).returncode == 0
    assert run("verify", "--suite", "default", "--out", str(b), "--threads", "3").returncode == 0
    assert a.read_bytes() == b.read_bytes()


def test_backend_flag(capsys):
    from cycleint import kernels

    prev = kernels.backend_name()
    try:
        assert main(["--backend", "python", "integral", "--D", "5"]) == 0
        assert kernels.backend_name() == "python"
    finally:
        kernels.use_backend(prev)
