import json
import subprocess
import sys

import pytest

from spectral_minmax.cli import run


@pytest.fixture
def uniform_file(tmp_path):
    path = tmp_path / "uniform.json"
    path.write_text(json.dumps({"segments": [[0, 1, 1, 1]]}))
    return path


@pytest.fixture
def diag_file(tmp_path):
    path = tmp_path / "d.json"
    path.write_text(json.dumps({"dim": 3, "re": [[1, 0, 0], [0, 2, 0], [0, 0, 3]],
                                "im": [[0] * 3] * 3}))
    return path


def test_quantile_grid(uniform_file, capsys):
    assert run(["quantile", str(uniform_file), "--grid", "4"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines == ["s,x", "0,0", "0.25,0.25", "0.5,0.5", "0.75,0.75"]


def test_spectrum(diag_file, capsys):
    assert run(["spectrum", str(diag_file)]) == 0
    out = capsys.readouterr().out
    assert "1,1\n2,2\n3,3" in out
    assert "0.33333333333333331" in out


def test_discretize_and_generate(uniform_file, tmp_path, capsys):
    assert run(["discretize", str(uniform_file), "--n", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["atoms"] == [[0.25, 0.5], [0.75, 0.5]]
    out = tmp_path / "m.json"
    assert run(["generate", "--n", "4", "--seed", "3", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["dim"] == 4


def test_verify_kyfan_random_pass(tmp_path, capsys):
    report = tmp_path / "r.json"
    code = run(["verify", "kyfan", "--random", "n=6", "seed=7", "--j", "3", "--trials", "10000",
                "--out", str(report)])
    assert code == 0
    assert json.loads(report.read_text())["status"] == "pass"
    assert capsys.readouterr().out.startswith("theorem,n,parameters")


def test_verify_kyfan_failure_exit_3(tmp_path):
    path = tmp_path / "neg.json"
    path.write_text(json.dumps({"dim": 2, "re": [[-2, 0], [0, -1]], "im": [[0, 0], [0, 0]]}))
    assert run(["verify", "kyfan", "--matrix", str(path), "--j", "1", "--trials", "10"]) == 3


def test_verify_other_theorems(diag_file):
    assert run(["verify", "cf", "--matrix", str(diag_file), "--i", "2", "--j", "2",
                "--outer-trials", "10", "--inner-trials", "10"]) == 0
    assert run(["verify", "wielandt", "--random", "n=6", "seed=1", "--intervals", "0:2,3:4",
                "--outer-trials", "10", "--inner-trials", "10"]) == 0
    assert run(["verify", "conditional", "--matrix", str(diag_file), "--t0", "1.5", "--t1", "3.5",
                "--trials", "100"]) == 0
    assert run(["verify", "conditional", "--random", "n=8", "seed=2", "--intervals", "3:5"]) == 0
    assert run(["verify", "lidskii", "--random", "n=8", "seed=4"]) == 0
    assert run(["verify", "domination", "--random", "n=5", "seed=4"]) == 0
    assert run(["verify", "domination", "--random", "n=5", "seed=4", "--indefinite"]) == 0


def test_validation_errors_exit_2(tmp_path, diag_file):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"atoms": [[0, 0.4]]}))
    assert run(["quantile", str(bad)]) == 2
    assert run(["verify", "kyfan", "--matrix", str(diag_file), "--j", "9"]) == 2
    assert run(["spectrum", str(tmp_path / "missing.json")]) == 2
    nonherm = tmp_path / "nh.json"
    nonherm.write_text(json.dumps({"dim": 2, "re": [[0, 1], [0, 0]], "im": [[0, 0], [0, 0]]}))
    assert run(["spectrum", str(nonherm)]) == 2


def test_usage_errors_exit_64(diag_file):
    with pytest.raises(SystemExit) as exc:
        run(["verify", "nonsense"])
    assert exc.value.code == 64
    assert run(["verify", "kyfan", "--matrix", str(diag_file)]) == 64
    assert run(["verify", "kyfan", "--random", "size=3", "--j", "1"]) == 64


def test_generate_deterministic():
    cmd = [sys.executable, "-m", "spectral_minmax", "generate", "--n", "5", "--seed", "11"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a
