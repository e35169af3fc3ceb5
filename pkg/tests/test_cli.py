from __future__ import annotations

import json
import subprocess
import sys

import pytest

from drcycles.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_graphs_json(capsys):
    code, out = _run(capsys, "graphs", "1", "1")
    assert code == 0
    data = json.loads(out.out)
    assert data["count"] == 2
    assert sorted(g["automorphisms"] for g in data["graphs"]) == [1, 2]


def test_graphs_table(capsys):
    code, out = _run(capsys, "graphs", "--g", "2", "--n", "0", "--format", "table")
    assert code == 0 and out.out.startswith("7 stable graphs")


def test_integral(capsys):
    code, out = _run(capsys, "integral", "1", "1", "--format", "table")
    assert (code, out.out.strip()) == (0, "1/24")
    code, out = _run(capsys, "integral", "--g", "2", "--psi", "", "--kappa", "1,1,1", "--format", "table")
    assert out.out.strip() == "43/2880"


def test_integral_cache_written(capsys, tmp_path):
    path = tmp_path / "c.txt"
    code, _ = _run(capsys, "integral", "2", "4", "--cache", str(path))
    assert code == 0
    assert path.read_text().strip() == "2;4; -> 1/1152"


def test_cache_from_environment(capsys, tmp_path, monkeypatch):
    path = tmp_path / "env.txt"
    monkeypatch.setenv("DRCYCLES_CACHE", str(path))
    _run(capsys, "integral", "1", "1")
    assert path.exists()


def test_verify_exit_codes(capsys):
    code, out = _run(capsys, "verify", "--g", "1", "--A=1,-1", "--format", "table")
    assert code == 0 and "degree 2: holds" in out.out
    code, out = _run(capsys, "verify", "1", "3,-1", "1", "--d", "2")
    assert code == 0
    assert json.loads(out.out)["certificates"][0]["verdict"] == "holds"


def test_dr_and_pixton(capsys):
    code, out = _run(capsys, "dr", "--g", "1", "--A=1,-1")
    assert code == 0
    coeffs = sorted(item["coefficient"] for item in json.loads(out.out)["class"])
    assert coeffs == ["-1/24", "1/2", "1/2"]
    code, out = _run(capsys, "pixton", "1", "0", "--max-codim", "1")
    data = json.loads(out.out)
    assert any(item["coefficients_in_r"] == ["-1/24", "0/1", "1/24"] for item in data["polynomials_in_r"])


def test_pixton_jobs_deterministic(capsys):
    _, one = _run(capsys, "pixton", "1", "2,1,-3", "--max-codim", "2")
    _, four = _run(capsys, "pixton", "1", "2,1,-3", "--max-codim", "2", "--jobs", "4")
    assert one.out == four.out


def test_compare_commands(capsys):
    code, out = _run(capsys, "compare", "hain", "--g", "1", "--A=2,-2", "--format", "table")
    assert (code, out.out.strip()) == (0, "hain: equal")
    code, out = _run(capsys, "compare", "zvonkine", "--g", "1", "--A=1,-1", "--max-codim", "2")
    assert code == 0 and json.loads(out.out)["equal"]


def test_chiodo_command(capsys):
    code, out = _run(capsys, "chiodo", "--g", "1", "--A=4,1", "--r", "5", "--d", "0")
    assert code == 0
    (item,) = json.loads(out.out)["class"]
    assert item["coefficient"] == "-1/1"


@pytest.mark.parametrize("argv", [
    ["graphs", "0", "2"],
    ["integral", "1", "1,-1"],
    ["verify", "--g", "1", "--A=1,1"],
    ["verify", "--g", "1", "--A=1,-1", "--d", "1"],
    ["dr", "--g", "1", "--A=1,1"],
    ["pixton", "--g", "1", "--A=1,-1", "--max-codim", "9"],
    ["compare", "hain", "--g", "1", "--A=1,-1", "--k", "1"],
    ["chiodo", "--g", "1", "--A=1,1", "--r", "5", "--d", "1"],
    ["pixton", "--g", "1", "--A=x"],
    ["pixton", "--g", "1", "--A=1,-1", "--jobs", "0"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_r_min_too_low_is_lifted(capsys):
    code, out = _run(capsys, "pixton", "1", "0", "--max-codim", "1", "--r-min", "1")
    assert code == 0 and min(json.loads(out.out)["r_samples"]) >= 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "drcycles", "graphs", "0", "3", "--format", "table"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.startswith("1 stable graphs")
