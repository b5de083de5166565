import json
import subprocess
import sys

import pytest

from semilinear_uq import experiments as ex
from semilinear_uq.cli import main
from semilinear_uq.qmc import read_generating_vector


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(
        "problem: {h: 0.05}\n"
        "potential: {s_max: 4}\n"
        "solver: {damping: 1.0}\n"
        "gap: {s: 4, n_samples: 4, chunk: 2}\n"
        "deriv: {s: 2, n_samples: 1, order_cap: 1}\n"
        "qmc: {s: 2, N: [7, 11, 13], R: 4}\n"
    )
    return path


def test_solve_command(small_config, tmp_path, capsys):
    assert main(["solve", "-c", str(small_config), "--y", "0.1,-0.2", "--out", str(tmp_path)]) == 0
    report = json.loads(capsys.readouterr().out.split("\nwrote")[0])
    assert report["checks_failed"] == [] and report["gap"] > 0
    table = ex.read_csv(tmp_path / "solve.csv")
    assert table.columns == ["x1", "u"] and len(table.rows) == 19
    assert table.meta["lam"] == pytest.approx(report["lambda"])


def test_gap_scan_command(small_config, tmp_path):
    assert main(["gap-scan", "-c", str(small_config), "--out", str(tmp_path), "--seed", "2"]) == 0
    table = ex.read_csv(tmp_path / "gap.csv")
    assert table.meta["seed"] == 2 and len(table.rows) == 4


def test_deriv_and_qmc_commands(small_config, tmp_path):
    assert main(["deriv-scan", "-c", str(small_config), "--out", str(tmp_path)]) == 0
    code = main(["qmc", "-c", str(small_config), "--out", str(tmp_path)])
    assert code in (ex.EXIT_OK, ex.EXIT_SOFT)  # three tiny N values: the fit is only a smoke test
    assert (tmp_path / "qmc.csv").exists() and (tmp_path / "qmc_fits.csv").exists()


def test_cbc_command(tmp_path, capsys):
    assert main(["cbc", "--N", "31", "--s", "3", "--out", str(tmp_path)]) == 0
    rule, theta = read_generating_vector(tmp_path / "lattice_N31_s3.txt")
    assert rule.N == 31 and rule.s == 3
    assert capsys.readouterr().out.splitlines()[0] == " ".join(map(str, rule.z))


def test_bad_input_gives_exit_one(tmp_path):
    assert main(["cbc", "--N", "30", "--s", "2", "--out", str(tmp_path)]) == 1
    bad = tmp_path / "bad.yaml"
    bad.write_text("problem: {nope: 1}\n")
    assert main(["solve", "-c", str(bad)]) == 1
    assert main(["solve", "--y", "0.9", "--out", str(tmp_path)]) == 1


def test_verify_combinatorics_small(capsys):
    assert main(["verify-combinatorics", "--polys", "1"]) == 0
    assert "FAILED" not in capsys.readouterr().out


def test_console_script_module_entry():
    out = subprocess.run([sys.executable, "-m", "semilinear_uq", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "solve" in out.stdout
