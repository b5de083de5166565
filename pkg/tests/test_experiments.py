import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from semilinear_uq import experiments as ex


def small_cfg(**sections):
    raw = {"problem": {"h": 1 / 20}, "potential": {"s_max": 8}, "solver": {"damping": 1.0}, "seed": 3}
    for k, v in sections.items():
        if isinstance(v, dict):
            raw.setdefault(k, {}).update(v)
        else:
            raw[k] = v
    return ex.config_from_dict(raw)


# ---------------------------------------------------------------- fits


@given(st.floats(-4, 4).filter(lambda a: abs(a) > 1e-3), st.floats(0.1, 10))
def test_fit_slope_recovers_power_law(alpha, c):
    xs = [2, 4, 8, 16, 32]
    fit = ex.fit_slope(xs, [c * x**alpha for x in xs])
    assert fit.slope == pytest.approx(alpha, abs=1e-10)
    assert fit.intercept == pytest.approx(math.log(c), abs=1e-9)
    assert fit.r2 == pytest.approx(1.0)


def test_fit_slope_examples():
    assert ex.fit_slope([1, 2, 4], [1, 1 / 8, 1 / 64]).slope == pytest.approx(-3.0)
    flat = ex.fit_slope([1, 2, 4], [5, 5, 5])
    assert flat.slope == pytest.approx(0.0, abs=1e-12) and flat.r2 == 1.0
    with pytest.raises(ValueError):
        ex.fit_slope([1, 2], [1, 2])
    with pytest.raises(ValueError):
        ex.fit_slope([1, 2, 3], [1, 0, 2])


def test_fit_check_band():
    fit = ex.fit_slope([1, 2, 4], [1, 0.5, 0.25])
    assert ex.FitCheck("x", "q", fit, -1.0, -1.3, -0.7).passed
    assert not ex.FitCheck("x", "q", fit, -3.0, -3.5, -2.5).passed


def test_exit_codes():
    t = ex.Table(["a"])
    fit = ex.fit_slope([1, 2, 4], [1, 0.5, 0.25])
    assert ex.StudyResult("s", t).exit_code == ex.EXIT_OK
    assert ex.StudyResult("s", t, fits=[ex.FitCheck("s", "q", fit, 0, 1, 2)]).exit_code == ex.EXIT_SOFT
    assert ex.StudyResult("s", t, hard_failures=["x"]).exit_code == ex.EXIT_HARD


# ---------------------------------------------------------------- config


def test_config_defaults_and_hash():
    a = ex.config_from_dict({})
    b = ex.config_from_dict({"seed": 5, "out": "/tmp/x"})
    assert a.problem.h == 0.01 and a.solver.damping == 0.5
    assert a.hash() == b.hash() and len(a.hash()) == 12
    assert ex.config_from_dict({"problem": {"eta": 2.0}}).hash() != a.hash()


def test_config_rejects_unknown_keys_and_bad_values():
    with pytest.raises(ValueError, match="unknown keys"):
        ex.config_from_dict({"problem": {"etaa": 1}})
    with pytest.raises(ValueError, match="top-level"):
        ex.config_from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        ex.config_from_dict({"problem": {"domain": "disk"}})
    with pytest.raises(ValueError):
        small_cfg(qmc={"N": [128]}).validate_for("qmc")
    with pytest.raises(ValueError):
        small_cfg(truncation={"s": [4, 2], "s_ref": 8}).validate_for("truncation")


def test_load_yaml_config(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("problem:\n  eta: 2.0\n  p: 2\nseed: 9\n")
    cfg = ex.load_config(p)
    assert cfg.problem.eta == 2.0 and cfg.problem.p == 2 and cfg.seed == 9


def test_shipped_configs_load():
    from pathlib import Path

    for path in sorted((Path(__file__).parents[1] / "configs").glob("*.yaml")):
        ex.load_config(path)


# ---------------------------------------------------------------- CSV


def test_csv_roundtrip(tmp_path):
    t = ex.Table(["N", "name", "value"], [[7, "lambda", 0.1 + 0.2], [11, "energy", 1e-300]],
                 {"study": "x", "h": 0.01})
    path = ex.emit_csv(t, tmp_path / "sub" / "t.csv")
    back = ex.read_csv(path)
    assert back.columns == t.columns
    assert back.rows == t.rows  # repr keeps every bit
    assert back.meta == t.meta
    assert not list((tmp_path / "sub").glob("*.tmp"))


# ---------------------------------------------------------------- studies (tiny)


def test_gap_scan_small():
    cfg = small_cfg(gap={"s": 4, "n_samples": 6, "chunk": 4})
    res = ex.run_gap_scan(cfg)
    assert res.exit_code == ex.EXIT_OK
    assert len(res.table.rows) == 6
    gaps = np.asarray(res.table.column("gap"))
    assert np.all(gaps > 0)
    assert np.all(gaps >= np.asarray(res.table.column("witness")) - 1e-8)
    assert res.summary["min_gap"] == pytest.approx(gaps.min())


def test_deriv_scan_small():
    cfg = small_cfg(deriv={"s": 3, "coords": [1, 2], "order_cap": 2, "n_samples": 1})
    res = ex.run_deriv_scan(cfg)
    assert [r[0] for r in res.table.rows][0] == "0"
    assert len(res.table.rows) == 6
    assert set(res.summary["per_order"]) == {0, 1, 2}


def test_qmc_study_small():
    cfg = small_cfg(qmc={"s": 2, "N": [7, 11, 13], "R": 4, "quantities": ["lambda", "energy"]})
    res = ex.run_qmc_convergence(cfg)
    assert len(res.table.rows) == 6
    assert [f.quantity for f in res.fits] == ["lambda", "energy"]
    assert all(r[6] > 0 for r in res.table.rows)
    assert res.summary["z"][7][0] == 1


def test_truncation_study_small():
    cfg = small_cfg(potential={"family": "ramp", "c": 5.0},
                    truncation={"s": [1, 2, 4], "s_ref": 8, "n_points": 13, "chunk": 7})
    res = ex.run_truncation(cfg)
    strong = res.table.column("strong_error")
    assert all(a > b for a, b in zip(strong, strong[1:]))
    assert {f.quantity for f in res.fits} == {"strong", "weak"}


def test_study_deterministic_and_thread_independent(tmp_path):
    cfg = small_cfg(gap={"s": 4, "n_samples": 6, "chunk": 3})
    a = ex.write_study(ex.run_gap_scan(cfg, threads=1), tmp_path / "a")[0].read_bytes()
    b = ex.write_study(ex.run_gap_scan(cfg, threads=2), tmp_path / "b")[0].read_bytes()
    assert a == b
    other = small_cfg(gap={"s": 4, "n_samples": 6, "chunk": 3}, seed=4)
    assert ex.run_gap_scan(other).table.rows != ex.read_csv(tmp_path / "a" / "gap.csv").rows


def test_output_dir_precedence(monkeypatch):
    cfg = ex.config_from_dict({})
    monkeypatch.setenv(ex.OUT_ENV, "/tmp/env_out")
    assert str(ex.output_dir(cfg)) == "/tmp/env_out"
    assert str(ex.output_dir(ex.config_from_dict({"out": "/tmp/c"}))) == "/tmp/c"
    assert str(ex.output_dir(cfg, "/tmp/o")) == "/tmp/o"
    monkeypatch.delenv(ex.OUT_ENV)
    assert str(ex.output_dir(cfg)) == "results"


def test_solve_hard_checks_pass_on_real_state():
    cfg = small_cfg()
    spec = ex.build_spec(cfg)
    gs = ex._solve(spec, cfg, np.zeros(8))
    assert ex.solve_hard_checks(spec, gs) == []
