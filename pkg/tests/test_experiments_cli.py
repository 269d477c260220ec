import csv
import json
import subprocess
import sys
from dataclasses import replace

import numpy as np
import pytest

from uplinkcomp.cli import main
from uplinkcomp.events import Scheme
from uplinkcomp.experiments import (CSV_COLUMNS, CSV_SCHEMA, PRESETS, ExperimentConfig, ThetaGrid,
                                    analytic_curve, config_from_dict, dump_protocol_trace,
                                    fitted_slope, load_config, preset, run_experiment)


def read_curve(path):
    with open(path) as fh:
        first = fh.readline().strip()
        rows = list(csv.DictReader(fh))
    return first, rows


def test_presets_encode_captioned_scenarios():
    f3, f4, f5, f6 = (preset(p) for p in PRESETS)
    assert f3.geometry.z == 2.0 and f3.geometry.t == -2.0 and f3.power_db == 20.0
    assert f4.geometry.z == (1.0, 2.0) and f4.geometry.t == (-2.0, -1.0)
    assert f4.power_mode == "compensation" and f4.power_db == 10.0
    assert f5.variants[1][1].intensity == 0.25 and f5.variants[1][1].power_scale == 1.0
    assert f6.geometry.z == (0.0, 2.0) and f6.variants[1][1].power_scale == 17.0
    with pytest.raises(ValueError):
        preset("fig7")


def test_theta_grid():
    g = ThetaGrid.parse("-3:3:1.5")
    np.testing.assert_allclose(g.values(), [-3, -1.5, 0, 1.5, 3])
    assert len(ThetaGrid().values()) == 91
    for bad in ("1:2", "a:b:c", "0:5:0", "5:0:1", "0:inf:1"):
        with pytest.raises(ValueError):
            ThetaGrid.parse(bad)


def test_config_validation():
    with pytest.raises(ValueError):
        replace(preset("fig3"), modes=())
    with pytest.raises(ValueError):
        replace(preset("fig3"), modes=("plots",))
    with pytest.raises(ValueError):
        config_from_dict({"preset": "fig3", "colour": "blue"})
    with pytest.raises(ValueError):
        config_from_dict({"grid": "0:1:1"})


def test_inline_config(tmp_path):
    spec = {"scenario": {"name": "mine", "z": [1.0, 2.0], "t": -1.5, "power_db": 15,
                         "schemes": ["MARP", "AW+SIC"], "ppp": {"intensity": 0.1}},
            "grid": {"start_db": -5, "stop_db": 0, "step_db": 1}, "n_draws": 1000, "seed": 9}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(spec))
    cfg = load_config(path)
    assert cfg.name == "mine" and cfg.geometry.z == (1.0, 2.0) and cfg.geometry.t == -1.5
    assert cfg.schemes == (Scheme.MARP, Scheme.AW_SIC)
    assert cfg.variants[1][1].intensity == 0.1
    assert cfg.grid == ThetaGrid(-5, 0, 1) and cfg.seed == 9


def small_fig3(tmp_path, **kw):
    return replace(preset("fig3"), grid=ThetaGrid(-3.0, 3.0, 1.5), n_draws=60_000,
                   out_dir=str(tmp_path), **kw)


def test_fig3_run_writes_curves_and_report(tmp_path):
    rep = run_experiment(small_fig3(tmp_path))
    names = set(rep["files"])
    assert "fig3_nofield_analytic_marp.csv" in names
    assert "fig3_nofield_montecarlo_mmse-sic.csv" in names
    assert "fig3_nofield_analytic_mis.csv" not in names
    first, rows = read_curve(tmp_path / "fig3_nofield_analytic_aw-sic.csv")
    assert first == f"# schema={CSV_SCHEMA}"
    assert tuple(rows[0]) == CSV_COLUMNS and len(rows) == 5
    entry = json.loads((tmp_path / "fig3_report.json").read_text())["variants"]["nofield"]
    assert entry["reduction_at_0db"]["analytic:AW+SIC"] == pytest.approx(0.72, abs=0.02)
    assert entry["reduction_at_0db"]["analytic:AW+DIS"] == pytest.approx(0.83, abs=0.02)
    assert entry["slopes"]["MARP"] == pytest.approx(1.0, abs=0.02)
    assert entry["slopes"]["AW+SIC"] == pytest.approx(2.0, abs=0.02)


def test_analytic_and_montecarlo_columns_agree(tmp_path):
    run_experiment(small_fig3(tmp_path, schemes=(Scheme.MARP,)))
    _, exact = read_curve(tmp_path / "fig3_nofield_analytic_marp.csv")
    _, mc = read_curve(tmp_path / "fig3_nofield_montecarlo_marp.csv")
    for a, m in zip(exact, mc):
        assert a["theta_db"] == m["theta_db"]
        p = float(a["outage"])
        assert abs(float(m["outage"]) - p) < 3 * np.sqrt(p * (1 - p) / 60_000)
        assert m["seed"] == "0" and m["mode"] == "montecarlo"


def test_rerun_is_byte_identical(tmp_path):
    cfg = small_fig3(tmp_path / "a", schemes=(Scheme.MARP, Scheme.AW_DIS))
    run_experiment(cfg)
    run_experiment(replace(cfg, out_dir=str(tmp_path / "b")))
    for f in (tmp_path / "a").glob("*.csv"):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_field_variant_report(tmp_path):
    cfg = replace(preset("fig5"), grid=ThetaGrid(-1.0, 1.0, 1.0), modes=("analytic",),
                  out_dir=str(tmp_path))
    rep = run_experiment(cfg)
    ppp = rep["variants"]["ppp"]
    assert ppp["reduction_at_0db"]["analytic:AW+SIC"] == pytest.approx(0.59, abs=0.02)
    for s in ("MARP", "AW+SIC"):
        assert ppp["shift_db"][s] == pytest.approx(ppp["shift_db"]["expected"], abs=0.3)


def test_fitted_slope_of_power_law():
    th = np.linspace(-40, -30, 11)
    assert fitted_slope(th, 3 * (10 ** (th / 10)) ** 2) == pytest.approx(2.0)


def test_analytic_curve_with_pinned_second_threshold():
    cfg = replace(preset("fig3"), theta2_db=0.0)
    p = analytic_curve(Scheme.MARP, cfg, None, [-10.0, 0.0])
    assert p[0] < p[1]


def test_protocol_trace_dump(tmp_path):
    path = tmp_path / "trace.txt"
    summary = dump_protocol_trace(preset("fig3"), 200, 4, path)
    text = path.read_text()
    assert text.count("## draw") == 200
    assert summary["mismatches"] == 0 and summary["max_bits"] <= 5
    assert sum(summary["histogram"].values()) == 200
    assert "# equivalence mismatches=0" in text
    tiny = dump_protocol_trace(preset("fig3"), 100, 4, tmp_path / "t2.txt", theta_db=-120.0)
    assert tiny["histogram"] == {"1,2": 100}


def test_cli_run_and_trace(tmp_path, capsys):
    assert main(["run", "--preset", "fig3", "--draws", "2000", "--grid=-2:2:2",
                 "--mode", "montecarlo", "--out", str(tmp_path), "--seed", "3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["status"] == "ok" and "fig3_report.json" in out["files"]
    assert main(["trace", "--preset", "fig4", "--draws", "20",
                 "--out", str(tmp_path / "tr.txt")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["mismatches"] == 0


@pytest.mark.parametrize("argv, code", [
    (["run", "--preset", "fig9"], 2),
    (["run"], 2),
    (["run", "--preset", "fig3", "--grid", "bad"], 1),
    (["run", "--config", "/nonexistent/cfg.json"], 1),
])
def test_cli_errors_are_machine_readable(argv, code, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == code
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["status"] == "error" and err["message"]


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "uplinkcomp", "run", "--preset", "fig4",
                          "--grid=0:0:1", "--mode", "analytic", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["status"] == "ok"
    res = subprocess.run([sys.executable, "-m", "uplinkcomp", "bogus"], capture_output=True,
                         text=True)
    assert res.returncode == 2 and json.loads(res.stderr)["status"] == "error"


def test_experiment_config_defaults():
    cfg = ExperimentConfig("x", preset("fig3").geometry, 20.0)
    assert cfg.modes == ("analytic", "montecarlo") and cfg.grid == ThetaGrid(-30.0, 15.0, 0.5)
