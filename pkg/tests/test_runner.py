"""Config validation, sweep tables, emission determinism and the CLI."""

import json
import math
import warnings

import numpy as np
import pytest

from twinbeam import cli
from twinbeam import runner as rn
from twinbeam.errors import ConfigError, DegradedAccuracyWarning


@pytest.fixture(autouse=True)
def quiet_clip_warnings():
    # the calibrated source legitimately warns about clipped sinc tails;
    # grid sizes in these tests are chosen for speed, not spectral purity
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegradedAccuracyWarning)
        yield


def tiny_config(**overrides):
    data = {
        "source": {"grid_points": 96},
        "gain": {"values": [0.05, 0.1]},
        "run": {"outputs": ["K_table", "g12_vs_g11", "nrf"]},
    }
    data.update(overrides)
    return rn.config_from_dict(data)


# ---------------------------------------------------------------- config


def test_empty_config_gives_documented_defaults():
    cfg = rn.config_from_dict({})
    assert cfg.source.pump_sigma == pytest.approx(7.877)
    assert cfg.source.grid_points == 512
    assert cfg.filter_s.kind == "none"
    assert cfg.filter_i.kind == "none"
    assert len(cfg.gains) == 10
    assert cfg.gains[0] == pytest.approx(0.005)
    assert cfg.gains[-1] == pytest.approx(0.3)
    # log spacing: constant ratio
    ratios = np.diff(np.log(np.array(cfg.gains)))
    assert np.allclose(ratios, ratios[0])
    assert cfg.trigger_beam == "signal"
    assert cfg.outputs == rn.OUTPUT_NAMES
    assert cfg.seed == 1234
    assert cfg.k_table_fwhms_nm == (1.0, 2.5, 10.0, math.inf)


def test_load_config_empty_file(tmp_path):
    path = tmp_path / "empty.toml"
    path.write_text("")
    assert rn.load_config(path) == rn.config_from_dict({})


def test_load_config_parse_error_names_file(tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text("[source\n")
    with pytest.raises(ConfigError, match="broken.toml"):
        rn.load_config(path)


def test_negative_fwhm_names_the_field():
    with pytest.raises(ConfigError, match="filters.signal.fwhm"):
        rn.config_from_dict(
            {"filters": {"signal": {"kind": "gaussian", "fwhm_nm": -1.0}}}
        )


def test_unknown_keys_are_errors():
    with pytest.raises(ConfigError, match="unknown key 'sourc'"):
        rn.config_from_dict({"sourc": {}})
    with pytest.raises(ConfigError, match="unknown key 'source.sigma'"):
        rn.config_from_dict({"source": {"sigma": 1.0}})
    with pytest.raises(ConfigError, match="unknown key 'filters.signal.width'"):
        rn.config_from_dict({"filters": {"signal": {"width": 2.0}}})


def test_filter_params_rejected_for_kind_none():
    with pytest.raises(ConfigError, match="filters.idler"):
        rn.config_from_dict({"filters": {"idler": {"kind": "none", "fwhm_nm": 1.0}}})


def test_missing_fwhm_rejected_for_real_filter():
    with pytest.raises(ConfigError, match="filters.signal.fwhm_nm is required"):
        rn.config_from_dict({"filters": {"signal": {"kind": "gaussian"}}})


def test_gain_validation():
    with pytest.raises(ConfigError, match="not both"):
        rn.config_from_dict({"gain": {"values": [0.1], "start": 0.1}})
    with pytest.raises(ConfigError, match=r"gain.values\[1\]"):
        rn.config_from_dict({"gain": {"values": [0.1, -0.2]}})
    with pytest.raises(ConfigError, match="positive for log"):
        rn.config_from_dict({"gain": {"start": 0.0, "stop": 1.0, "points": 3}})
    with pytest.raises(ConfigError, match="gain.points"):
        rn.config_from_dict({"gain": {"start": 0.1, "stop": 1.0, "points": 1}})
    lin = rn.config_from_dict(
        {"gain": {"start": 0.0, "stop": 0.2, "points": 3, "spacing": "linear"}}
    )
    assert lin.gains == (0.0, 0.1, 0.2)


def test_run_section_validation():
    with pytest.raises(ConfigError, match="trigger_beam"):
        rn.config_from_dict({"run": {"trigger_beam": "pump"}})
    with pytest.raises(ConfigError, match="unknown quantity"):
        rn.config_from_dict({"run": {"outputs": ["K_table", "spectra"]}})
    with pytest.raises(ConfigError, match="run.seed"):
        rn.config_from_dict({"run": {"seed": 1.5}})
    with pytest.raises(ConfigError, match="run.seed"):
        rn.config_from_dict({"run": {"seed": True}})


def test_k_table_validation():
    with pytest.raises(ConfigError, match=r"k_table.fwhms_nm\[0\]"):
        rn.config_from_dict({"k_table": {"fwhms_nm": [-1.0]}})
    with pytest.raises(ConfigError, match="k_table.kind"):
        rn.config_from_dict({"k_table": {"kind": "boxcar"}})


def test_bundled_configs_load():
    t1 = rn.bundled_config("table1")
    assert t1.k_table_fwhms_nm == (1.0, 2.5, 10.0, math.inf)
    assert t1.outputs == ("K_table",)
    f2 = rn.bundled_config("fig2")
    assert f2.filter_s.kind == "gaussian"
    assert f2.filter_s.fwhm_nm == 1.0
    assert f2.filter_i.kind == "none"
    assert "g12_vs_g11" in f2.outputs
    with pytest.raises(ConfigError):
        rn.bundled_config("table9")


# ----------------------------------------------------------- result table


def test_result_table_rejects_ragged_columns():
    with pytest.raises(ValueError, match="unequal"):
        rn.ResultTable(name="x", columns={"a": (1.0,), "b": (1.0, 2.0)}, metadata={})


def test_result_table_select():
    t = rn.ResultTable(
        name="full",
        columns={"a": (1.0, 2.0), "b": (3.0, 4.0), "c": (5.0, 6.0)},
        metadata={"k": 1},
    )
    s = t.select("sub", ("a", "c"))
    assert list(s.columns) == ["a", "c"]
    assert s.metadata == t.metadata
    assert s.n_rows == 2


# ----------------------------------------------------------------- tables


def test_k_table_structure_and_symmetry():
    cfg = tiny_config()
    table = rn.run_k_table(cfg, grid_points=128)
    assert list(table.columns) == ["filter_fwhm_nm", "K_s", "K_i"]
    assert table.n_rows == 4
    ks = dict(zip(table.columns["filter_fwhm_nm"], table.columns["K_s"]))
    ki = dict(zip(table.columns["filter_fwhm_nm"], table.columns["K_i"]))
    # unfiltered beams carry identical mode numbers
    assert ks[math.inf] == pytest.approx(ki[math.inf], rel=1e-6)
    # finite equal filters leave the idler with fewer modes on this source
    for f in (1.0, 2.5, 10.0):
        assert ki[f] < ks[f]
    assert table.metadata["engine_version"]
    assert table.metadata["grid_convergence"] in ("converged", "unconverged")
    assert table.metadata["config"]["source"]["grid_points"] == 96


def test_k_table_filter_model_sensitivity():
    # full resolution here: a 1 nm rectangle spans only ~4 bins of the
    # 512-point grid and vanishes entirely on coarser test grids
    gauss = rn.run_k_table(
        rn.config_from_dict({"k_table": {"fwhms_nm": [1.0], "kind": "gaussian"}}),
        grid_points=512,
    )
    rect = rn.run_k_table(
        rn.config_from_dict({"k_table": {"fwhms_nm": [1.0], "kind": "rectangular"}}),
        grid_points=512,
    )
    assert gauss.columns["K_s"][0] != pytest.approx(rect.columns["K_s"][0], rel=1e-3)


def test_g_sweep_columns_and_click_identity():
    cfg = tiny_config(gain={"values": [0.0, 0.05, 0.1]})
    table = rn.run_g_sweep(cfg, grid_points=96)
    assert table.n_rows == 3
    cols = table.columns
    # B = 0 row: means are zero, every normalized quantity is undefined
    assert cols["mean_ns"][0] == 0.0
    for name in ("g20", "g02", "g11", "g12", "g2_click", "nrf"):
        assert cols[name][0] is None
        assert cols[name][1] is not None
    # definitional identity of the click column for a signal trigger
    for k in (1, 2):
        assert cols["g2_click"][k] == cols["g12"][k] / cols["g11"][k] ** 2


def test_g_sweep_fit_matches_manual_least_squares():
    cfg = tiny_config(gain={"values": [0.02, 0.05, 0.08, 0.12]})
    table = rn.run_g_sweep(cfg, grid_points=96)
    x = np.array(table.columns["g11"], dtype=float)
    y = np.array(table.columns["g12"], dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    assert table.metadata["fit_slope"] == pytest.approx(float(slope), rel=1e-12)
    assert table.metadata["fit_intercept"] == pytest.approx(float(intercept), rel=1e-12)


def test_g_sweep_fit_none_when_underdetermined():
    cfg = tiny_config(gain={"values": [0.05]})
    table = rn.run_g_sweep(cfg, grid_points=96)
    assert table.metadata["fit_slope"] is None


def test_idler_trigger_uses_g21():
    cfg = tiny_config(
        gain={"values": [0.08]},
        run={"trigger_beam": "idler", "outputs": ["g2click_vs_g11"]},
    )
    table = rn.run_g_sweep(cfg, grid_points=96)
    # symmetric unfiltered source: g21 = g12, so only the code path differs
    assert table.columns["g2_click"][0] == pytest.approx(
        table.columns["g12"][0] / table.columns["g11"][0] ** 2, rel=1e-9
    )


def test_sweep_respects_thread_env(monkeypatch):
    cfg = tiny_config(gain={"values": [0.03, 0.06, 0.09]})
    serial = rn.run_g_sweep(cfg, grid_points=96)
    monkeypatch.setenv("TWINBEAM_THREADS", "3")
    threaded = rn.run_g_sweep(cfg, grid_points=96)
    assert serial.columns == threaded.columns


# --------------------------------------------------------------- emission


def test_csv_emission_shape_and_nulls(tmp_path):
    table = rn.ResultTable(
        name="t",
        columns={"a": (1.0, None), "b": (0.005, 2.5)},
        metadata={},
    )
    path = tmp_path / "t.csv"
    rn.emit(table, "csv", path)
    text = path.read_bytes().decode()
    assert text == "a,b\r\n1.0,0.005\r\n,2.5\r\n"


def test_csv_header_only_for_empty_table(tmp_path):
    table = rn.ResultTable(name="t", columns={"a": (), "b": ()}, metadata={})
    path = tmp_path / "t.csv"
    rn.emit(table, "csv", path)
    assert path.read_bytes() == b"a,b\r\n"


def test_json_emission_round_trips(tmp_path):
    table = rn.ResultTable(
        name="t",
        columns={"a": (1.0, None)},
        metadata={"grid_convergence": "converged"},
    )
    path = tmp_path / "t.json"
    rn.emit(table, "json", path)
    doc = json.loads(path.read_text())
    assert doc["columns"]["a"] == [1.0, None]
    assert doc["metadata"]["grid_convergence"] == "converged"


def test_emit_rejects_unknown_format(tmp_path):
    table = rn.ResultTable(name="t", columns={"a": ()}, metadata={})
    with pytest.raises(ValueError, match="format"):
        rn.emit(table, "xml", tmp_path / "t.xml")


def test_scenario_outputs_are_byte_deterministic(tmp_path):
    cfg = tiny_config(gain={"values": [0.0, 0.07]})
    paths1 = rn.run_scenario(cfg, tmp_path / "one", fmt="json", grid_points=96)
    paths2 = rn.run_scenario(cfg, tmp_path / "two", fmt="json", grid_points=96)
    assert [p.rsplit("/")[-1] for p in paths1] == [p.rsplit("/")[-1] for p in paths2]
    for p1, p2 in zip(paths1, paths2):
        assert open(p1, "rb").read() == open(p2, "rb").read()


# -------------------------------------------------------------------- CLI


def test_cli_run_writes_requested_files(tmp_path):
    config = tmp_path / "scenario.toml"
    config.write_text(
        "[source]\ngrid_points = 96\n"
        "[gain]\nvalues = [0.05]\n"
        "[run]\noutputs = [\"K_table\", \"nrf\"]\n"
    )
    out = tmp_path / "out"
    assert cli.main(["run", str(config), "--out", str(out)]) == 0
    assert (out / "K_table.csv").exists()
    assert (out / "nrf.csv").exists()


def test_cli_grid_override(tmp_path):
    config = tmp_path / "scenario.toml"
    config.write_text("[gain]\nvalues = [0.05]\n[run]\noutputs = [\"K_table\"]\n")
    out = tmp_path / "out"
    code = cli.main(
        ["run", str(config), "--out", str(out), "--format", "json", "--grid", "64"]
    )
    assert code == 0
    doc = json.loads((out / "K_table.json").read_text())
    assert doc["metadata"]["grid_points"] == 64


def test_cli_exit_codes(tmp_path):
    assert cli.main(["run", str(tmp_path / "missing.toml")]) == 1
    bad = tmp_path / "bad.toml"
    bad.write_text("mystery = 3\n")
    assert cli.main(["run", str(bad)]) == 1
    assert cli.main(["table1", "--grid", "1"]) == 1
    assert cli.main(["oracle-check", "--cases", "0"]) == 1


def test_cli_oracle_check_passes(capsys):
    assert cli.main(["oracle-check", "--cases", "3", "--seed", "7"]) == 0
    out = capsys.readouterr().out
    assert "3/3 cases within tolerance" in out


def test_cli_usage_error_exits_one():
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 1
