import json
import math
import os

import numpy as np
import pytest

from adacomp import __version__, experiments
from adacomp.cli import main
from adacomp.netmodel import ConfigurationError


def _write_config(tmp_path, name="cfg.json", **body):
    path = tmp_path / name
    path.write_text(json.dumps(body))
    return str(path)


def _tf_config(tmp_path, **extra):
    body = {
        "scenario": "time-fraction-sweep",
        "trials": 2000,
        "sweep": {"window_grid_ms": [20.0, 60.0, 100.0, 140.0]},
        "figures": False,
        **extra,
    }
    return _write_config(tmp_path, **body)


# ------------------------------------------------------------ config merging

def test_resolve_defaults():
    raw = experiments.resolve_config(None, "time-fraction-sweep", {})
    assert raw["output"] == "time-fraction-sweep.csv"
    assert raw["format"] == "csv"
    assert len(raw["sweep"]["window_grid_ms"]) == 150
    assert raw["seed"] == 20260815


def test_resolve_log_grid_shorthand():
    raw = experiments.resolve_config(None, "ccdf-vs-bounds", {})
    grid = raw["sweep"]["beta_grid"]
    assert len(grid) == 20
    assert math.isclose(grid[0], 0.01) and math.isclose(grid[-1], 10.0)
    assert all(b > a for a, b in zip(grid, grid[1:]))


def test_resolve_precedence(tmp_path):
    cfg = _write_config(tmp_path, scenario="custom", seed=7)
    raw = experiments.resolve_config(cfg, "time-fraction-sweep", {"seed": 9})
    assert raw["scenario"] == "time-fraction-sweep"   # flag beats file
    assert raw["seed"] == 9                            # override beats file


def test_resolve_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        experiments.resolve_config(None, None, {})
    with pytest.raises(ConfigurationError):
        experiments.resolve_config(None, "nope", {})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigurationError) as e:
        experiments.resolve_config(str(bad), None, {})
    assert "not valid JSON" in str(e.value)
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    with pytest.raises(ConfigurationError):
        experiments.resolve_config(str(arr), None, {})
    with pytest.raises(ConfigurationError):
        experiments.resolve_config(None, "custom", {"sweep": {"grid": "log:x:1:5"}})


def test_resolve_window_inf_string():
    raw = experiments.resolve_config(
        None, "custom", {"durations": {"window_ms": "inf"}}
    )
    assert math.isinf(raw["durations"]["window_ms"])


# ------------------------------------------------------------- validation

def _valid(scenario="time-fraction-sweep", **over):
    return experiments.resolve_config(None, scenario, over)


def test_validate_accepts_defaults():
    for name in experiments.SCENARIOS:
        diag = experiments.validate_config(_valid(name))
        assert diag.ok, (name, diag.errors)


def test_validate_zero_forcing():
    raw = _valid()
    raw["network"]["coord_set_size"] = 8
    diag = experiments.validate_config(raw)
    assert not diag.ok
    assert any("zero-forcing infeasible" in e for e in diag.errors)
    raw = _valid()
    raw["network"]["serving_tier"] = 2     # femto tier has 2 antennas
    raw["network"]["coord_set_size"] = 2
    diag = experiments.validate_config(raw)
    assert any("serving tier" in e for e in diag.errors)


def test_validate_field_paths():
    raw = _valid()
    raw["network"]["tiers"][1]["path_loss_exp"] = 2.0
    raw["durations"]["delay"] = {"kind": "gamma"}
    raw["trials"] = 0
    raw["seed"] = True
    raw["format"] = "yaml"
    diag = experiments.validate_config(raw)
    msgs = "\n".join(diag.errors)
    assert "network.tiers[1].path_loss_exp" in msgs
    assert "durations.delay.kind" in msgs
    assert "trials" in msgs
    assert "seed" in msgs
    assert "format" in msgs


def test_validate_grid_order():
    raw = _valid("ccdf-vs-bounds", sweep={"beta_grid": [1.0, 0.5]})
    diag = experiments.validate_config(raw)
    assert any("strictly ascending" in e for e in diag.errors)


def test_validate_bounds_prerequisites():
    raw = _valid("ccdf-vs-bounds")
    raw["network"]["serving_tier"] = None
    diag = experiments.validate_config(raw)
    assert any("pinned serving tier" in e for e in diag.errors)
    raw = _valid("custom", sweep={"axis": "beta", "grid": [0.1, 1.0]})
    diag = experiments.validate_config(raw)
    assert any("fixed membership" in e for e in diag.errors)


def test_validate_pole_warning():
    diag = experiments.validate_config(_valid("ccdf-vs-bounds"))
    assert diag.ok
    assert any("pole" in w for w in diag.warnings)


# ------------------------------------------------------------ CLI end to end

def test_cli_workers_byte_identity(tmp_path):
    cfg = _tf_config(tmp_path)
    out1 = tmp_path / "w1.csv"
    out4 = tmp_path / "w4.csv"
    assert main(["--config", cfg, "--output", str(out1), "--workers", "1"]) == 0
    assert main(["--config", cfg, "--output", str(out4), "--workers", "4"]) == 0
    assert out1.read_bytes() == out4.read_bytes()
    # and the whole run is reproducible byte for byte
    rerun = tmp_path / "w1b.csv"
    assert main(["--config", cfg, "--output", str(rerun), "--workers", "1"]) == 0
    assert out1.read_bytes() == rerun.read_bytes()
    m1 = json.loads((tmp_path / "w1.csv.manifest.json").read_text())
    mb = json.loads((tmp_path / "w1b.csv.manifest.json").read_text())
    # identical up to the output path the run was pointed at
    m1["config"].pop("output"), mb["config"].pop("output")
    assert m1 == mb


def test_cli_csv_schema(tmp_path, capsys):
    cfg = _tf_config(tmp_path)
    out = tmp_path / "tf.csv"
    assert main(["--config", cfg, "--output", str(out)]) == 0
    captured = capsys.readouterr()
    assert f"wrote {out}" in captured.out
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "sweep_value,metric,value,stderr,flags"
    body = [ln.split(",") for ln in lines[1:]]
    assert len(body) == 4 * 4
    metrics = {b[1] for b in body}
    assert metrics == {
        "cos_time_fraction", "cos_time_fraction_mc", "expected_delta",
        "window_objective",
    }
    for b in body:
        float(b[0]); float(b[2]); float(b[3])
    quad = {float(b[0]): float(b[2]) for b in body if b[1] == "cos_time_fraction"}
    assert abs(quad[60.0] - 0.0924579) < 5e-6   # elementary integral by hand


def test_cli_json_format(tmp_path):
    cfg = _tf_config(tmp_path)
    out = tmp_path / "tf.json"
    assert main(["--config", cfg, "--output", str(out), "--format", "json"]) == 0
    payload = json.loads(out.read_text())
    assert set(payload) == {"manifest", "rows"}
    assert len(payload["rows"]) == 16
    assert payload["manifest"]["version"] == f"adacomp-{__version__}"
    sidecar = json.loads((tmp_path / "tf.json.manifest.json").read_text())
    assert sidecar == payload["manifest"]
    assert sidecar["row_count"] == 16
    assert "timestamp" not in json.dumps(sidecar)


def test_cli_figure_toggle(tmp_path):
    cfg = _write_config(
        tmp_path,
        scenario="time-fraction-sweep",
        trials=500,
        sweep={"window_grid_ms": [30.0, 90.0]},
    )
    out = tmp_path / "fig.csv"
    assert main(["--config", cfg, "--output", str(out)]) == 0
    assert (tmp_path / "fig.png").exists()
    out2 = tmp_path / "nofig.csv"
    assert main(["--config", cfg, "--output", str(out2), "--no-figures"]) == 0
    assert not (tmp_path / "nofig.png").exists()


def test_cli_exit_codes(tmp_path):
    assert main([]) == 1                                   # no scenario anywhere
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert main(["--config", str(bad)]) == 1
    infeasible = _write_config(
        tmp_path, name="inf.json", scenario="time-fraction-sweep",
        network={"coord_set_size": 8},
    )
    assert main(["--config", infeasible]) == 1
    with pytest.raises(SystemExit) as e:
        main(["--scenario", "unknown-name"])
    assert e.value.code == 1
    cfg = _tf_config(tmp_path)
    missing_dir = os.path.join(str(tmp_path), "no-such-dir", "out.csv")
    assert main(["--config", cfg, "--output", missing_dir]) == 2


def test_cli_ccdf_scenario(tmp_path, capsys):
    cfg = _write_config(
        tmp_path,
        scenario="ccdf-vs-bounds",
        trials=400,
        sweep={"beta_grid": [0.05, 5.0]},
        figures=False,
    )
    out = tmp_path / "ccdf.csv"
    assert main(["--config", cfg, "--output", str(out)]) == 0
    err = capsys.readouterr().err
    assert "warning:" in err and "pole" in err
    lines = [ln.split(",") for ln in out.read_text().strip().splitlines()[1:]]
    assert len(lines) == 6
    by_metric = {}
    for sweep_value, metric, value, stderr, flags in lines:
        by_metric.setdefault(metric, []).append((float(sweep_value), value, flags))
    for _, value, flags in by_metric["ccdf_upper"]:
        assert flags == "gamma-pole" and value == "nan"
    for _, _, flags in by_metric["ccdf_lower"]:
        assert flags == "vacuous"                 # preset slope is ~367
    for _, value, _ in by_metric["ccdf_empirical"]:
        assert 0.0 <= float(value) <= 1.0


def test_custom_scenario_library_route(tmp_path):
    spec = experiments.load_spec(
        scenario="custom", trials=500,
        output=str(tmp_path / "custom.csv"), figures=False,
    )
    result = experiments.run(spec)
    assert len(result.rows) == 5 * 4
    assert result.figure_path is None
    assert os.path.exists(result.output_path)
    assert json.loads(open(result.manifest_path).read())["scenario"] == "custom"
    with pytest.raises(ConfigurationError):
        experiments.load_spec(scenario="custom", trials=0)
