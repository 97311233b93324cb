import json
import os

import pytest

from ctap_sim.cli import main
from ctap_sim.errors import ConfigError
from ctap_sim.experiments import (
    ResultTable,
    apply_override,
    config_hash,
    geometry_from_dict,
    load_config,
    run_experiment,
    write_csv,
)


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_load_config_merges_defaults(tmp_path):
    path = write_config(tmp_path, {"experiment": "figure3", "grid_points": 51})
    config = load_config(path)
    assert config["grid_points"] == 51
    assert config["schedule"]["T"] == 150.0


def test_load_config_rejects_bad_input(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("not json")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, {"experiment": "figure99"}))


def test_apply_override_paths():
    config = {"sweep": {"points": 25}}
    apply_override(config, "sweep.points=7")
    assert config["sweep"]["points"] == 7
    apply_override(config, "bath.chis=[0.1,0.2]")
    assert config["bath"]["chis"] == [0.1, 0.2]
    apply_override(config, "label=plain-string")
    assert config["label"] == "plain-string"
    with pytest.raises(ConfigError):
        apply_override(config, "no-equals-sign")


def test_csv_has_hash_and_is_deterministic(tmp_path):
    table = ResultTable(
        "demo", ["x", "y"], [[1.0, 2.0], [3.0, 0.1]], {"config_hash": config_hash({"a": 1})}
    )
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(table, str(p1))
    write_csv(table, str(p2))
    text = p1.read_text()
    assert text.startswith("# config_hash = ")
    assert "x,y" in text
    assert p1.read_bytes() == p2.read_bytes()


def test_run_figure3_small(tmp_path):
    path = write_config(
        tmp_path, {"experiment": "figure3", "grid_points": 41, "bath": {"chis": [0.0]}}
    )
    out = tmp_path / "out"
    assert main(["run", path, "--jobs", "1", "--out", str(out)]) == 0
    spec = out / "figure3_spectrum.csv"
    pops = out / "figure3_populations.csv"
    assert spec.exists() and pops.exists()
    header = pops.read_text().splitlines()
    assert header[0].startswith("#")
    assert header[1] == "chi,time,site_1,site_2,site_3,site_4,site_5"


def test_run_reruns_byte_identical(tmp_path):
    path = write_config(
        tmp_path, {"experiment": "figure3", "grid_points": 31, "bath": {"chis": [0.15]}}
    )
    outs = []
    for name in ("o1", "o2"):
        out = tmp_path / name
        assert main(["run", path, "--jobs", "1", "--out", str(out)]) == 0
        outs.append((out / "figure3_spectrum.csv").read_bytes())
    assert outs[0] == outs[1]


def test_run_figure4_tiny_with_svg(tmp_path):
    path = write_config(
        tmp_path,
        {
            "experiment": "figure4",
            "curves": [[3, 150.0]],
            "sweep": {"start": 0.5, "stop": 2.0, "points": 3},
            "grid_points": 120,
        },
    )
    out = tmp_path / "out"
    assert main(["run", path, "--jobs", "2", "--out", str(out)]) == 0
    csv_path = out / "figure4_transfer_loss.csv"
    assert csv_path.exists()
    assert (out / "figure4_transfer_loss.svg").exists()
    lines = [l for l in csv_path.read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "a_over_d,loss_3dots"
    assert len(lines) == 4


def test_rates_command(tmp_path, capsys):
    geo = write_config(
        tmp_path, {"n_sites": 41, "offset": 1.0, "sensitivity": 0.04, "section": [10, 30]}, "geo.json"
    )
    out_csv = tmp_path / "rates.csv"
    assert main(["rates", "--geometry", geo, "--max-separation", "4", "--out", str(out_csv)]) == 0
    captured = capsys.readouterr().out.splitlines()
    assert captured[0] == "separation,exact,weak,saturation,local_limit"
    assert len(captured) == 6
    assert out_csv.exists()


def test_validate_only_group(capsys):
    code = main(["validate", "--only", "rates"])
    out = capsys.readouterr().out
    assert code == 0
    assert "local_limit_closed_form" in out
    assert "five_site_clean_fidelity" not in out


def test_run_error_reporting(tmp_path, capsys):
    missing = str(tmp_path / "none.json")
    assert main(["run", missing]) == 2
    assert "error (run)" in capsys.readouterr().err


def test_geometry_from_dict_defaults():
    g = geometry_from_dict({"n_sites": 41, "section": [10, 30]})
    assert g.total_rate == 41.0
    assert g.spacing == 1.0
    with pytest.raises(ConfigError):
        geometry_from_dict({"section": [0, 2]})


def test_jobs_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("CTAP_SIM_JOBS", "1")
    from ctap_sim.experiments import default_jobs

    assert default_jobs() == 1
