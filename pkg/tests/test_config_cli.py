import json

import pytest
import yaml

from flightlab import __version__
from flightlab.cli import main
from flightlab.config import ConfigError, config_from_dict, load_config
from flightlab.report import ReportError, build_report, emit_report, read_ladder_csv, write_ladder_csv
from flightlab.rng import RNG_ALGORITHM
from flightlab.scenarios import SCENARIOS, Record, Table

SMALL_POWER = {"n": 200, "replicas": 300, "seed_batches": 2, "sampler_samples": 2000, "kernel_cells": 64,
               "normalization_n": 200}


def _write(tmp_path, data, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return str(path)


def _strip(report):
    return {k: v for k, v in report.items() if k not in ("timestamp",)}


# config validation --------------------------------------------------------------


def test_every_shipped_config_validates():
    from pathlib import Path

    configs = sorted(Path(__file__).resolve().parents[1].joinpath("configs").glob("*.yaml"))
    assert {load_config(p).scenario for p in configs} == set(SCENARIOS)


def test_defaults_are_merged_and_numbers_coerced():
    cfg = config_from_dict({"scenario": "theorem1-power", "seed": 3, "params": {"alpha": 2}})
    assert cfg.params["alpha"] == 2.0 and isinstance(cfg.params["alpha"], float)
    assert cfg.params["d"] == SCENARIOS["theorem1-power"].defaults["d"]


@pytest.mark.parametrize("raw,fragment", [
    ({"scenario": "theorem3"}, "unknown name"),
    ({"seed": 1}, "scenario: missing"),
    ({"scenario": "lemma6", "params": {"n_list": "many"}}, "expected a non-empty list"),
    ({"scenario": "lemma6", "params": {"replicas": 1.5}}, "expected integer"),
    ({"scenario": "lemma6", "params": {"bogus": 1}}, "unknown key"),
    ({"scenario": "lemma6", "seed": -1}, "seed"),
    ({"scenario": "lemma6", "extra": 1}, "unknown top-level key"),
    ([1, 2], "mapping"),
])
def test_schema_diagnostics(raw, fragment):
    with pytest.raises(ConfigError) as err:
        config_from_dict(raw)
    assert fragment in str(err.value)


def test_unreadable_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("scenario: [unclosed")
    with pytest.raises(ConfigError):
        load_config(bad)


# reports --------------------------------------------------------------------------


def test_empty_records_rejected(tmp_path):
    with pytest.raises(ReportError):
        emit_report([], tmp_path, scenario="x", config={}, seeds=[])


def test_single_record_report(tmp_path):
    rec = Record("c", True, 0.5, 1.0, "<", 7)
    report = emit_report([rec], tmp_path, scenario="lemma6", config={"a": 1}, seeds=[7])
    on_disk = json.loads((tmp_path / "report.json").read_text())
    assert on_disk == report
    assert report["schema_version"] == 1 and len(report["records"]) == 1
    assert report["library"]["version"] == __version__ and report["rng_algorithm"] == RNG_ALGORITHM


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(ReportError):
        emit_report([Record("c", True, 0.0, 1.0, "<", 1)], blocker / "sub", scenario="x", config={}, seeds=[])


def test_ladder_round_trip(tmp_path):
    pairs = [(64, 1e-5), (16, 2e-4), (32, 5e-5)]
    write_ladder_csv(tmp_path / "l.csv", pairs)
    assert (tmp_path / "l.csv").read_text().splitlines()[0] == "n,err"
    back = read_ladder_csv(tmp_path / "l.csv")
    assert [n for n, _ in back] == [16, 32, 64] and dict(back) == dict(pairs)
    with pytest.raises(ReportError):
        write_ladder_csv(tmp_path / "dup.csv", [(1, 0.1), (1, 0.2)])


def test_ladder_tables_are_plotted(tmp_path):
    t = Table("ladder", ["n", "err"], [[16, 1e-3], [32, 2.5e-4]])
    report = emit_report([Record("c", True, 0.0, 1.0, "<", 1)], tmp_path, scenario="x", config={}, seeds=[1], tables=[t])
    assert report["artifacts"] == ["ladder.csv", "ladder.svg"]
    no_plot = emit_report([Record("c", True, 0.0, 1.0, "<", 1)], tmp_path / "np", scenario="x", config={}, seeds=[1],
                          tables=[t], plots=False)
    assert no_plot["artifacts"] == ["ladder.csv"]


def test_non_finite_values_survive_json():
    r = build_report([Record("c", False, float("nan"), 1.0, "<", 1)], scenario="x", config={}, seeds=[1])
    assert r["records"][0]["statistic"] == "nan" and r["passed"] is False


# command line -----------------------------------------------------------------------


def test_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    assert set(line.split()[0] for line in capsys.readouterr().out.splitlines()) == set(SCENARIOS)


def test_unknown_scenario_exit_code(tmp_path, capsys):
    path = _write(tmp_path, {"scenario": "theorem9", "seed": 1})
    assert main(["validate", path]) == 2
    assert main(["run", path]) == 2
    assert "unknown name" in capsys.readouterr().err


def test_rejected_parameter_exit_code(tmp_path):
    path = _write(tmp_path, {"scenario": "theorem1-power", "seed": 1, "params": dict(SMALL_POWER, alpha=0.4)})
    assert main(["run", path, "--out", str(tmp_path / "o")]) == 2


def test_power_report_targets_unit_variance(tmp_path, capsys):
    path = _write(tmp_path, {"scenario": "theorem1-power", "seed": 5, "params": SMALL_POWER})
    code = main(["run", path, "--out", str(tmp_path / "o"), "--no-plots"])
    assert code in (0, 1)
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    var = next(r for r in report["records"] if r["criterion"] == "variance")
    assert var["details"]["target"] == pytest.approx(1.0)
    assert report["config"]["params"]["n"] == 200 and report["seeds"]


def test_failing_criterion_exit_code(tmp_path, capsys):
    params = dict(SMALL_POWER, var_band=[2.0, 3.0])
    path = _write(tmp_path, {"scenario": "theorem1-power", "seed": 5, "params": params})
    assert main(["run", path, "--out", str(tmp_path / "o"), "--no-plots"]) == 1
    err = capsys.readouterr().err
    failed = [json.loads(line[len("failed: "):]) for line in err.splitlines() if line.startswith("failed: ")]
    assert any(r["criterion"] == "variance" for r in failed)


def test_reports_identical_across_runs_and_threads(tmp_path):
    path = _write(tmp_path, {"scenario": "theorem1-power", "seed": 11, "params": SMALL_POWER})
    main(["run", path, "--out", str(tmp_path / "a"), "--threads", "1", "--no-plots"])
    main(["run", path, "--out", str(tmp_path / "b"), "--threads", "3", "--no-plots"])
    a = json.loads((tmp_path / "a" / "report.json").read_text())
    b = json.loads((tmp_path / "b" / "report.json").read_text())
    assert json.dumps(_strip(a), sort_keys=True) == json.dumps(_strip(b), sort_keys=True)
    for name in a["artifacts"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_output_dir_from_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    path = _write(tmp_path, {"scenario": "theorem1-exp", "seed": 2, "output_dir": "out-exp", "params": {"pairs": 50}})
    assert main(["run", path, "--no-plots"]) == 0
    assert (tmp_path / "out-exp" / "report.json").exists()
