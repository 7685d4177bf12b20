from __future__ import annotations

import json

import numpy as np
import pytest

from modindep import cli, scenarios
from modindep.config import RunConfig, load_default_config
from modindep.errors import ParseError, UnknownScenario, ValidationError
from modindep.scenarios import Check, Expectation, Scenario


def small_scenario(expect="ModuleIndependent") -> Scenario:
    p1, p2 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    s = Scenario("small", 2, "two corners", config={"seed": 7})
    s.algebras = {"A1": {"generators": [p1]}, "A2": {"generators": [p2]}}
    s.modules = {"E1": {"self": "A1"}, "E2": {"self": "A2"}}
    s.checks = [Check("module_independence", {"e1": "E1", "e2": "E2"}, {"m": 0.5})]
    s.expectations = [Expectation(0, "kind", equals=expect)]
    return s


def write(tmp_path, s: Scenario, name="s.json"):
    path = tmp_path / name
    path.write_text(scenarios.serialize(s))
    return str(path)


def test_round_trip_is_bit_exact():
    for name in scenarios.BUILTINS:
        s = scenarios.builtin(name)
        text = scenarios.serialize(s)
        back = scenarios.parse(text)
        assert scenarios.serialize(back) == text
        for key, mat in s.elements.items():
            assert np.array_equal(back.elements[key], np.asarray(mat, dtype=complex))


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as info:
        scenarios.parse('{"name": "x",\n  "ambient_dim": }')
    assert info.value.line == 2 and info.value.column is not None


def test_validation_errors():
    s = small_scenario()
    s.checks[0].args["e2"] = "missing"
    with pytest.raises(ValidationError):
        scenarios.validate(s)
    s = small_scenario()
    s.algebras["A1"] = {"generators": [np.eye(3)]}
    with pytest.raises(ValidationError):
        scenarios.validate(s)
    data = json.loads(scenarios.serialize(small_scenario()))
    data["checks"][0]["op"] = "no_such_op"
    with pytest.raises(ValidationError):
        scenarios.scenario_from_json(data)


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["run", "--scenario", "ex-2.4-corners", "--quiet"]) == 0
    assert cli.main(["run", "--file", write(tmp_path, small_scenario("NotIndependent"))]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert cli.main(["run", "--file", str(bad)]) == 3
    assert "line 1" in capsys.readouterr().err
    assert cli.main(["run", "--scenario", "nope"]) == 3
    assert "ex-2.4-corners" in capsys.readouterr().err
    s = small_scenario()
    s.elements = {"z": np.diag([1.0, 0.0])}
    s.checks.append(Check("ffss", {"e1": "E1", "e2": "E2", "anchor": "z"}))
    assert cli.main(["run", "--file", write(tmp_path, s)]) == 4


def test_cli_json_out_and_show(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert cli.main(["run", "--scenario", "ex-2.15-qep", "--json-out", str(out), "--quiet"]) == 0
    report = json.loads(out.read_text())
    assert report["expectations_met"] and report["scenario"] == "ex-2.15-qep"
    capsys.readouterr()
    assert cli.main(["show", "ex-2.13-vector-module"]) == 0
    path = tmp_path / "vm.json"
    path.write_text(capsys.readouterr().out)
    assert cli.main(["run", "--file", str(path), "--quiet"]) == 0


def test_list_of_builtins(capsys):
    names = [n for n, _ in scenarios.list_scenarios()]
    assert len(names) == 7
    summaries = dict(scenarios.list_scenarios())
    assert "16" in summaries["ex-2.10-weights"]
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    assert all(n in out for n in names)
    with pytest.raises(UnknownScenario):
        scenarios.run_scenario("not-a-scenario")


def test_every_builtin_meets_its_expectations():
    for name in scenarios.BUILTINS:
        if name == "ex-5.2-sweep":
            continue  # covered by the sweep tests and the acceptance suite
        report = scenarios.run_scenario(name)
        assert report.exit_code == 0, name


def test_t_sweep_changes_verdict_only_at_one():
    rows = scenarios.sweep("ex-5.2", scenarios.parse_grid("0:1:11"))
    verdicts = [r["verdict"] for r in rows]
    assert verdicts == ["NotIndependent"] * 10 + ["ModuleIndependent"]
    assert all(r["gap"] > 1e-3 for r in rows[:10])
    table = scenarios.format_table(rows)
    assert table.count("\n") == 13


def test_constant_family_rows_are_identical():
    rows = scenarios.sweep("constant", [0.0, 0.5, 1.0])
    strip = [{k: v for k, v in r.items() if k != "t"} for r in rows]
    assert strip[0] == strip[1] == strip[2]


def test_single_point_sweep_matches_direct_run():
    (row,) = scenarios.sweep("ex-5.2", scenarios.parse_grid("0.3:0.3:1"))
    direct = scenarios.sweep_row(0.3, scenarios.run_scenario(scenarios.t_family(0.3)))
    assert row == direct


def test_parse_grid_rejects_garbage():
    with pytest.raises(ValidationError):
        scenarios.parse_grid("0:1")
    with pytest.raises(ValidationError):
        scenarios.parse_grid("0:1:0")


def test_plot_written(tmp_path):
    rows = scenarios.sweep("ex-5.2", [0.2, 0.6, 1.0])
    path = tmp_path / "gaps.svg"
    scenarios.plot_gaps(rows, path)
    text = path.read_text()
    assert text.lstrip().startswith("<?xml") and "<svg" in text


def test_config_file_from_environment(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 9, "restarts": 4}))
    monkeypatch.setenv("MODINDEP_CONFIG", str(cfg))
    config = load_default_config()
    assert config.seed == 9 and config.restarts == 4 and config.tol == RunConfig().tol
    cfg.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ValueError):
        load_default_config()


def test_per_check_params_override_config():
    s = small_scenario()
    s.checks.append(Check("norm_multiplicativity", {"a1": "A1", "a2": "A2"}, {"restarts": 3}))
    report = scenarios.run(s)
    assert report.exit_code == 0
    assert report.config["seed"] == 7
