import json

import pytest

from adiab import cli
from adiab.runner import csv_header, emit_csv, run_scenario
from adiab.scenario import ScenarioError, Thresholds, load_scenario, parse_scenario
from adiab.tracking import DegeneracyError

MINIMAL = {
    "model": "schwinger",
    "omega0": 1,
    "omega": 0.1,
    "theta": 1.5707963,
    "t_end": 40,
    "steps": 40000,
    "n": 1,
}


def small_doc(**overrides):
    doc = dict(MINIMAL, t_end=2.0, steps=50)
    doc.update(overrides)
    return doc


class TestParseScenario:
    def test_minimal_document(self):
        sc = parse_scenario(json.dumps(MINIMAL))
        assert sc.model_kind == "schwinger"
        assert sc.params.omega0 == 1.0
        assert sc.steps == 40000
        assert sc.level == 1
        assert sc.gauge == "auto"
        assert sc.outputs == ("csv", "report")
        assert sc.thresholds == Thresholds()

    @pytest.mark.parametrize(
        "overrides, key",
        [
            ({"steps": 5}, "steps"),
            ({"theta": 4.0}, "theta"),
            ({"omega0": 0}, "omega0"),
            ({"omega": -1}, "omega"),
            ({"n": 3}, "n"),
            ({"n": 0}, "n"),
            ({"t_end": -1.0}, "t_end"),
            ({"gauge": "fancy"}, "gauge"),
            ({"steps": 10.5}, "steps"),
            ({"schema_version": 2}, "schema_version"),
            ({"outputs": ["png"]}, "outputs"),
            ({"thresholds": {"margin": -1}}, "thresholds.margin"),
            ({"thresholds": {"weird": 1}}, "thresholds.weird"),
            ({"surprise": 1}, "surprise"),
        ],
    )
    def test_rejections_name_the_key(self, overrides, key):
        doc = dict(MINIMAL)
        doc.update(overrides)
        with pytest.raises(ScenarioError, match=key.replace(".", r"\.")):
            parse_scenario(json.dumps(doc))

    @pytest.mark.parametrize("missing", ["model", "omega0", "omega", "theta", "t_end", "steps", "n"])
    def test_missing_required_key(self, missing):
        doc = dict(MINIMAL)
        del doc[missing]
        with pytest.raises(ScenarioError, match=missing):
            parse_scenario(json.dumps(doc))

    def test_malformed_json(self):
        with pytest.raises(ScenarioError, match="malformed"):
            parse_scenario("{not json")

    def test_load_uses_file_stem_as_default_name(self, tmp_path):
        path = tmp_path / "my_panel.json"
        path.write_text(json.dumps(small_doc()))
        assert load_scenario(path).name == "my_panel"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError, match="cannot read"):
            load_scenario(tmp_path / "absent.json")


class TestCsvSchema:
    def test_header_matches_documented_layout(self):
        assert csv_header(2, 1) == (
            "t,re_c_1,im_c_1,abs_c_1,re_c_2,im_c_2,abs_c_2,"
            "abs_Q_2,abs_R_2,qac_2,residual_2,beta_1,D_norm,Ddot_norm,lambda_residual,norm_error"
        )

    def test_header_for_other_tracked_level(self):
        assert csv_header(2, 2).startswith("t,re_c_1")
        assert "abs_Q_1" in csv_header(2, 2)
        assert "beta_2" in csv_header(2, 2)

    def test_row_count_and_width(self, tmp_path):
        sc = parse_scenario(json.dumps(small_doc(name="tiny")))
        result = run_scenario(sc)
        out = emit_csv(result, tmp_path / "tiny.csv")
        lines = out.read_text().splitlines()
        assert len(lines) == sc.steps + 2  # header plus endpoints-inclusive samples
        width = len(lines[0].split(","))
        assert width == 1 + 3 * 2 + 4 * 1 + 5
        assert all(len(line.split(",")) == width for line in lines[1:])
        assert "nan" not in out.read_text()

    def test_rerun_is_byte_identical(self, tmp_path):
        sc = parse_scenario(json.dumps(small_doc(name="det")))
        first = emit_csv(run_scenario(sc), tmp_path / "a.csv").read_bytes()
        second = emit_csv(run_scenario(sc), tmp_path / "b.csv").read_bytes()
        assert first == second


class TestCliCommands:
    def _write(self, tmp_path, name="sample", **overrides):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(small_doc(name=name, **overrides)))
        return path

    def test_run_writes_outputs_and_exits_zero(self, tmp_path, capsys):
        scenario_path = self._write(tmp_path)
        out_dir = tmp_path / "out"
        code = cli.main(["run", str(scenario_path), "--out", str(out_dir)])
        assert code == 0
        assert (out_dir / "sample.csv").exists()
        report = json.loads((out_dir / "sample.report.json").read_text())
        assert report["pass"] is True
        assert report["scenario"]["n"] == 1
        captured = capsys.readouterr().out
        assert "check decomposition" in captured
        assert "PASS" in captured

    def test_outputs_key_limits_files(self, tmp_path):
        scenario_path = self._write(tmp_path, name="only_report", outputs=["report"])
        out_dir = tmp_path / "out"
        assert cli.main(["run", str(scenario_path), "--out", str(out_dir)]) == 0
        assert not (out_dir / "only_report.csv").exists()
        assert (out_dir / "only_report.report.json").exists()

    def test_verify_writes_nothing(self, tmp_path, capsys, monkeypatch):
        scenario_path = self._write(tmp_path, name="v")
        monkeypatch.chdir(tmp_path)
        code = cli.main(["verify", str(scenario_path)])
        assert code == 0
        assert not list(tmp_path.glob("*.csv"))
        assert "check lambda" in capsys.readouterr().out

    def test_batch_runs_all(self, tmp_path):
        batch_dir = tmp_path / "batch"
        batch_dir.mkdir()
        self._write(batch_dir, name="one")
        self._write(batch_dir, name="two", theta=0.3)
        out_dir = tmp_path / "out"
        assert cli.main(["batch", str(batch_dir), "--out", str(out_dir)]) == 0
        assert (out_dir / "one.csv").exists()
        assert (out_dir / "two.csv").exists()

    def test_configuration_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(small_doc(steps=5)))
        assert cli.main(["run", str(bad), "--out", str(tmp_path)]) == cli.EXIT_CONFIG
        assert "steps" in capsys.readouterr().err

    def test_empty_batch_directory_is_config_error(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert cli.main(["batch", str(empty)]) == cli.EXIT_CONFIG

    def test_numerical_failure_exit_code(self, tmp_path, capsys, monkeypatch):
        scenario_path = self._write(tmp_path)

        def boom(scenario):
            raise DegeneracyError("near-degenerate spectrum at sample 3 (t=0.12)")

        monkeypatch.setattr(cli, "run_scenario", boom)
        assert cli.main(["verify", str(scenario_path)]) == cli.EXIT_NUMERICAL
        assert "sample 3" in capsys.readouterr().err

    def test_identity_failure_exit_code_names_check(self, tmp_path, capsys, monkeypatch):
        scenario_path = self._write(tmp_path)
        real = run_scenario(load_scenario(scenario_path))
        real.report.checks["decomposition"] = {"value": 1.0, "tolerance": 1e-7, "pass": False}
        real.report.passed = False
        monkeypatch.setattr(cli, "run_scenario", lambda scenario: real)
        assert cli.main(["verify", str(scenario_path)]) == cli.EXIT_IDENTITY
        assert "decomposition" in capsys.readouterr().err


class TestShippedScenarios:
    def test_session_runs_pass_their_own_gate(self, panel_runs, static_run, ms_run):
        for run in (*panel_runs.values(), static_run, ms_run):
            failing = run.report.first_failure()
            assert run.report.passed, f"{run.scenario.name}: {failing} check failed"

    def test_all_shipped_documents_parse(self):
        from pathlib import Path

        shipped = sorted((Path(__file__).parent.parent / "scenarios").glob("*.json"))
        assert len(shipped) == 8
        for path in shipped:
            sc = load_scenario(path)
            assert sc.steps >= 10

    def test_report_serialization_round_trip(self, tmp_path):
        sc = parse_scenario(json.dumps(small_doc(name="round")))
        result = run_scenario(sc)
        from adiab.runner import emit_report

        out = emit_report(result, tmp_path / "round.report.json")
        doc = json.loads(out.read_text())
        assert doc["schema_version"] == 1
        assert set(doc["checks"]) >= {"decomposition", "lambda", "unitarity", "norm"}
        assert doc["regime"]["description"]
