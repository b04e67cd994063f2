"""Config validation, sweep CSV contract, preset grids, and CLI exit codes."""

import json

import pytest

from aoiq import cli, config, sweep
from aoiq.errors import ConfigError


def base_doc(**overrides):
    doc = {
        "sources": [{"rate": 1.0}],
        "adversary": {"rate": 1.0, "beta": 1.5},
        "service": {"kind": "exponential", "rate": 2.0},
        "sim": {"runs": 3, "deliveries_per_run": 500, "seed": 5},
    }
    doc.update(overrides)
    return doc


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestConfigValidation:
    def test_valid_document_resolves(self):
        cfg = config.resolve(base_doc())
        assert cfg.scenario.adversary_rate == 1.0
        assert cfg.scenario.beta == 1.5
        assert cfg.sim.runs == 3

    def test_defaults_applied(self):
        cfg = config.resolve(
            {
                "sources": [{"rate": 1.0}],
                "adversary": {"rate": 0.5, "beta": 1.5},
                "service": {"kind": "exponential", "rate": 2.0},
            }
        )
        assert cfg.sim.runs == 12
        assert cfg.sim.confidence == 0.95
        assert cfg.sim.warmup_fraction == 0.1
        assert cfg.scenario.lambda_max == 2.0
        assert cfg.scenario.beta_max == 2.0

    def test_unknown_key_rejected_with_path(self):
        doc = base_doc()
        doc["sim"]["horizon"] = 100
        with pytest.raises(ConfigError) as exc:
            config.resolve(doc)
        assert "sim" in str(exc.value)

    def test_bad_nested_value_names_path(self):
        doc = base_doc(sources=[{"rate": -1.0}])
        with pytest.raises(ConfigError) as exc:
            config.resolve(doc)
        assert "sources" in str(exc.value)

    def test_missing_required_section(self):
        doc = base_doc()
        del doc["service"]
        with pytest.raises(ConfigError):
            config.resolve(doc)

    def test_cap_violation_is_config_error(self):
        doc = base_doc(adversary={"rate": 3.0, "beta": 1.5})
        with pytest.raises(Exception):
            config.resolve(doc)

    def test_set_parameter_paths(self):
        doc = base_doc()
        out = config.set_parameter(doc, "sources.0.rate", 2.5)
        assert out["sources"][0]["rate"] == 2.5
        out = config.set_parameter(doc, "adversary.rate", 0.25)
        assert out["adversary"]["rate"] == 0.25
        assert doc["adversary"]["rate"] == 1.0  # original untouched


class TestCsvContract:
    def _rows(self):
        return [
            sweep.SweepRow(0.5, 1.25, 1.125, 1.0, 2.0, 1.1, 1.05, 1.15, 12, 42),
            sweep.SweepRow(1.0, None, 1.5, 1.2, 2.5, None, None, None, None, None),
        ]

    def test_round_trip(self, tmp_path):
        path = str(tmp_path / "rows.csv")
        rows = self._rows()
        sweep.emit_csv(rows, path)
        assert sweep.parse_csv(path) == rows

    def test_header_only_when_empty(self, tmp_path):
        path = str(tmp_path / "empty.csv")
        sweep.emit_csv([], path)
        assert (tmp_path / "empty.csv").read_text() == ",".join(sweep.CSV_COLUMNS) + "\n"

    def test_unwritable_path_names_file(self, tmp_path):
        with pytest.raises(Exception) as exc:
            sweep.emit_csv(self._rows(), str(tmp_path / "no" / "dir.csv"))
        assert "dir.csv" in str(exc.value)

    def test_point_seed_pure(self):
        assert sweep.point_seed(1, 0) == sweep.point_seed(1, 0)
        assert sweep.point_seed(1, 0) != sweep.point_seed(1, 1)
        assert sweep.point_seed(1, 0) != sweep.point_seed(2, 0)


class TestPresets:
    def test_grid_is_pure(self):
        assert sweep.PRESET_LAMBDA1_GRID == tuple(
            pytest.approx(0.2 * (i + 1)) for i in range(15)
        )
        assert sweep.FIG3_ATTACK_RATES == (0.0, 0.75, 1.5)
        assert sweep.FIG4_ATTACK_RATE == 1.0

    def test_fig3_writes_one_csv_per_attack_rate(self, tmp_path):
        out = str(tmp_path / "fig3.csv")
        paths = sweep.preset_fig3(
            "erlang", out, sim_overrides={"runs": 2, "deliveries_per_run": 50, "seed": 1}
        )
        assert len(paths) == 3
        for path in paths:
            rows = sweep.parse_csv(path)
            assert [r.sweep_value for r in rows] == list(sweep.PRESET_LAMBDA1_GRID)

    def test_fig4_n4_rows(self, tmp_path):
        out = str(tmp_path / "fig4.csv")
        paths = sweep.preset_fig4(
            "erlang", 4, out, sim_overrides={"runs": 2, "deliveries_per_run": 50, "seed": 1}
        )
        rows = sweep.parse_csv(paths[0])
        assert len(rows) == len(sweep.PRESET_LAMBDA1_GRID)
        for row in rows:
            assert row.lb is not None and row.ub is not None
            assert row.lb <= row.ub


class TestCli:
    def test_analytic_exit_ok(self, tmp_path, capsys):
        path = write_config(tmp_path, base_doc())
        assert cli.main(["analytic", "--config", path, "--mode", "both"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert "exact" in out and "paper" in out

    def test_cap_violation_exits_2(self, tmp_path, capsys):
        doc = base_doc(adversary={"rate": 3.0, "beta": 1.5})
        path = write_config(tmp_path, doc)
        assert cli.main(["analytic", "--config", path]) == 2
        assert "bounded-threat" in capsys.readouterr().err

    def test_schema_error_exits_2(self, tmp_path, capsys):
        doc = base_doc()
        doc["extra"] = 1
        path = write_config(tmp_path, doc)
        assert cli.main(["analytic", "--config", path]) == 2

    def test_simulate_embeds_provenance(self, tmp_path, capsys):
        path = write_config(tmp_path, base_doc())
        assert cli.main(["simulate", "--config", path]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["estimate"]["seed_ledger"]["base_seed"] == 5
        assert out["config"]["sim"]["runs"] == 3

    def test_bounds_reports_both_readings(self, tmp_path, capsys):
        path = write_config(tmp_path, base_doc())
        assert cli.main(["bounds", "--config", path]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["lower_baseline"] <= out["upper"] <= out["upper_at_caps"]

    def test_sweep_writes_csv_and_meta(self, tmp_path, capsys):
        doc = base_doc(sweep={"parameter": "sources.0.rate", "values": [0.5, 1.0]})
        cfg_path = write_config(tmp_path, doc)
        out = str(tmp_path / "sweep.csv")
        assert cli.main(["sweep", "--config", cfg_path, "--out", out]) == 0
        rows = sweep.parse_csv(out)
        assert [r.sweep_value for r in rows] == [0.5, 1.0]
        meta = json.loads((tmp_path / "sweep.csv.meta.json").read_text())
        assert "config" in meta

    def test_validate_report(self, tmp_path, capsys):
        doc = base_doc()
        doc["sim"] = {"runs": 6, "deliveries_per_run": 4000, "seed": 3}
        cfg_path = write_config(tmp_path, doc)
        out = str(tmp_path / "report.json")
        code = cli.main(["validate", "--config", cfg_path, "--out", out])
        report = json.loads((tmp_path / "report.json").read_text())
        assert "cycle_mgf_literal_at_zero" in report
        assert (code == 0) == report["ok"]
