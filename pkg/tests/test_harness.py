import dataclasses
import io
import json
import math

import numpy as np
import pytest

from ris_linksim.beamforming import OptimizerConfig
from ris_linksim.cli import main, parse_sweep
from ris_linksim.harness import (
    COLUMNS,
    ConfigError,
    ScenarioConfig,
    config_from_mapping,
    emit_results,
    format_results,
    parse_config,
    run_scenario,
    run_trial,
)
from ris_linksim.harness.runner import budgets, trial_channels

SMALL = {"ris_elements": 16, "trials": 3, "L_values": [300]}


@pytest.fixture(autouse=True)
def _no_worker_env(monkeypatch):
    monkeypatch.delenv("RIS_LINKSIM_WORKERS", raising=False)


class TestConfig:
    def test_empty_document_gives_defaults(self):
        cfg = parse_config("")
        assert cfg == parse_config("{}") == ScenarioConfig()
        assert cfg.bs_position == (0.0, -60.0) and cfg.ris_position == (300.0, 10.0)
        assert (cfg.bs_antennas, cfg.ris_elements, cfg.users) == (4, 512, 4)
        assert cfg.kappa == 1.0 and cfg.trials == 1000
        assert cfg.receiver_noise_power == pytest.approx(1e-13)
        assert cfg.total_power == pytest.approx(1e-2)
        assert set(cfg.schemes) == {"without_ris", "random_phase", "passive", "active"}

    def test_active_split(self):
        full, split = budgets(parse_config('{"power_split": 0.5, "schemes": ["active"]}'))
        assert split.bs_power == pytest.approx(5e-3) and split.ris_power == pytest.approx(5e-3)
        assert full.bs_power == pytest.approx(1e-2) and full.ris_power == 0

    @pytest.mark.parametrize("doc, key", [
        ('{"trials": 0}', "trials"),
        ('{"schemes": []}', "schemes"),
        ('{"schemes": ["magic"]}', "schemes"),
        ('{"L_values": []}', "L_values"),
        ('{"power_split": 0}', "power_split"),
        ('{"power_split": 1.5}', "power_split"),
        ('{"power_split": 1.0}', "power_split"),
        ('{"colour": 3}', "colour"),
        ('{"optimizer": {"speed": 1}}', "optimizer.speed"),
        ('{"optimizer": {"convergence_tol": 0}}', "optimizer"),
        ('{"trials": "many"}', "trials"),
        ('{"kappa": -1}', "kappa"),
        ('[1, 2]', "<root>"),
        ('{oops', "<document>"),
    ])
    def test_errors_name_the_key(self, doc, key):
        with pytest.raises(ConfigError, match=f"^{key}"):
            parse_config(doc)

    def test_power_split_one_without_active(self):
        assert parse_config('{"power_split": 1.0, "schemes": ["passive"]}').power_split == 1.0

    def test_dbm_keys(self):
        cfg = parse_config('{"total_power_dbm": 20, "receiver_noise_dbm": -90, "ris_noise_dbm": -80}')
        assert cfg.total_power == pytest.approx(0.1)
        assert cfg.receiver_noise_power == pytest.approx(1e-12)
        assert cfg.ris_noise_power == pytest.approx(1e-11)

    def test_optimizer_section(self):
        cfg = parse_config('{"optimizer": {"max_outer_iters": 7}}')
        assert cfg.optimizer == OptimizerConfig(max_outer_iters=7)

    def test_worker_env(self, monkeypatch):
        monkeypatch.setenv("RIS_LINKSIM_WORKERS", "3")
        assert parse_config("{}").workers == 3

    def test_digest_ignores_workers(self):
        a = config_from_mapping({"workers": 1})
        b = config_from_mapping({"workers": 4})
        assert a.digest() == b.digest() != config_from_mapping({"trials": 5}).digest()


class TestRunner:
    def test_single_trial_deterministic(self):
        cfg = config_from_mapping(SMALL | {"trials": 1, "schemes": ["without_ris"]})
        a, b = run_scenario(cfg), run_scenario(cfg)
        assert a.cells[0].mean_sum_rate_bpshz == b.cells[0].mean_sum_rate_bpshz
        assert math.isfinite(a.cells[0].mean_sum_rate_bpshz)

    def test_paired_channels(self, caplog):
        cfg = config_from_mapping(SMALL | {"trials": 2})
        caplog.set_level("DEBUG", logger="ris_linksim")
        res = run_scenario(cfg)
        for (li, t), digest in res.channel_digests.items():
            assert digest == trial_channels(cfg, li, t).digest()
            assert any(digest in r.getMessage() for r in caplog.records)
        assert len(set(res.channel_digests.values())) == 2

    def test_means_are_exact_means(self):
        cfg = config_from_mapping(SMALL | {"trials": 4, "L_values": [250, 300]})
        res = run_scenario(cfg)
        assert len(res.cells) == 8
        for c in res.cells:
            samples = res.samples[(c.L_m, c.scheme)]
            assert c.trials == samples.size == 4
            assert c.mean_sum_rate_bpshz == math.fsum(samples) / 4
            assert c.std_err == pytest.approx(np.std(samples, ddof=1) / 2)
        # recompute one cell from independent single-trial runs
        rerun = [run_trial(cfg, 1, t).rates["without_ris"] for t in range(4)]
        assert res.cell(300.0, "without_ris").mean_sum_rate_bpshz == math.fsum(rerun) / 4

    def test_trial_keys_do_not_depend_on_trial_count(self):
        short = run_scenario(config_from_mapping(SMALL | {"trials": 2, "schemes": ["without_ris"]}))
        long = run_scenario(config_from_mapping(SMALL | {"trials": 5, "schemes": ["without_ris"]}))
        np.testing.assert_array_equal(short.samples[(300.0, "without_ris")],
                                      long.samples[(300.0, "without_ris")][:2])

    def test_workers_do_not_change_output(self):
        cfg = config_from_mapping(SMALL | {"trials": 4, "schemes": ["without_ris", "random_phase"]})
        serial = format_results(run_scenario(cfg))
        parallel = format_results(run_scenario(dataclasses.replace(cfg, workers=2)))
        assert serial == parallel

    def test_rerun_byte_identical(self):
        cfg = config_from_mapping(SMALL | {"trials": 2})
        assert format_results(run_scenario(cfg)) == format_results(run_scenario(cfg))

    def test_std_err_scales_with_sqrt_trials(self):
        base = {"trials": 100, "schemes": ["without_ris"], "L_values": [300], "ris_elements": 1}
        se1 = run_scenario(config_from_mapping(base)).cells[0].std_err
        se4 = run_scenario(config_from_mapping(base | {"trials": 400})).cells[0].std_err
        assert se1 / se4 == pytest.approx(2.0, rel=0.2)


@pytest.fixture(scope="module")
def result():
    cfg = config_from_mapping({"ris_elements": 8, "trials": 2, "L_values": [150, 200, 250, 300, 350]})
    return run_scenario(cfg)


class TestOutput:
    def test_csv_contract(self, result):
        lines = format_results(result, "csv").splitlines()
        assert lines[0] == ",".join(COLUMNS)
        assert len(lines) == 1 + 5 * 4

    def test_one_cell(self):
        res = run_scenario(config_from_mapping(SMALL | {"trials": 1, "schemes": ["without_ris"]}))
        lines = format_results(res).splitlines()
        assert len(lines) == 2
        L, scheme, mean, se, trials, seed = lines[1].split(",")
        assert (L, scheme, trials, seed) == ("300", "without_ris", "1", "1")
        assert len(mean.replace(".", "").lstrip("0")) >= 6

    def test_json_round_trip(self, result):
        doc = json.loads(format_results(result, "json"))
        assert doc["seed"] == result.master_seed and doc["config_hash"] == result.config_hash
        assert len(doc["results"]) == len(result.cells)
        for row, cell in zip(doc["results"], result.cells):
            assert set(row) == set(COLUMNS)
            assert row["mean_sum_rate_bpshz"] == cell.mean_sum_rate_bpshz
            assert row["std_err"] == cell.std_err

    def test_csv_round_trip_precision(self, result):
        rows = format_results(result).splitlines()[1:]
        for row, cell in zip(rows, result.cells):
            assert float(row.split(",")[2]) == pytest.approx(cell.mean_sum_rate_bpshz, rel=1e-11)

    def test_destinations(self, result, tmp_path, capsys):
        path = tmp_path / "out.csv"
        emit_results(result, "csv", path)
        buf = io.StringIO()
        emit_results(result, "csv", buf)
        emit_results(result, "csv")
        assert path.read_text() == buf.getvalue() == capsys.readouterr().out

    def test_unwritable(self, result, tmp_path):
        with pytest.raises(OSError):
            emit_results(result, "csv", tmp_path / "missing" / "out.csv")

    def test_bad_format(self, result):
        with pytest.raises(ValueError):
            format_results(result, "xml")


class TestCli:
    def test_required_elements(self, capsys):
        assert main(["calc", "required-elements", "--d", "200", "--dt", "150", "--dr", "200",
                     "--freq-ghz", "5", "--nominal-wavelength"]) == 0
        assert capsys.readouterr().out.strip() == "10000"

    def test_noise_floor(self, capsys):
        assert main(["calc", "noise-floor", "--bandwidth-mhz", "100", "--elements", "10000"]) == 0
        assert capsys.readouterr().out.strip() == "-53.98 dBm"

    def test_path_gain(self, capsys):
        assert main(["calc", "path-gain", "--dt", "2", "--dr", "2"]) == 0
        assert "ratio 1" in capsys.readouterr().out

    def test_array_gain(self, capsys):
        assert main(["calc", "array-gain-scaling", "--per-element-noise", "0", "--receiver-noise", "1"]) == 0
        assert "slope 2.0000" in capsys.readouterr().out

    def test_simulate_to_file(self, tmp_path):
        out = tmp_path / "r.json"
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"ris_elements": 8}))
        argv = ["simulate", "--config", str(cfg), "--seed", "5", "--trials", "2", "--sweep", "280:300:20",
                "--schemes", "without_ris,passive", "--out", str(out), "--format", "json"]
        assert main(argv) == 0
        doc = json.loads(out.read_text())
        assert [(r["L_m"], r["scheme"]) for r in doc["results"]] == [
            (280.0, "without_ris"), (280.0, "passive"), (300.0, "without_ris"), (300.0, "passive")]
        assert all(r["seed"] == 5 and r["trials"] == 2 for r in doc["results"])

    def test_sweep_parsing(self):
        assert parse_sweep("150:300:50") == (150.0, 200.0, 250.0, 300.0)
        assert parse_sweep("100:100:1") == (100.0,)

    @pytest.mark.parametrize("argv", [
        ["simulate", "--trials", "0"],
        ["simulate", "--sweep", "3:1:1"],
        ["simulate", "--schemes", "bogus"],
        ["simulate", "--format", "xml"],
        ["calc", "noise-floor"],
        ["frobnicate"],
    ])
    def test_invalid_flags(self, argv, capsys):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code != 0
        assert "usage" in capsys.readouterr().err

    def test_runtime_error_message(self, tmp_path, capsys):
        assert main(["simulate", "--config", str(tmp_path / "none.json")]) != 0
        assert "error" in capsys.readouterr().err
        bad = tmp_path / "bad.json"
        bad.write_text('{"trials": -3}')
        assert main(["simulate", "--config", str(bad)]) != 0
        assert "trials" in capsys.readouterr().err

    def test_selftest(self, capsys):
        assert main(["selftest"]) == 0
        assert "FAIL" not in capsys.readouterr().out
