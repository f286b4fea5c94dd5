import json
import math

import numpy as np
import pytest

from polyrabi.cascade import ModeConfig
from polyrabi.cli import (
    ConfigError,
    Experiment,
    experiment_to_dict,
    load_experiment,
    main,
    preset_experiments,
    read_series_csv,
    report,
    run,
)


def small_fig1(tmp_path, **overrides):
    kw = dict(
        name="t",
        config=ModeConfig(j=1, m=(0, 2), omega=(0.5, 0.5), delta0=1.0),
        engine="all",
        tau=(0.0, 4.0 * math.pi, 120),
        window=60,
        channels=(1, 3, -1),
    )
    kw.update(overrides)
    return Experiment(**kw)


class TestExperiment:
    def test_engine_resolution(self):
        exp = small_fig1(None)
        assert exp.engines() == ("cascade", "two_mode", "weak_field", "oracle")

    def test_two_mode_requires_two(self):
        with pytest.raises(ConfigError):
            Experiment(
                name="x",
                config=ModeConfig(j=1, m=(0,), omega=(0.5,), delta0=1.0),
                engine="two_mode",
            )

    def test_weak_field_requires_uniform(self):
        with pytest.raises(ConfigError):
            Experiment(
                name="x",
                config=ModeConfig(j=1, m=(0, 1, 3), omega=(0.1,) * 3, delta0=3.0),
                engine="weak_field",
            )

    def test_grid_validation(self):
        with pytest.raises(ConfigError):
            small_fig1(None, tau=(0.0, 4.0, 1))
        with pytest.raises(ConfigError):
            small_fig1(None, tau=(2.0, 1.0, 10))

    def test_round_trip(self):
        exp = small_fig1(None, weights=(3.0 + 0.0j,), weight_window=40)
        doc = experiment_to_dict(exp)
        again = load_experiment(json.loads(json.dumps(doc)))
        assert again == exp


class TestPresets:
    def test_known_presets(self):
        assert len(preset_experiments("fig1")) == 1
        with pytest.warns(UserWarning):  # the 6/7 detuning is nearest a lower mode
            assert len(preset_experiments("fig3a")) == 3
        assert len(preset_experiments("fig3bcd")) == 3
        with pytest.raises(ConfigError):
            preset_experiments("nope")

    def test_fig1_preset_shape(self):
        (exp,) = preset_experiments("fig1")
        assert exp.config.m == (0, 2)
        assert exp.channels == (1, 3, -1)
        assert exp.tau[0] == 0.0
        assert exp.tau[1] == pytest.approx(4 * math.pi)

    def test_fig3bcd_covers_full_cycle(self):
        for exp, om in zip(preset_experiments("fig3bcd"), (1 / 7, 1 / 11, 1 / 15)):
            assert exp.tau[1] == pytest.approx(2 * math.pi / om)


class TestRun:
    def test_artifacts_and_gates(self, tmp_path):
        exp = small_fig1(tmp_path)
        result = run(exp, tmp_path)
        assert result.oracle_valid
        names = {p.name for p in result.files}
        assert names == {
            "t_config.json",
            "t_cascade.csv",
            "t_two_mode.csv",
            "t_weak_field.csv",
            "t_oracle.csv",
            "t_compare_cascade.json",
            "t_compare_two_mode.json",
            "t_compare_weak_field.json",
        }
        rep = json.loads((tmp_path / "t_compare_cascade.json").read_text())
        assert rep["max_abs"] < 2e-2
        assert set(rep["per_channel"]) == {"-1", "1", "3"}

    def test_deterministic_output(self, tmp_path):
        exp = small_fig1(tmp_path, engine="cascade")
        run(exp, tmp_path / "a")
        run(exp, tmp_path / "b")
        a = (tmp_path / "a" / "t_cascade.csv").read_bytes()
        b = (tmp_path / "b" / "t_cascade.csv").read_bytes()
        assert a == b

    def test_csv_round_trip(self, tmp_path):
        exp = small_fig1(tmp_path, engine="cascade")
        run(exp, tmp_path)
        series = read_series_csv(tmp_path / "t_cascade.csv")
        assert len(series.tau) == 120
        assert set(series.channels) == {1, 3, -1}
        assert series.values[0] == 0.0

    def test_config_echo_reloads_equal(self, tmp_path):
        exp = small_fig1(tmp_path)
        run(exp, tmp_path)
        doc = json.loads((tmp_path / "t_config.json").read_text())
        assert load_experiment(doc) == exp

    def test_gaussian_weights_pipeline(self, tmp_path):
        exp = small_fig1(
            tmp_path, engine="cascade", weights=(12.0 + 0.0j,), weight_window=80
        )
        run(exp, tmp_path)
        series = read_series_csv(tmp_path / "t_cascade.csv")
        assert np.all(series.values >= -1e-12)
        assert np.all(series.values <= 1.05)


class TestReport:
    def test_self_comparison_zero(self, tmp_path):
        exp = small_fig1(tmp_path, engine="cascade")
        run(exp, tmp_path)
        rep = report(
            tmp_path / "t_cascade.csv",
            tmp_path / "t_cascade.csv",
            tmp_path / "cmp.json",
        )
        assert rep["max_abs"] == 0.0
        assert rep["rms"] == 0.0
        assert json.loads((tmp_path / "cmp.json").read_text()) == rep

    def test_grid_mismatch_rejected(self, tmp_path):
        a = small_fig1(tmp_path, engine="cascade")
        b = small_fig1(tmp_path, name="u", engine="cascade", tau=(0.0, 2.0, 50))
        run(a, tmp_path)
        run(b, tmp_path)
        with pytest.raises(Exception):
            report(tmp_path / "t_cascade.csv", tmp_path / "u_cascade.csv")


class TestMain:
    def test_preset_run(self, tmp_path):
        code = main(
            [
                "--preset",
                "fig1",
                "--out",
                str(tmp_path),
                "--tau",
                "0:3.0:50",
                "--window",
                "60",
            ]
        )
        assert code == 0
        assert (tmp_path / "fig1_oracle.csv").exists()

    def test_config_run(self, tmp_path):
        doc = {
            "name": "demo",
            "config": {
                "j": 1,
                "m": [0],
                "omega": [[0.5, 0.0]],
                "delta0": 0.0,
            },
            "engine": "cascade",
            "tau": {"start": 0.0, "stop": 2.0 * math.pi, "count": 30},
        }
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(json.dumps(doc))
        code = main(["--config", str(cfg_path), "--out", str(tmp_path)])
        assert code == 0
        series = read_series_csv(tmp_path / "demo_cascade.csv")
        assert series.values.max() == pytest.approx(1.0, abs=1e-6)

    def test_validation_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"config": {"j": 1, "m": [1], "omega": [[0.1, 0]], "delta0": 1.0}}))
        code = main(["--config", str(bad), "--out", str(tmp_path)])
        assert code == 2
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert err["kind"] == "validation"

    def test_both_modes_rejected(self, tmp_path):
        assert main(["--out", str(tmp_path)]) == 2

    def test_leakage_exit_code(self, tmp_path, capsys):
        # strong drive on a thin lattice trips the leakage gate
        doc = {
            "name": "leaky",
            "config": {
                "j": 2,
                "m": [0, 1],
                "omega": [[3.0, 0.0], [3.0, 0.0]],
                "delta0": 1.0,
            },
            "engine": "oracle",
            "tau": {"start": 0.0, "stop": 100.0, "count": 40},
            "window": 13,
        }
        cfg_path = tmp_path / "leaky.json"
        cfg_path.write_text(json.dumps(doc))
        code = main(["--config", str(cfg_path), "--out", str(tmp_path)])
        assert code == 3
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert err["kind"] == "oracle-validity"
        # partial outputs are retained
        assert (tmp_path / "leaky_oracle.csv").exists()
