import json
import math

import numpy as np
import pytest

from cpdftsim.cli import main as cli_main
from cpdftsim.config import (
    ConfigError,
    SweepSpec,
    SystemConfig,
    apply_sweep_value,
    dbm_to_watt,
    load_config,
    smoke_preset,
)
from cpdftsim.experiment import (
    METHODS,
    Workspace,
    complexity_count,
    render_csv,
    run_point,
    run_sweep,
    run_trial,
    write_report,
)
from cpdftsim.channel import UserGeometry
from cpdftsim.signal_core import codebook_angles


def tiny_config(**overrides):
    defaults = dict(
        antennas=6, users=3, subcarriers=8, codebook_size=16, trials=2, seed=7
    )
    defaults.update(overrides)
    return SystemConfig(**defaults)


def method_state(res):
    return (
        res.sum_se,
        tuple(res.per_user_se),
        res.sum_se_estimated,
        res.symbol_errors,
    )


class TestConfigLoading:
    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text("")
        cfg, spec = load_config(str(path))
        ref = SystemConfig()
        assert cfg.echo() == ref.echo()
        assert cfg.carrier_hz == 28e9
        assert cfg.bandwidth_hz == 6.25e6
        assert cfg.subcarriers == 64
        assert cfg.cyclic_prefix == 16
        assert cfg.antennas == 10 and cfg.users == 8
        assert cfg.speed_mps == 39.0
        assert cfg.noise_power_w == pytest.approx(1e-6, rel=1e-12)
        assert np.allclose(cfg.slot_power_w, dbm_to_watt(25.0), rtol=1e-12)
        assert cfg.codebook_size == 256
        assert cfg.cell_range_m == (100.0, 200.0)
        assert cfg.trials == 1000
        assert spec.variable == "kappa"
        assert spec.values == (-10.0, 0.0, 10.0, 20.0, 30.0, 40.0)

    def test_too_many_users(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"users": 9, "antennas": 10}))
        with pytest.raises(ConfigError, match="users"):
            load_config(str(path))

    def test_dbm_string_noise(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"noise_power_w": "-30 dBm"}))
        cfg, _ = load_config(str(path))
        assert cfg.noise_power_w == pytest.approx(1e-6, rel=1e-12)

    def test_keyvalue_format(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text(
            "antennas = 6\nusers = 3\nsubcarriers = 8\ncodebook_size = 16\n"
            'noise_power_w = "-30 dBm"\nsweep_values = [0, 10]\n'
        )
        cfg, spec = load_config(str(path))
        assert cfg.antennas == 6
        assert cfg.noise_power_w == pytest.approx(1e-6, rel=1e-12)
        assert spec.values == (0.0, 10.0)

    def test_unknown_field_named(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"antenas": 8}))
        with pytest.raises(ConfigError, match="antenas"):
            load_config(str(path))

    def test_missing_file(self):
        with pytest.raises(ConfigError, match="no/such"):
            load_config("no/such/file.json")

    def test_infinite_kappa(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"kappa_db": "inf"}))
        cfg, _ = load_config(str(path))
        assert math.isinf(cfg.kappa)

    def test_smoke_preset(self):
        cfg = smoke_preset(SystemConfig())
        assert (cfg.trials, cfg.subcarriers, cfg.codebook_size) == (50, 16, 64)

    def test_sweep_value_application(self):
        base = tiny_config()
        assert apply_sweep_value(base, "kappa", 30.0).kappa_db == 30.0
        assert apply_sweep_value(base, "speed", 10.0).speed_mps == 10.0
        assert apply_sweep_value(base, "q", 32).codebook_size == 32
        p = apply_sweep_value(base, "power", 20.0).slot_power_w
        assert np.allclose(p, 0.1, rtol=1e-12)


class TestTrialDeterminism:
    def test_same_seed_same_report(self):
        cfg = tiny_config()
        ws = Workspace(cfg)
        a = run_trial(cfg, 3, ws)
        b = run_trial(cfg, 3, ws)
        for m in METHODS:
            assert method_state(a.methods[m]) == method_state(b.methods[m])

    def test_different_trials_differ(self):
        cfg = tiny_config()
        ws = Workspace(cfg)
        a = run_trial(cfg, 0, ws)
        b = run_trial(cfg, 1, ws)
        assert a.methods["proposed"].sum_se != b.methods["proposed"].sum_se

    def test_zero_speed_proposed_equals_no_doppler(self):
        cfg = tiny_config(speed_mps=0.0)
        ws = Workspace(cfg)
        for i in range(4):
            rep = run_trial(cfg, i, ws)
            assert method_state(rep.methods["proposed"]) == method_state(
                rep.methods["no_doppler"]
            )


class TestReceiverChainProperties:
    def test_on_grid_pure_los_proposed_matches_limit(self):
        cfg = tiny_config(
            antennas=8, users=4, subcarriers=8, codebook_size=64,
            kappa_db=math.inf, noise_power_w=1e-12,
        )
        angles = codebook_angles(cfg.codebook_size)
        geos = [
            UserGeometry(aod=float(angles[i]), heading=float(angles[i]),
                         speed=cfg.speed_mps, distance=120.0 + 10 * k)
            for k, i in enumerate([10, 25, 40, 55])
        ]
        rep = run_trial(cfg, 0, Workspace(cfg), geometries=geos)
        prop = rep.methods["proposed"].sum_se
        limit = rep.methods["perfect_limit"].sum_se
        assert abs(prop - limit) <= 1e-6 * limit
        assert rep.methods["proposed"].symbol_errors == 0

    def test_perfect_limit_closed_form(self):
        p = dbm_to_watt(25.0)
        cfg = tiny_config(antennas=10, users=2, subcarriers=4, kappa_db=math.inf)
        geos = [
            UserGeometry(aod=0.31, heading=0.31, speed=39.0, distance=100.0),
            UserGeometry(aod=-0.82, heading=-0.82, speed=39.0, distance=100.0),
        ]
        rep = run_trial(cfg, 0, Workspace(cfg), geometries=geos)
        gamma = 10 * p * 1e-4 / 1e-6 / 10  # p|g|^2/sigma^2
        expected = np.log2(1 + gamma)
        assert np.allclose(rep.methods["perfect_limit"].per_user_se, expected, rtol=1e-9)

    def test_proposed_bounded_by_limit_high_kappa(self):
        cfg = tiny_config(antennas=8, users=4, subcarriers=8, codebook_size=32,
                          kappa_db=40.0)
        ws = Workspace(cfg)
        props, limits = [], []
        for i in range(15):
            rep = run_trial(cfg, i, ws)
            props.append(rep.methods["proposed"].sum_se)
            limits.append(rep.methods["perfect_limit"].sum_se)
        assert np.mean(props) <= np.mean(limits)

    def test_no_doppler_loses_at_high_speed(self):
        cfg = tiny_config(antennas=8, users=4, subcarriers=8, codebook_size=32,
                          kappa_db=math.inf)
        ws = Workspace(cfg)
        diffs = []
        for i in range(15):
            rep = run_trial(cfg, i, ws)
            diffs.append(
                rep.methods["proposed"].sum_se - rep.methods["no_doppler"].sum_se
            )
        assert np.mean(diffs) > 0

    def test_quantization_gap_shrinks_with_codebook(self):
        gaps = {}
        for q in (16, 256):
            cfg = tiny_config(antennas=8, users=3, subcarriers=16, codebook_size=q,
                              kappa_db=math.inf)
            ws = Workspace(cfg)
            gap = []
            for i in range(15):
                rep = run_trial(cfg, i, ws)
                limit = rep.methods["perfect_limit"].sum_se
                gap.append((limit - rep.methods["proposed"].sum_se) / limit)
            gaps[q] = np.mean(gap)
        assert gaps[256] < gaps[16]
        assert gaps[256] < 0.10


class TestAggregation:
    def test_single_point_single_trial_rows(self):
        cfg = tiny_config(trials=1)
        spec = SweepSpec(variable="kappa", values=(20.0,), trials=1, base=cfg)
        report = run_sweep(spec)
        assert len(report.rows) == 5
        assert [r.method for r in report.rows] == list(METHODS)
        assert all(r.stderr == 0.0 for r in report.rows)
        assert all(np.isfinite(r.mean_sum_se) for r in report.rows)

    def test_row_grid(self):
        cfg = tiny_config(trials=2)
        spec = SweepSpec(variable="kappa", values=(0.0, 20.0, 40.0), trials=2, base=cfg)
        report = run_sweep(spec)
        assert len(report.rows) == 15
        assert report.metadata["sweep"]["values"] == [0.0, 20.0, 40.0]

    def test_overhead_column_scaling(self):
        cfg = tiny_config(trials=2)
        spec = SweepSpec(variable="kappa", values=(10.0,), trials=2, base=cfg)
        report = run_sweep(spec)
        factor = cfg.users / cfg.antennas
        for row in report.rows:
            assert row.mean_sum_se_overhead == pytest.approx(
                row.mean_sum_se * factor, rel=1e-12
            )

    def test_estimated_column_presence(self):
        cfg = tiny_config(trials=2)
        spec = SweepSpec(variable="kappa", values=(10.0,), trials=2, base=cfg)
        report = run_sweep(spec)
        by_method = {r.method: r for r in report.rows}
        for m in ("proposed", "perfect_limit", "no_doppler"):
            assert by_method[m].mean_sum_se_estimated is not None
        for m in ("ZF", "MRT"):
            assert by_method[m].mean_sum_se_estimated is None

    def test_stderr_scaling_with_trials(self):
        # standard error should shrink like 1/sqrt(trials)
        cfg = tiny_config(antennas=3, users=1, subcarriers=2, codebook_size=4,
                          kappa_db=10.0)
        ws = Workspace(cfg)

        def stderr(n_trials):
            sums = np.array(
                [r.methods["proposed"].sum_se for r in run_point(cfg, n_trials, workspace=ws)]
            )
            return np.std(sums, ddof=1) / np.sqrt(n_trials)

        ratio = stderr(100) / stderr(10000)
        assert 7.0 < ratio < 13.0


class TestReports:
    def _small_report(self, trials=2, values=(0.0, 20.0)):
        cfg = tiny_config(trials=trials)
        spec = SweepSpec(variable="kappa", values=values, trials=trials, base=cfg)
        return run_sweep(spec)

    def test_csv_reruns_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_report(self._small_report(), str(a))
        write_report(self._small_report(), str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_csv_layout(self, tmp_path):
        path = tmp_path / "out.csv"
        write_report(self._small_report(), str(path))
        lines = path.read_text().strip().split("\n")
        assert lines[0] == (
            "sweep_var,sweep_value,method,mean_sum_se,stderr,"
            "mean_sum_se_overhead,stderr_overhead,mean_sum_se_estimated,trials,seed"
        )
        assert len(lines) == 1 + 10  # header + 5 methods x 2 values

    def test_json_round_trip(self, tmp_path):
        report = self._small_report()
        path = tmp_path / "out.json"
        write_report(report, str(path), fmt="json")
        loaded = json.loads(path.read_text())
        assert len(loaded["rows"]) == len(report.rows)
        for row, raw in zip(report.rows, loaded["rows"]):
            assert raw["method"] == row.method
            assert raw["mean_sum_se"] == pytest.approx(row.mean_sum_se, rel=1e-15)
        assert loaded["metadata"]["seed"] == 7
        assert "config" in loaded["metadata"]

    def test_unwritable_path(self):
        with pytest.raises(RuntimeError, match="no/such"):
            write_report(self._small_report(), "no/such/dir/out.csv")

    def test_parallel_equals_serial(self):
        cfg = tiny_config(trials=6)
        spec = SweepSpec(variable="kappa", values=(10.0, 30.0), trials=6, base=cfg)
        serial = render_csv(run_sweep(spec, threads=1))
        parallel = render_csv(run_sweep(spec, threads=8))
        assert serial == parallel


class TestComplexity:
    def test_reference_count(self):
        assert complexity_count(64, 256, 10) == 1_815_040

    def test_degenerate_formula(self):
        assert complexity_count(1, 0, 1) == 2

    def test_antenna_scaling(self):
        ratio = complexity_count(64, 256, 20) / complexity_count(64, 256, 10)
        assert 3.5 < ratio < 4.05

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            complexity_count(-1, 4, 4)


class TestCli:
    def test_simulate_smoke(self, tmp_path):
        out = tmp_path / "res.csv"
        code = cli_main(
            ["simulate", "--preset", "smoke", "--values", "0,20", "--trials", "2",
             "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 1 + 10

    def test_simulate_json_format(self, tmp_path):
        out = tmp_path / "res.json"
        code = cli_main(
            ["simulate", "--preset", "smoke", "--values", "10", "--trials", "1",
             "--out", str(out), "--format", "json"]
        )
        assert code == 0
        assert json.loads(out.read_text())["metadata"]["sweep"]["values"] == [10.0]

    def test_seed_flag_changes_output(self, tmp_path):
        a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
        args = ["simulate", "--preset", "smoke", "--values", "0", "--trials", "2"]
        assert cli_main(args + ["--out", str(a), "--seed", "1"]) == 0
        assert cli_main(args + ["--out", str(b), "--seed", "2"]) == 0
        assert cli_main(args + ["--out", str(c), "--seed", "1"]) == 0
        assert a.read_bytes() == c.read_bytes()
        assert a.read_bytes() != b.read_bytes()

    def test_invalid_config_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"users": 9}))
        out = tmp_path / "res.csv"
        code = cli_main(["simulate", "--config", str(cfg), "--out", str(out)])
        assert code == 2
        assert "users" in capsys.readouterr().err

    def test_complexity_subcommand(self, capsys):
        assert cli_main(["complexity", "--L", "64", "--Q", "256", "--N", "10"]) == 0
        assert capsys.readouterr().out.strip() == "1815040"

    def test_values_required_for_other_sweeps(self, tmp_path):
        out = tmp_path / "res.csv"
        code = cli_main(["simulate", "--sweep", "speed", "--out", str(out)])
        assert code == 2
