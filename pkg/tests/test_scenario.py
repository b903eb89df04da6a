import json

import numpy as np
import pytest
from click.testing import CliRunner

from driventb.cli import main
from driventb.scenario import (ConfigError, compare_with_oracle, load_scenario,
                               run_scenario)

BLOCH_CFG = """\
[scenario]
name = bloch
seed = 0

[lattice]
window = -48 48

[state]
kind = gaussian
center = 0
sigma = 6
kappa0 = 0.0

[drive]
kind = dc
f0 = 1.0
g0 = 1.0

[time]
t_max = 6.283185307179586
samples = 32

[output]
quantities = observables state_snapshots
snapshot_times = 0.0 6.283185307179586
"""


def write_cfg(tmp_path, text, name="scenario.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestConfigParsing:
    def test_ini_round_trip(self, tmp_path):
        scenario = load_scenario(write_cfg(tmp_path, BLOCH_CFG))
        assert scenario.name == "bloch"
        assert scenario.window == (-48, 48)
        assert scenario.samples == 32
        assert scenario.drive.f0 == 1.0

    def test_json_equivalent(self, tmp_path):
        payload = {
            "scenario": {"name": "bloch", "seed": 0},
            "lattice": {"window": [-48, 48]},
            "state": {"kind": "gaussian", "center": 0, "sigma": 6, "kappa0": 0.0},
            "drive": {"kind": "dc", "f0": 1.0, "g0": 1.0},
            "time": {"t_max": 6.283185307179586, "samples": 32},
            "output": {"quantities": ["observables"]},
        }
        path = write_cfg(tmp_path, json.dumps(payload), "scenario.json")
        scenario = load_scenario(path)
        assert scenario.window == (-48, 48)
        assert scenario.drive.g0 == 1.0

    @pytest.mark.parametrize("mangle,needle", [
        (lambda s: s.replace("window = -48 48", "window = 48 -48"), "window"),
        (lambda s: s.replace("samples = 32", "samples = 1"), "samples"),
        (lambda s: s.replace("t_max = 6.283185307179586", "t_max = -1"), "t_max"),
        (lambda s: s.replace("kind = dc", "kind = warp"), "kind"),
        (lambda s: s.replace("quantities = observables state_snapshots",
                             "quantities = entropy"), "quantities"),
        (lambda s: s.replace("sigma = 6", "sigma = -2"), "sigma"),
        (lambda s: s.replace("f0 = 1.0", "fo = 1.0"), "f0"),
    ], ids=["window", "samples", "t_max", "drive-kind", "quantity", "sigma",
            "missing-f0"])
    def test_validation_errors_name_the_field(self, tmp_path, mangle, needle):
        path = write_cfg(tmp_path, mangle(BLOCH_CFG))
        with pytest.raises(ConfigError, match=needle):
            load_scenario(path)

    def test_dispersion_restricts_outputs(self, tmp_path):
        cfg = BLOCH_CFG + "\n[dispersion]\ncouplings = 0 0.5\n"
        with pytest.raises(ConfigError, match="observables"):
            load_scenario(write_cfg(tmp_path, cfg))

    def test_dispersion_with_snapshots_is_valid(self, tmp_path):
        cfg = BLOCH_CFG.replace("quantities = observables state_snapshots",
                                "quantities = state_snapshots")
        cfg += "\n[dispersion]\ncouplings = 0 0.5\nconvention = index\n"
        scenario = load_scenario(write_cfg(tmp_path, cfg))
        assert scenario.dispersion is not None


class TestRunScenario:
    def test_outputs_and_schema(self, tmp_path):
        path = write_cfg(tmp_path, BLOCH_CFG)
        out = tmp_path / "out"
        summary = run_scenario(path, out_dir=out)
        assert summary["status"] == "ok"
        obs_lines = (out / "observables.csv").read_text().splitlines()
        assert obs_lines[0].startswith("# scenario=bloch hash=")
        assert obs_lines[1] == ("t,eta,re_chi,im_chi,u,v,expect_N,var_N,"
                                "re_expect_K,im_expect_K")
        assert len(obs_lines) == 2 + 32
        snap_lines = (out / "snapshot_0000.csv").read_text().splitlines()
        assert snap_lines[1] == "n,re_c,im_c,prob"
        assert len(snap_lines) == 2 + 97
        summary_file = json.loads((out / "summary.json").read_text())
        assert summary_file["outputs"] == summary["outputs"]

    def test_bloch_oscillation_period(self, tmp_path):
        path = write_cfg(tmp_path, BLOCH_CFG.replace("kappa0 = 0.0",
                                                     "kappa0 = 1.2"))
        out = tmp_path / "out"
        run_scenario(path, out_dir=out)
        data = np.genfromtxt(out / "observables.csv", delimiter=",",
                             skip_header=2)
        t, n_mean = data[:, 0], data[:, 6]
        # <N> returns to its initial value after one Bloch period
        assert abs(n_mean[-1] - n_mean[0]) < 1e-10
        assert np.max(np.abs(n_mean)) > 0.5  # it did oscillate

    def test_rerun_is_bit_identical(self, tmp_path):
        cfg = BLOCH_CFG.replace("quantities = observables state_snapshots",
                                "quantities = observables classical")
        path = write_cfg(tmp_path, cfg)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        run_scenario(path, out_dir=out_a)
        run_scenario(path, out_dir=out_b)
        for name in ("observables.csv", "classical.csv", "ensemble.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_invariant_output_is_constant(self, tmp_path):
        cfg = BLOCH_CFG.replace("quantities = observables state_snapshots",
                                "quantities = invariant")
        out = tmp_path / "out"
        run_scenario(write_cfg(tmp_path, cfg), out_dir=out)
        data = np.genfromtxt(out / "invariant.csv", delimiter=",", skip_header=2)
        assert np.max(np.abs(data[:, 1] - data[:, 2])) < 1e-7

    def test_localization_report_output(self, tmp_path):
        cfg = BLOCH_CFG.replace(
            "kind = dc\nf0 = 1.0\ng0 = 1.0",
            "kind = harmonic\nf0 = 1.0\nf1 = 3.831705970207512\nomega = 1.0\n"
            "g0 = 0.5")
        cfg = cfg.replace("quantities = observables state_snapshots",
                          "quantities = localization_report")
        out = tmp_path / "out"
        run_scenario(write_cfg(tmp_path, cfg), out_dir=out)
        report = json.loads((out / "localization_report.json").read_text())
        assert report["localized"] is True
        assert report["order"] == 1

    def test_band_output(self, tmp_path):
        cfg = BLOCH_CFG.replace(
            "kind = dc\nf0 = 1.0\ng0 = 1.0",
            "kind = harmonic\nf0 = 1.0\nf1 = 1.0\nomega = 1.0\ng0 = 0.25")
        cfg = cfg.replace("quantities = observables state_snapshots",
                          "quantities = band")
        out = tmp_path / "out"
        run_scenario(write_cfg(tmp_path, cfg), out_dir=out)
        data = np.genfromtxt(out / "band.csv", delimiter=",", skip_header=2)
        assert data.shape[1] == 2
        width = data[:, 1].max() - data[:, 1].min()
        assert width == pytest.approx(4 * 0.25 * 0.4400505857449335, abs=1e-3)


class TestCompare:
    def test_dc_comparison_passes(self, tmp_path):
        path = write_cfg(tmp_path, BLOCH_CFG)
        report = compare_with_oracle(path, out_dir=tmp_path / "out")
        assert report["passed"]
        assert report["max_amplitude_deviation"] < 1e-6
        assert report["per_time"][0]["amplitude"] == pytest.approx(0.0, abs=1e-12)

    def test_single_band_conventions(self, tmp_path):
        base = """\
[scenario]
name = m3
[lattice]
window = -40 40
[state]
kind = gaussian
sigma = 2.0
kappa0 = 0.3
[drive]
kind = dc
f0 = 1.0
g0 = 0.0
[dispersion]
couplings = 0 0 0 0.3
convention = {conv}
[time]
t_max = 1.3
samples = 4
[output]
quantities = state_snapshots
"""
        good = compare_with_oracle(
            write_cfg(tmp_path, base.format(conv="index"), "good.cfg"),
            out_dir=tmp_path / "a")
        bad = compare_with_oracle(
            write_cfg(tmp_path, base.format(conv="power2"), "bad.cfg"),
            out_dir=tmp_path / "b")
        assert good["max_amplitude_deviation"] < 1e-6
        assert bad["max_amplitude_deviation"] > 1e-2


class TestCli:
    def test_run_and_compare_exit_codes(self, tmp_path):
        runner = CliRunner()
        path = write_cfg(tmp_path, BLOCH_CFG)
        out = tmp_path / "out"
        result = runner.invoke(main, ["run", str(path), "--out-dir", str(out)])
        assert result.exit_code == 0, result.output
        assert "wrote" in result.output

        result = runner.invoke(main, ["compare", str(path), "--out-dir",
                                      str(out)])
        assert result.exit_code == 0, result.output
        assert "PASS" in result.output

        # an absurd tolerance forces the failure path (exit code 2)
        result = runner.invoke(main, ["compare", str(path), "--out-dir",
                                      str(out), "--tolerance", "1e-30"])
        assert result.exit_code == 2

    def test_config_error_exit_code(self, tmp_path):
        runner = CliRunner()
        path = write_cfg(tmp_path, BLOCH_CFG.replace("kind = dc", "kind = warp"))
        result = runner.invoke(main, ["run", str(path), "--out-dir",
                                      str(tmp_path / "out")])
        assert result.exit_code == 1
        assert "kind" in result.output

    def test_out_dir_env_var(self, tmp_path, monkeypatch):
        runner = CliRunner()
        path = write_cfg(tmp_path, BLOCH_CFG)
        target = tmp_path / "from-env"
        monkeypatch.setenv("DRIVENTB_OUT_DIR", str(target))
        result = runner.invoke(main, ["run", str(path)])
        assert result.exit_code == 0, result.output
        assert (target / "observables.csv").exists()

    def test_band_command(self, tmp_path):
        runner = CliRunner()
        cfg = BLOCH_CFG.replace(
            "kind = dc\nf0 = 1.0\ng0 = 1.0",
            "kind = harmonic\nf0 = 1.0\nf1 = 1.0\nomega = 1.0\ng0 = 0.25")
        path = write_cfg(tmp_path, cfg)
        out = tmp_path / "out"
        result = runner.invoke(main, ["band", str(path), "--out-dir", str(out)])
        assert result.exit_code == 0, result.output
        assert (out / "band.csv").exists()

    def test_localization_map_command(self, tmp_path):
        runner = CliRunner()
        cfg = BLOCH_CFG.replace(
            "kind = dc\nf0 = 1.0\ng0 = 1.0",
            "kind = harmonic\nf0 = 1.0\nf1 = 1.0\nomega = 1.0\ng0 = 0.5")
        cfg += "\n[localization_map]\nx_min = 0\nx_max = 6\nsteps = 61\n"
        path = write_cfg(tmp_path, cfg)
        out = tmp_path / "out"
        result = runner.invoke(main, ["localization-map", str(path),
                                      "--out-dir", str(out)])
        assert result.exit_code == 0, result.output
        data = np.genfromtxt(out / "localization_map.csv", delimiter=",",
                             skip_header=2)
        assert data.shape == (61, 2)
        # gamma crosses zero inside the sweep (first zero of J_1)
        assert data[:, 1].min() < 0.0 < data[:, 1].max()

    def test_seed_override_changes_ensemble(self, tmp_path):
        cfg = BLOCH_CFG.replace("quantities = observables state_snapshots",
                                "quantities = classical")
        path = write_cfg(tmp_path, cfg)
        runner = CliRunner()
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert runner.invoke(main, ["run", str(path), "--out-dir", str(out_a),
                                    "--seed", "1"]).exit_code == 0
        assert runner.invoke(main, ["run", str(path), "--out-dir", str(out_b),
                                    "--seed", "2"]).exit_code == 0
        a = (out_a / "ensemble.csv").read_bytes()
        b = (out_b / "ensemble.csv").read_bytes()
        assert a != b


CONFIG_DIR = __import__("pathlib").Path(__file__).resolve().parents[1] / "configs"


class TestShippedConfigs:
    def test_bloch_oscillation_with_oracle_gate(self, tmp_path):
        summary = run_scenario(CONFIG_DIR / "bloch_oscillation.cfg",
                               out_dir=tmp_path)
        assert summary["status"] == "ok"
        assert summary["oracle"]["passed"]

    def test_dynamic_localization_pair(self, tmp_path):
        out_a = tmp_path / "locked"
        out_b = tmp_path / "twin"
        run_scenario(CONFIG_DIR / "dynamic_localization.cfg", out_dir=out_a)
        run_scenario(CONFIG_DIR / "dynamic_localization_twin.cfg", out_dir=out_b)

        locked = np.genfromtxt(out_a / "observables.csv", delimiter=",",
                               skip_header=2)
        t, var = locked[:, 0], locked[:, 7]
        one_period = var[t <= 2 * np.pi + 1e-9]
        assert var.max() < 4.0 * one_period.max()
        report = json.loads((out_a / "localization_report.json").read_text())
        assert report["localized"]

        twin = np.genfromtxt(out_b / "observables.csv", delimiter=",",
                             skip_header=2)
        gamma = 2 * 0.5 * 0.4400505857449335  # 2 g0 J_1(1)
        ratio = twin[-1, 7] / twin[-1, 0] ** 2
        assert ratio == pytest.approx(gamma ** 2 * 0.5, rel=0.05)
        assert not json.loads(
            (out_b / "localization_report.json").read_text())["localized"]

    def test_invariant_config(self, tmp_path):
        run_scenario(CONFIG_DIR / "invariant.cfg", out_dir=tmp_path)
        data = np.genfromtxt(tmp_path / "invariant.csv", delimiter=",",
                             skip_header=2)
        assert np.max(np.abs(data[:, 1] - data[:, 2])) < 1e-7

    def test_quasienergy_band_config(self, tmp_path):
        run_scenario(CONFIG_DIR / "quasienergy_band.cfg", out_dir=tmp_path)
        data = np.genfromtxt(tmp_path / "band.csv", delimiter=",", skip_header=2)
        width = data[:, 1].max() - data[:, 1].min()
        assert width == pytest.approx(0.4400505857449335, abs=1e-3)

    def test_single_band_m3_conventions(self, tmp_path):
        good = compare_with_oracle(CONFIG_DIR / "single_band_m3.cfg",
                                   out_dir=tmp_path / "a")
        bad = compare_with_oracle(CONFIG_DIR / "single_band_m3_power2.cfg",
                                  out_dir=tmp_path / "b")
        assert good["passed"] and good["max_amplitude_deviation"] < 1e-6
        assert not bad["passed"]
        assert bad["max_amplitude_deviation"] > 1e-2


class TestTabulatedScenario:
    def test_run_with_tabulated_drive(self, tmp_path):
        tt = np.linspace(0.0, 2 * np.pi, 513)
        np.savetxt(tmp_path / "f.txt",
                   np.column_stack([tt, 1.0 - np.cos(tt)]))
        np.savetxt(tmp_path / "g.txt",
                   np.column_stack([tt, 0.5 * np.ones_like(tt)]))
        cfg = """\
[lattice]
window = -32 32
[state]
kind = gaussian
sigma = 4
[drive]
kind = tabulated
f_file = f.txt
g_file = g.txt
periodic = true
[time]
t_max = 12.0
samples = 16
[output]
quantities = observables
"""
        path = write_cfg(tmp_path, cfg, "tab.cfg")
        out = tmp_path / "out"
        summary = run_scenario(path, out_dir=out)
        assert summary["status"] == "ok"
        assert (out / "observables.csv").exists()

    def test_missing_table_file_is_config_error(self, tmp_path):
        cfg = """\
[lattice]
window = -8 8
[state]
kind = single_site
[drive]
kind = tabulated
f_file = nope.txt
g_file = nope.txt
[time]
t_max = 1.0
samples = 4
"""
        with pytest.raises(ConfigError, match="f_file"):
            load_scenario(write_cfg(tmp_path, cfg, "tab.cfg"))
