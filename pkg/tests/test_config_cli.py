"""Configuration parsing, the reference file, and the CLI verbs."""

import json
from pathlib import Path

import pytest

from scbf.cli import main
from scbf.config import REFERENCE_TOML, ExperimentConfig, FieldSpec
from scbf.domain import ConfigurationError

QUICK_TOML = """\
[domain]
dim = 2
grid_n = 16

[params]
mu = 1.0
alpha = 1.0
beta = 1.0
r = 1.0

[noise]
seed = 5
dt = 0.005
base_amp = 0.0

[initial]
kind = "shear"
amp = 1.0

[run]
T = 0.5
store_every = 20

[checks]
names = ["closed-form-shear"]
sweep_samples = 10
"""


@pytest.fixture()
def quick_config(tmp_path):
    path = tmp_path / "quick.toml"
    path.write_text(QUICK_TOML)
    return path


class TestConfig:
    def test_reference_parses_to_defaults(self, tmp_path):
        path = tmp_path / "ref.toml"
        path.write_text(REFERENCE_TOML)
        cfg = ExperimentConfig.from_toml(path)
        assert cfg == ExperimentConfig()

    def test_round_trip_through_dict(self):
        cfg = ExperimentConfig(dim=3, grid_n=16, r=4.0, base_amp=0.01,
                               forcing=FieldSpec("shear", 0.2, 1))
        assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg

    def test_hash_changes_with_content(self):
        a = ExperimentConfig()
        b = a.with_overrides(seed=a.seed + 1)
        assert a.hash != b.hash

    def test_inadmissible_regime_rejected(self):
        with pytest.raises(ConfigurationError, match="open problem"):
            ExperimentConfig(dim=3, grid_n=16, r=2.0)

    def test_unknown_check_rejected(self):
        with pytest.raises(ConfigurationError, match="unknown check"):
            ExperimentConfig(check_names=("made-up",))

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigurationError, match="sections"):
            ExperimentConfig.from_dict({"domain": {}, "typo": {}})

    def test_bad_field_kind(self):
        with pytest.raises(ConfigurationError, match="kind"):
            FieldSpec(kind="vortex")

    def test_initial_field_amplitude(self, dom2_small):
        from scbf.operators import norm_h

        spec = FieldSpec("random", 0.25, 7)
        assert norm_h(spec.build(dom2_small)) == pytest.approx(0.25)


class TestCliVerbs:
    def test_gen_config_then_parse(self, tmp_path):
        out = tmp_path / "ref.toml"
        assert main(["gen-config", "--out", str(out)]) == 0
        assert ExperimentConfig.from_toml(out) == ExperimentConfig()

    def test_run_quick_config(self, quick_config, tmp_path):
        out = tmp_path / "run1"
        assert main(["run", "--config", str(quick_config), "--out", str(out)]) == 0
        assert (out / "manifest.json").is_file()
        assert (out / "ledger.csv").is_file()
        assert (out / "report.json").is_file()
        snaps = sorted((out / "fields").glob("*.snap"))
        assert snaps
        report = json.loads((out / "report.json").read_text())
        assert report["passed"] is True

    def test_rerun_is_byte_identical(self, quick_config, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", str(quick_config), "--out", str(out1)])
        main(["run", "--config", str(quick_config), "--out", str(out2)])
        for rel in ["manifest.json", "ledger.csv", "report.json", "norms.csv",
                    "fields/0000.snap"]:
            assert (out1 / rel).read_bytes() == (out2 / rel).read_bytes()

    def test_bad_config_status_2(self, tmp_path):
        bad = tmp_path / "bad.toml"
        bad.write_text("[domain]\ndim = 3\ngrid_n = 16\n[params]\nr = 2.0\n")
        assert main(["run", "--config", str(bad), "--out",
                     str(tmp_path / "x")]) == 2

    def test_missing_config_status_2(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.toml"),
                     "--out", str(tmp_path / "x")]) == 2

    def test_seed_override(self, quick_config, tmp_path):
        out = tmp_path / "seeded"
        assert main(["run", "--config", str(quick_config), "--out", str(out),
                     "--seed-override", "777"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["noise"]["seed"] == 777

    def test_sweep_axis(self, quick_config, tmp_path):
        out = tmp_path / "sweep"
        status = main(["sweep", "--config", str(quick_config), "--out",
                       str(out), "--axis", "noise.dt",
                       "--values", "0.01,0.005"])
        assert status == 0
        table = (out / "sweep.csv").read_text().splitlines()
        assert table[0] == "noise.dt,status,passed"
        assert len(table) == 3
        assert (out / "dt_000" / "report.json").is_file()

    def test_sweep_parallel_workers_same_artifacts(self, quick_config,
                                                   tmp_path):
        out1, out2 = tmp_path / "w1", tmp_path / "w2"
        args = ["sweep", "--config", str(quick_config), "--axis", "noise.dt",
                "--values", "0.01,0.005"]
        assert main(args + ["--out", str(out1), "--workers", "1"]) == 0
        assert main(args + ["--out", str(out2), "--workers", "2"]) == 0
        assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()

    def test_workers_env_var_default(self, monkeypatch):
        from scbf.runner import default_workers

        monkeypatch.setenv("SCBF_WORKERS", "3")
        assert default_workers() == 3
        monkeypatch.setenv("SCBF_WORKERS", "junk")
        assert default_workers() == 1

    def test_sweep_unknown_axis(self, quick_config, tmp_path):
        assert main(["sweep", "--config", str(quick_config), "--out",
                     str(tmp_path / "s"), "--axis", "params.nothing",
                     "--values", "1"]) == 2

    def test_sweep_empty_values(self, quick_config, tmp_path):
        assert main(["sweep", "--config", str(quick_config), "--out",
                     str(tmp_path / "s"), "--axis", "noise.dt",
                     "--values", ""]) == 2

    def test_check_verb_on_stored_run(self, quick_config, tmp_path):
        run_dir = tmp_path / "run"
        main(["run", "--config", str(quick_config), "--out", str(run_dir)])
        out = tmp_path / "checked"
        assert main(["check", "--traj", str(run_dir), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        names = {c["name"] for c in report["checks"]}
        assert names == {"stored-energy-equality", "stored-ledger-recompute"}
        assert report["passed"] is True


class TestCliWithNoise:
    def test_run_with_noise_and_checks(self, tmp_path):
        toml = """\
[domain]
dim = 2
grid_n = 16

[params]
r = 3.0

[noise]
seed = 9
dt = 0.01
base_amp = 0.05

[initial]
kind = "random"
amp = 0.4
seed = 2

[run]
T = 0.3
store_every = 10

[checks]
names = ["cocycle"]
sweep_samples = 5
"""
        cfg_path = tmp_path / "noisy.toml"
        cfg_path.write_text(toml)
        out = tmp_path / "noisy"
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["checks"][0]["name"] == "cocycle"
        assert report["passed"] is True
        # stored-run analysis must also reproduce the noisy ledger
        checked = tmp_path / "noisy-checked"
        assert main(["check", "--traj", str(out), "--out", str(checked)]) == 0
