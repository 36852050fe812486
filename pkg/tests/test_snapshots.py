"""On-disk formats: snapshots, ledger CSV, manifests."""

import json

import numpy as np
import pytest

from scbf.domain import ConfigurationError, DomainSpec
from scbf.fields import random_field
from scbf.params import PhysicalParams
from scbf.snapshots import (
    content_hash,
    read_ledger_csv,
    read_snapshot,
    write_ledger_csv,
    write_manifest,
    write_report,
    write_snapshot,
)
from scbf.solver import SolverConfig, solve_transformed


class TestSnapshotFormat:
    def test_round_trip_bitwise(self, dom2_small, tmp_path):
        u = random_field(dom2_small, 1)
        path = tmp_path / "f.snap"
        write_snapshot(path, u, time=1.25, step=125)
        back, header = read_snapshot(path, dom2_small)
        assert np.array_equal(back.coeffs, u.coeffs)
        assert header["time"] == 1.25 and header["step"] == 125

    def test_self_describing(self, dom3, tmp_path):
        u = random_field(dom3, 2)
        path = tmp_path / "f.snap"
        write_snapshot(path, u)
        back, header = read_snapshot(path)  # no domain supplied
        assert back.domain == dom3
        assert np.array_equal(back.coeffs, u.coeffs)

    def test_domain_mismatch_rejected(self, dom2_small, dom2, tmp_path):
        u = random_field(dom2_small, 1)
        path = tmp_path / "f.snap"
        write_snapshot(path, u)
        with pytest.raises(ConfigurationError, match="does not match"):
            read_snapshot(path, dom2)

    def test_garbage_rejected(self, tmp_path):
        path = tmp_path / "bad.snap"
        path.write_bytes(b"\x00\x01\x02 not a snapshot\n")
        with pytest.raises(ConfigurationError):
            read_snapshot(path)

    def test_bad_magic_rejected(self, dom2_small, tmp_path):
        path = tmp_path / "bad.snap"
        path.write_bytes(json.dumps({"magic": "other"}).encode() + b"\n")
        with pytest.raises(ConfigurationError, match="magic"):
            read_snapshot(path)

    def test_response_states_reuse_field_format(self, dom2_small, tmp_path):
        # noise-path snapshots are ordinary field snapshots with a time index
        from scbf.noise import NoiseRealization, OUProcess, build_coloring

        spec = build_coloring(dom2_small, 0.25, 0.1, 2.5)
        omega = NoiseRealization(spectrum=spec, seed=4, dt=0.01)
        path = OUProcess(omega, 1.0, 0.0).path(-0.1, 0.1)
        state = path.state(0.05)
        f = tmp_path / "ou.snap"
        write_snapshot(f, state, time=0.05, step=5)
        back, header = read_snapshot(f, dom2_small)
        assert np.array_equal(back.coeffs, state.coeffs)
        assert header["time"] == 0.05


class TestLedgerCsv:
    def test_round_trip(self, dom2_small, tmp_path):
        p = PhysicalParams(mu=1.0, alpha=1.0, beta=1.0, r=3.0)
        cfg = SolverConfig(params=p, dt=0.01, store_every=10)
        traj = solve_transformed(random_field(dom2_small, 3), None, 0.3, cfg)
        path = tmp_path / "ledger.csv"
        write_ledger_csv(path, traj.ledger)
        back = read_ledger_csv(path)
        assert back.rows == traj.ledger.rows  # repr round-trips floats

    def test_header_validated(self, tmp_path):
        path = tmp_path / "ledger.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ConfigurationError, match="columns"):
            read_ledger_csv(path)


class TestManifests:
    def test_hash_stable_under_key_order(self):
        a = {"x": 1, "y": {"b": 2, "a": 3}}
        b = {"y": {"a": 3, "b": 2}, "x": 1}
        assert content_hash(a) == content_hash(b)

    def test_manifest_embeds_hash(self, tmp_path):
        cfg_data = {"domain": {"dim": 2}}
        write_manifest(tmp_path / "m.json", cfg_data)
        data = json.loads((tmp_path / "m.json").read_text())
        assert data["config_hash"] == content_hash(cfg_data)

    def test_report_overall_status(self, tmp_path):
        ok = write_report(tmp_path / "r.json", {}, [{"name": "a", "passed": True}])
        assert ok
        bad = write_report(tmp_path / "r2.json", {},
                           [{"name": "a", "passed": True},
                            {"name": "b", "passed": False}])
        assert not bad
        data = json.loads((tmp_path / "r2.json").read_text())
        assert data["passed"] is False and data["schema_version"] == 1
