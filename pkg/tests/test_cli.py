import json
import warnings
from pathlib import Path

import numpy as np
import pytest

from solitonlab.cli import main
from solitonlab.errors import ScenarioError
from solitonlab.io import read_trajectory_csv, sha256_file
from solitonlab.pipeline import resume_run, run_scenario
from solitonlab.scenarios import (
    PRESET_NAMES,
    ScenarioConfig,
    boundary_horizon,
    preset_configs,
)

FAST = dict(
    kind="soliton",
    L=12,
    V=0.95,
    rho0=0.25,
    engines=("meanfield", "quantum-exact"),
    duration=1.0,
    dt=0.05,
    measure_every=0.5,
    allow_boundary_overrun=True,
)


class TestScenarioConfig:
    def test_json_round_trip_is_identity(self):
        cfg = ScenarioConfig(name="rt", **FAST)
        again = ScenarioConfig.from_json(cfg.to_json())
        assert again == cfg
        assert again.config_hash() == cfg.config_hash()
        third = ScenarioConfig.from_json(again.to_json())
        assert third == again

    def test_unknown_engine_rejected(self):
        with pytest.raises(ScenarioError):
            ScenarioConfig(name="x", kind="uniform", L=8, engines=("dmrg",))

    def test_exact_engine_size_limit(self):
        with pytest.raises(ScenarioError):
            ScenarioConfig(
                name="x", kind="uniform", L=16, engines=("quantum-exact",)
            )

    def test_schema_version_pinned(self):
        cfg = ScenarioConfig(name="x", kind="uniform", L=8)
        d = cfg.to_dict()
        d["schema_version"] = 99
        with pytest.raises(ScenarioError):
            ScenarioConfig.from_dict(d)

    def test_presets_resolve(self):
        for name in PRESET_NAMES:
            if name == "fig6":
                continue
            configs = preset_configs(name)
            assert configs
            for c in configs:
                assert c.config_hash()

    def test_boundary_horizon_scales(self):
        broad = ScenarioConfig(name="x", kind="soliton", L=40, V=0.95, rho0=0.25)
        tight = ScenarioConfig(name="x", kind="soliton", L=12, V=0.95, rho0=0.25)
        assert boundary_horizon(broad) > 20.0
        assert boundary_horizon(tight) < 20.0


class TestPipelineRuns:
    def test_run_emits_contract_files(self, tmp_path):
        cfg = ScenarioConfig(name="files", **FAST)
        res = run_scenario(cfg, tmp_path / "files")
        names = {p.name for p in (tmp_path / "files").iterdir()}
        for expected in (
            "config.json",
            "manifest.json",
            "meanfield.csv",
            "quantum-exact.csv",
            "discrepancies.csv",
            "profiles.png",
            "map-quantum-exact-entropy_bond.png",
        ):
            assert expected in names
        manifest = json.loads((tmp_path / "files" / "manifest.json").read_text())
        assert manifest["status"] == "complete"
        assert not manifest["audit_failures"]
        for fname, digest in manifest["files"].items():
            assert sha256_file(tmp_path / "files" / fname) == digest

    def test_determinism_across_runs(self, tmp_path):
        cfg = ScenarioConfig(name="det", **FAST)
        run_scenario(cfg, tmp_path / "a")
        run_scenario(cfg, tmp_path / "b")
        for f in ("meanfield.csv", "quantum-exact.csv", "discrepancies.csv"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_boundary_guard_refuses_and_overrides(self, tmp_path):
        cfg = ScenarioConfig(name="guard", **{**FAST, "allow_boundary_overrun": False})
        from solitonlab.errors import BoundaryHorizonError

        with pytest.raises(BoundaryHorizonError):
            run_scenario(cfg, tmp_path / "refused")
        ok = cfg.with_updates(allow_boundary_overrun=True)
        res = run_scenario(ok, tmp_path / "overridden")
        assert res.manifest["status"] == "complete"

    def test_narrow_soliton_warning_in_manifest(self, tmp_path):
        cfg = ScenarioConfig(
            name="narrow", kind="soliton", L=40, V=0.45, rho0=0.25,
            engines=("meanfield",), duration=1.0,
        )
        res = run_scenario(cfg, tmp_path / "narrow")
        assert any("width" in w for w in res.manifest["warnings"])


class TestResume:
    def test_interrupt_resume_bit_identical(self, tmp_path):
        cfg = ScenarioConfig(
            name="rr", kind="soliton", L=12, V=0.95, rho0=0.25,
            engines=("meanfield", "quantum-mps"), duration=1.0, dt=0.05,
            measure_every=0.25, chi_max=32, trunc_tol=1e-8, w_budget=1e-3,
            allow_boundary_overrun=True,
        )
        run_scenario(cfg, tmp_path / "full")
        run_scenario(cfg, tmp_path / "part", stop_after=0.5)
        partial = json.loads((tmp_path / "part" / "manifest.json").read_text())
        assert partial["status"] == "partial"
        resume_run(tmp_path / "part")
        for f in ("quantum-mps.csv", "quantum-mps-totals.csv", "quantum-mps.ckpt",
                  "meanfield.csv", "discrepancies.csv"):
            assert (tmp_path / "full" / f).read_bytes() == (
                tmp_path / "part" / f
            ).read_bytes(), f

    def test_resume_nonexistent(self, tmp_path):
        from solitonlab.errors import CheckpointError

        with pytest.raises(CheckpointError):
            resume_run(tmp_path / "missing")

    def test_resume_with_altered_config_rejected(self, tmp_path):
        cfg = ScenarioConfig(
            name="alt", kind="soliton", L=12, V=0.95, rho0=0.25,
            engines=("quantum-mps",), duration=1.0, dt=0.05,
            measure_every=0.25, chi_max=32, trunc_tol=1e-8, w_budget=1e-3,
            allow_boundary_overrun=True,
        )
        run_scenario(cfg, tmp_path / "alt", stop_after=0.5)
        stored = json.loads((tmp_path / "alt" / "config.json").read_text())
        stored["dt"] = 0.025
        (tmp_path / "alt" / "config.json").write_text(json.dumps(stored))
        from solitonlab.errors import CheckpointError

        with pytest.raises(CheckpointError):
            resume_run(tmp_path / "alt")


class TestCli:
    def test_continuum_command(self, tmp_path, capsys):
        rc = main([
            "continuum", "--L", "40", "--vj", "0.95", "--rho0", "0.25",
            "--branch", "dark", "--outdir", str(tmp_path),
        ])
        assert rc == 0
        out = tmp_path / "continuum-vj0.95-dark"
        assert (out / "profile.csv").exists()
        meta = json.loads((out / "profile.json").read_text())
        assert meta["phase_jump"] < 0

    def test_quantum_command_and_compare(self, tmp_path, capsys):
        rc = main([
            "quantum", "--engine", "quantum-exact", "--with-meanfield",
            "--kind", "soliton", "--L", "12", "--vj", "0.95", "--rho0", "0.25",
            "--duration", "1", "--measure-every", "0.5",
            "--allow-boundary-overrun", "--name", "cliq",
            "--outdir", str(tmp_path),
        ])
        assert rc == 0
        rc = main([
            "compare",
            "--a", str(tmp_path / "cliq" / "quantum-exact.csv"),
            "--b", str(tmp_path / "cliq" / "meanfield.csv"),
            "--mode", "quantum-vs-mf",
        ])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert payload["value"] >= 0.0

    def test_exit_code_on_bad_scenario(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main([
                "quantum", "--engine", "quantum-exact", "--L", "16",
                "--duration", "1", "--allow-boundary-overrun",
                "--outdir", str(tmp_path),
            ])
        assert exc.value.code == 2

    def test_preset_listing(self, capsys):
        assert main(["preset", "fig5", "--list"]) == 0
        out = capsys.readouterr().out
        assert "fig5-bright" in out and "fig5-dark" in out

    def test_scan_command(self, tmp_path):
        rc = main([
            "scan", "--kind", "soliton", "--L", "12", "--vj", "0.95",
            "--rho0", "0.25", "--duration", "0.5", "--dt", "0.05",
            "--measure-every", "0.25", "--chi-max", "16",
            "--trunc-tol", "1e-6", "--w-budget", "1e-2",
            "--allow-boundary-overrun",
            "--vj-grid", "0.95", "--vbar-grid", "0",
            "--name", "tiny-scan", "--outdir", str(tmp_path),
        ])
        assert rc == 0
        rows = (tmp_path / "tiny-scan" / "scan.csv").read_text().splitlines()
        assert len(rows) == 2  # header + one point
        assert "ok" in rows[1]

    def test_resume_missing_run_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["resume", str(tmp_path / "nothing")])
        assert exc.value.code == 2
