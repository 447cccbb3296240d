"""Scenario orchestration: continuum -> state prep -> engines -> analysis.

``run_scenario`` owns the file layout of a run directory:

    config.json              resolved scenario configuration
    <engine>.csv             trajectory (contract columns, streamed)
    <engine>-totals.csv      per-sample conserved-quantity audit trail
    quantum-mps.ckpt         checkpoint at every sample (resumable)
    discrepancies.csv/.json  engine-vs-engine and continuum metrics
    map-<engine>-<field>.csv spacetime matrices
    *.png                    rendered report figures
    manifest.json            parameters, audits, wall clock, content hashes

Everything except the manifest is byte-deterministic for a fixed config and
build.  Conservation audits are checked against thresholds that reduce to
the published budget numbers at the default (paper-grade) settings and
scale with ``w_budget`` for deliberately relaxed runs.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import __version__, figures, io, meanfield
from .analysis import delta_continuum_vs_mf, delta_quantum_vs_mf
from .continuum import NarrowSolitonWarning, sample_on_lattice
from .errors import BoundaryHorizonError, CheckpointError, ScenarioError
from .model import bloch_from_density_phase
from .quantum import dense as qdense
from .quantum import mps as qmps
from .quantum.checkpoint import load_checkpoint, save_checkpoint
from .records import Trajectory
from .scenarios import ScenarioConfig, boundary_horizon, initial_profile, preset_configs

TOTALS_HEADER = ["t", "norm", "energy", "total_sz", "discarded_weight"]


def audit_thresholds(config: ScenarioConfig, engine):
    """Conservation budgets per engine; paper-grade defaults reproduce the
    published tolerances, relaxed w_budget scales the truncation-sensitive
    ones proportionally."""
    if engine == "meanfield":
        return {"total_sz_drift": 1e-8, "energy_drift": 1e-7}
    if engine == "quantum-mps":
        scale = max(1.0, config.w_budget / 1e-9)
        return {
            "norm_drift": 1e-8 * scale,
            "total_sz_drift": 1e-7 * scale,
            "energy_drift": 1e-5 * scale,
            "discarded_weight": config.w_budget,
        }
    if engine == "quantum-exact":
        return {"norm_drift": 1e-10, "total_sz_drift": 1e-9, "energy_drift": 1e-10}
    raise ScenarioError(f"unknown engine {engine}")


def _totals_row(rec):
    return {
        "t": rec.t,
        "norm": rec.norm,
        "energy": rec.energy,
        "total_sz": rec.total_sz,
        "discarded_weight": rec.discarded_weight,
    }


def audit_from_totals(path):
    """Recompute the conservation audit from a totals CSV (covers resumes)."""
    import csv

    with open(path, newline="") as fh:
        rows = [
            {k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)
        ]
    first = rows[0]
    return {
        "norm_drift": max(abs(r["norm"] - first["norm"]) for r in rows),
        "energy_drift": max(
            abs(r["energy"] - first["energy"]) / max(abs(first["energy"]), 1e-300)
            for r in rows
        ),
        "total_sz_drift": max(
            abs(r["total_sz"] - first["total_sz"]) / max(abs(first["total_sz"]), 1.0)
            for r in rows
        ),
        "discarded_weight": rows[-1]["discarded_weight"],
    }


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    outdir: Path
    trajectories: dict = dc_field(default_factory=dict)
    discrepancies: list = dc_field(default_factory=list)
    audits: dict = dc_field(default_factory=dict)
    audit_failures: list = dc_field(default_factory=list)
    manifest: dict = dc_field(default_factory=dict)

    @property
    def ok(self):
        return not self.audit_failures


def _check_horizon(config):
    horizon = boundary_horizon(config)
    if config.duration > horizon and not config.allow_boundary_overrun:
        raise BoundaryHorizonError(
            f"duration {config.duration}/J exceeds the boundary-safety "
            f"horizon {horizon:.1f}/J for this scenario; rerun with "
            "allow_boundary_overrun to override"
        )
    return horizon


def _stream_engine(outdir, engine, trajectory_iter, append=False):
    """Write trajectory + totals rows as records arrive; return the records."""
    csv_path = Path(outdir) / f"{engine}.csv"
    totals_path = Path(outdir) / f"{engine}-totals.csv"
    records = []
    with io.TrajectoryWriter(csv_path, append=append) as w:
        for rec in trajectory_iter:
            w.write_record(rec)
            io.append_table_row(totals_path, _totals_row(rec), TOTALS_HEADER)
            records.append(rec)
    return records


def _run_meanfield(config, rho, phi, outdir):
    params = config.lattice()
    state = meanfield.from_density_phase(params, rho, phi, config.rho0)
    traj = meanfield.evolve(
        state, config.duration, dt=config.mf_dt, sample_every=config.measure_every
    )
    _stream_engine(outdir, "meanfield", traj)
    return traj


def _run_quantum_exact(config, rho, phi, outdir):
    state = qdense.dense_from_bloch(bloch_from_density_phase(rho, phi))
    traj = qdense.krylov_exact_evolve(
        state,
        config.lattice(),
        config.dt,
        config.duration,
        measure_every=config.measure_every,
    )
    _stream_engine(outdir, "quantum-exact", traj)
    return traj


def _run_quantum_mps(config, rho, phi, outdir, resume=False, stop_after=None):
    params = config.lattice()
    evo = config.evolution_config()
    ckpt = Path(outdir) / "quantum-mps.ckpt"
    csv_path = Path(outdir) / "quantum-mps.csv"
    totals_path = Path(outdir) / "quantum-mps-totals.csv"
    if resume:
        state, ck_params, ck_evo, header = load_checkpoint(ckpt)
        if header.get("extra", {}).get("scenario_hash") != config.config_hash():
            raise CheckpointError(
                "checkpoint belongs to a different scenario configuration"
            )
    else:
        state = qmps.mps_from_bloch(bloch_from_density_phase(rho, phi))

    writer = io.TrajectoryWriter(csv_path, append=resume)

    def on_sample(m, step, rec):
        writer.write_record(rec)
        io.append_table_row(totals_path, _totals_row(rec), TOTALS_HEADER)
        save_checkpoint(
            ckpt, m, params, evo, extra={"scenario_hash": config.config_hash()}
        )

    try:
        traj = qmps.tebd_evolve(
            state, params, evo, on_sample=on_sample, stop_time=stop_after
        )
    finally:
        writer.close()
    return traj


def _csv_trajectory(outdir, engine):
    times, fields = io.read_trajectory_csv(Path(outdir) / f"{engine}.csv")
    return times, fields


def _final_profiles(outdir, engine):
    times, fields = _csv_trajectory(outdir, engine)
    return times[-1], fields["rho"][-1], fields["rho_s"][-1]


def _write_maps(outdir, engine, map_fields):
    times, fields = _csv_trajectory(outdir, engine)
    written = []
    for name in map_fields:
        mat = fields[name]
        if name in ("entropy_bond", "corr_nn"):
            mat = mat[:, :-1]  # drop the zero-padded last site
        path = Path(outdir) / f"map-{engine}-{name}.csv"
        rows = [
            {"t": t, **{f"x{j}": mat[i, j] for j in range(mat.shape[1])}}
            for i, t in enumerate(times)
        ]
        io.write_table_csv(path, rows, ["t"] + [f"x{j}" for j in range(mat.shape[1])])
        written.append(path.name)
    return written


def run_scenario(
    config: ScenarioConfig, outdir, resume=False, stop_after=None
) -> ScenarioResult:
    """Run all configured engines, emit artifacts, and audit conservation.

    ``stop_after`` halts the quantum-mps engine at the first sample at or
    past that time (a clean interruption point); ``resume=True`` continues
    it from the run directory's checkpoint, reproducing the uninterrupted
    byte stream.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    cfg_path = outdir / "config.json"
    if resume:
        stored = ScenarioConfig.from_json(cfg_path.read_text())
        if stored.config_hash() != config.config_hash():
            raise CheckpointError("resume config does not match the stored run")
    else:
        cfg_path.write_text(config.to_json())

    horizon = _check_horizon(config)
    caught = []
    with warnings.catch_warnings(record=True) as wlist:
        warnings.simplefilter("always", NarrowSolitonWarning)
        rho, phi = initial_profile(config)
        caught = [str(w.message) for w in wlist]

    result = ScenarioResult(config=config, outdir=outdir)
    engine_status = {}
    for engine in config.engines:
        try:
            if engine == "meanfield":
                if resume and (outdir / "meanfield.csv").exists():
                    engine_status[engine] = "kept"  # completed before interrupt
                else:
                    result.trajectories[engine] = _run_meanfield(
                        config, rho, phi, outdir
                    )
                    engine_status[engine] = "complete"
            elif engine == "quantum-exact":
                result.trajectories[engine] = _run_quantum_exact(
                    config, rho, phi, outdir
                )
                engine_status[engine] = "complete"
            elif engine == "quantum-mps":
                traj = _run_quantum_mps(
                    config, rho, phi, outdir, resume=resume, stop_after=stop_after
                )
                result.trajectories[engine] = traj
                partial = traj.final().t < config.duration - 1e-9
                engine_status[engine] = "partial" if partial else "complete"
        except Exception as exc:
            engine_status[engine] = f"failed: {type(exc).__name__}: {exc}"
            _write_manifest(result, engine_status, horizon, caught, started)
            raise

    complete = all(s in ("complete", "kept") for s in engine_status.values())
    if complete:
        _finalize_outputs(config, result, outdir)
        for engine in config.engines:
            totals = outdir / f"{engine}-totals.csv"
            if not totals.exists():
                continue
            audit = audit_from_totals(totals)
            result.audits[engine] = audit
            for key, bound in audit_thresholds(config, engine).items():
                if audit[key] >= bound:
                    result.audit_failures.append(
                        f"{engine}: {key}={audit[key]:.3e} >= {bound:.3e}"
                    )
    _write_manifest(result, engine_status, horizon, caught, started)
    return result


def _finalize_outputs(config, result, outdir):
    """Comparisons, maps, and figures once all engines completed."""
    engines = [e for e in config.engines if (outdir / f"{e}.csv").exists()]
    snapshots = {}
    for engine in engines:
        times, fields = _csv_trajectory(outdir, engine)
        first = _csv_record(times, fields, 0)
        last = _csv_record(times, fields, -1)
        snapshots[engine] = (first, last)
        map_fields = ["rho", "rho_s"]
        if engine.startswith("quantum"):
            map_fields += ["entropy_bond", "corr_nn"]
        _write_maps(outdir, engine, map_fields)
        for name in ("rho", "entropy_bond"):
            if engine == "meanfield" and name == "entropy_bond":
                continue
            mat = fields[name][:, :-1] if name == "entropy_bond" else fields[name]
            smap = _SimpleMap(name, mat, times)
            figures.spacetime_figure(
                outdir / f"map-{engine}-{name}.png", smap, title=f"{engine}: {name}"
            )
    if snapshots:
        figures.profile_figure(
            outdir / "profiles.png", snapshots, title=config.name
        )

    rows = []
    quantum = next((e for e in engines if e.startswith("quantum")), None)
    if quantum and "meanfield" in engines:
        t_f, rho_q, rho_s_q = _final_profiles(outdir, quantum)
        _, rho_m, rho_s_m = _final_profiles(outdir, "meanfield")
        for qty, a, b in (
            ("density", rho_q, rho_m),
            ("condensate", rho_s_q, rho_s_m),
        ):
            d = delta_quantum_vs_mf(a, b, quantity=qty, time=t_f)
            rows.append(
                {"comparison": "quantum_vs_mf", "quantity": qty, "time": t_f,
                 "value": d.value}
            )
    if config.kind == "soliton" and "meanfield" in engines:
        t_f, rho_m, rho_s_m = _final_profiles(outdir, "meanfield")
        spec = config.soliton_spec()
        rho_c, _ = sample_on_lattice(config.lattice(), spec, time=t_f)
        rho_s_c = rho_c * (1.0 - rho_c)
        for qty, a, b, bg in (
            ("density", rho_c, rho_m, config.rho0),
            ("condensate", rho_s_c, rho_s_m, config.rho0 * (1 - config.rho0)),
        ):
            d = delta_continuum_vs_mf(a, b, bg, quantity=qty, time=t_f)
            rows.append(
                {"comparison": "continuum_vs_mf", "quantity": qty, "time": t_f,
                 "value": d.value}
            )
    if rows:
        io.write_table_csv(
            outdir / "discrepancies.csv",
            rows,
            ["comparison", "quantity", "time", "value"],
        )
        io.write_json(
            outdir / "discrepancies.json",
            {"scenario": config.to_dict(), "rows": rows},
        )
        result.discrepancies = rows


class _SimpleMap:
    def __init__(self, field_name, matrix, times):
        self.field = field_name
        self.matrix = matrix
        self.times = times
        self.positions = np.arange(matrix.shape[1], dtype=float) + (
            0.5 if field_name in ("entropy_bond", "corr_nn") else 0.0
        )
        self.axis = "bond" if field_name in ("entropy_bond", "corr_nn") else "site"


def _csv_record(times, fields, i):
    from .records import ObservableRecord

    L = fields["rho"].shape[1]
    return ObservableRecord(
        t=float(times[i]),
        rho=fields["rho"][i],
        rho_s=fields["rho_s"][i],
        phase=fields["phase"][i],
        entropy=fields["entropy_bond"][i, :-1],
        corr_nn=fields["corr_nn"][i, :-1],
        norm=1.0,
        energy=0.0,
        total_sz=0.0,
    )


def _write_manifest(result, engine_status, horizon, warnings_list, started):
    outdir = result.outdir
    config = result.config
    import scipy

    emitted = sorted(
        p.name
        for p in outdir.iterdir()
        if p.is_file() and p.name != "manifest.json"
    )
    manifest = {
        "scenario": config.to_dict(),
        "config_hash": config.config_hash(),
        "versions": {
            "solitonlab": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "engine_status": engine_status,
        "boundary_horizon": horizon if np.isfinite(horizon) else "inf",
        "warnings": warnings_list,
        "audits": result.audits,
        "audit_failures": result.audit_failures,
        "wallclock_seconds": time.time() - started,
        "files": io.hash_tree(outdir, emitted),
        "status": "complete"
        if all(s in ("complete", "kept") for s in engine_status.values())
        else "partial",
    }
    io.write_json(outdir / "manifest.json", manifest)
    result.manifest = manifest


def resume_run(outdir) -> ScenarioResult:
    """Continue an interrupted run directory to its configured duration."""
    outdir = Path(outdir)
    cfg_path = outdir / "config.json"
    if not cfg_path.exists():
        raise CheckpointError(f"no run configuration found in {outdir}")
    config = ScenarioConfig.from_json(cfg_path.read_text())
    return run_scenario(config, outdir, resume=True)


def run_scan_point(template: ScenarioConfig, coupling_ratio, vbar):
    """One stability-scan pipeline point, in memory (no artifacts)."""
    config = template.with_updates(
        name=f"{template.name}-vj{coupling_ratio:g}-vb{vbar:g}",
        V=coupling_ratio * template.J,
        vbar=vbar,
    )
    _check_horizon(config)
    rho, phi = initial_profile(config)
    params = config.lattice()
    out = {}
    started = time.time()
    mf = meanfield.evolve(
        meanfield.from_density_phase(params, rho, phi, config.rho0),
        config.duration,
        dt=config.mf_dt,
        sample_every=config.measure_every,
    )
    spec = config.soliton_spec()
    rho_c, _ = sample_on_lattice(params, spec, time=config.duration)
    out["delta_continuum_density"] = delta_continuum_vs_mf(
        rho_c, mf.final().rho, config.rho0
    ).value
    if "quantum-mps" in config.engines:
        state = qmps.mps_from_bloch(bloch_from_density_phase(rho, phi))
        tq = qmps.tebd_evolve(state, params, config.evolution_config())
        out["delta_rho_density"] = delta_quantum_vs_mf(
            tq.final().rho, mf.final().rho
        ).value
        out["delta_rho_condensate"] = delta_quantum_vs_mf(
            tq.final().rho_s, mf.final().rho_s, quantity="condensate"
        ).value
        out["entropy_peak"] = float(tq.final().entropy.max())
        out["discarded_weight"] = tq.final().discarded_weight
    out["wallclock_seconds"] = time.time() - started
    return out


def ground_state_study(L, couplings, fillings, outdir):
    """Desk-scale ground-state entropy reference (fig6 substitute)."""
    from .model import make_params
    from .quantum.dense import ground_state_reference

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    profiles = {}
    for rho0 in fillings:
        n = int(round(rho0 * L))
        params = make_params(L, 1.0, couplings)
        energy, entropy = ground_state_reference(params, n)
        label = f"rho0={rho0:g} (n={n})"
        profiles[label] = entropy
        rows.append(
            {
                "rho0": rho0,
                "n_particles": n,
                "energy": energy,
                "center_entropy": float(entropy[L // 2 - 1]),
            }
        )
    io.write_table_csv(
        outdir / "ground-state-entropy.csv",
        rows,
        ["rho0", "n_particles", "energy", "center_entropy"],
    )
    io.write_json(
        outdir / "ground-state-entropy.json",
        {"L": L, "coupling_ratio": couplings, "rows": rows},
    )
    figures.entropy_profile_figure(
        outdir / "ground-state-entropy.png",
        profiles,
        title=f"ground-state bond entropy, L={L}, V/J={couplings:g}",
    )
    return rows
