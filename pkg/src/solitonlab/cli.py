"""Command-line front end.

Subcommands: ``continuum`` (profile tables), ``meanfield``, ``quantum``,
``compare``, ``scan``, ``preset <figN>``, ``resume``.  Flags mirror the
scenario configuration; only the worker budget (SOLITONLAB_WORKERS) and
output root (SOLITONLAB_OUTPUT_ROOT) come from the environment.  All
failures exit nonzero with a structured JSON diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, figures, io
from .continuum import (
    SolitonSpec,
    phase_jump,
    profile_on_grid,
    sound_speed,
    soliton_width,
)
from .errors import SolitonLabError
from .model import make_params
from .pipeline import ground_state_study, resume_run, run_scenario
from .scenarios import PRESET_NAMES, ScenarioConfig, preset_configs


def _output_root(args):
    if args.outdir:
        return Path(args.outdir)
    return Path(os.environ.get("SOLITONLAB_OUTPUT_ROOT", "runs"))


def _add_lattice_flags(p):
    p.add_argument("--L", type=int, default=40, help="number of sites")
    p.add_argument("--J", type=float, default=1.0, help="exchange energy (time unit 1/J)")
    p.add_argument("--vj", type=float, default=0.95, help="coupling ratio V/J")
    p.add_argument("--rho0", type=float, default=0.25, help="background density")


def _add_state_flags(p):
    p.add_argument("--kind", choices=("soliton", "gaussian", "uniform"), default="soliton")
    p.add_argument("--vbar", type=float, default=0.0, help="soliton speed in units of c_s")
    p.add_argument("--branch", choices=("bright", "dark"), default="bright")
    p.add_argument("--center", type=float, default=None, help="feature center (default mid-lattice)")
    p.add_argument("--amplitude", type=float, default=0.0, help="gaussian amplitude (signed)")
    p.add_argument("--width", type=float, default=0.0, help="gaussian width (sites)")
    p.add_argument("--phase-jump", action="store_true", help="imprint a pi step on the gaussian")


def _add_run_flags(p):
    p.add_argument("--duration", type=float, default=20.0, help="evolution time in 1/J")
    p.add_argument("--dt", type=float, default=0.05, help="quantum Trotter step")
    p.add_argument("--mf-dt", type=float, default=0.01, help="mean-field RK4 step")
    p.add_argument("--chi-max", type=int, default=1000, help="bond dimension cap")
    p.add_argument("--trunc-tol", type=float, default=1e-10, help="per-gate discarded-weight cap")
    p.add_argument("--w-budget", type=float, default=1e-9, help="run-level discarded-weight budget")
    p.add_argument("--measure-every", type=float, default=1.0, help="sampling cadence in 1/J")
    p.add_argument("--allow-boundary-overrun", action="store_true",
                   help="run past the boundary-safety horizon")
    p.add_argument("--stop-after", type=float, default=None,
                   help="interrupt the quantum engine at this time (resumable)")
    p.add_argument("--config", type=str, default=None,
                   help="scenario config JSON (overrides the individual flags)")
    p.add_argument("--name", type=str, default=None, help="run name")


def _config_from_args(args, engines):
    if args.config:
        cfg = ScenarioConfig.from_json(Path(args.config).read_text())
        return cfg.with_updates(engines=tuple(engines))
    name = args.name or f"{args.kind}-L{args.L}-vj{args.vj:g}"
    return ScenarioConfig(
        name=name,
        kind=args.kind,
        L=args.L,
        J=args.J,
        V=args.vj * args.J,
        rho0=args.rho0,
        vbar=args.vbar,
        branch=args.branch,
        center=args.center,
        amplitude=args.amplitude,
        width=args.width,
        gauss_phase_jump=args.phase_jump,
        engines=tuple(engines),
        duration=args.duration,
        dt=args.dt,
        mf_dt=args.mf_dt,
        chi_max=args.chi_max,
        trunc_tol=args.trunc_tol,
        w_budget=args.w_budget,
        measure_every=args.measure_every,
        allow_boundary_overrun=args.allow_boundary_overrun,
    )


def cmd_continuum(args):
    spec = SolitonSpec(
        rho0=args.rho0,
        coupling_ratio=args.vj,
        vbar=args.vbar,
        branch=args.branch,
        center=args.center,
    )
    params = make_params(args.L, args.J, args.vj * args.J)
    x0 = spec.resolved_center(params.L)
    z = np.arange(params.L, dtype=float) - x0
    prof = profile_on_grid(z, spec)
    outdir = _output_root(args) / (args.name or f"continuum-vj{args.vj:g}-{args.branch}")
    outdir.mkdir(parents=True, exist_ok=True)
    rows = [
        {"site": j, "z": prof.z[j], "rho": prof.rho[j], "phi": prof.phi[j], "f": prof.f[j]}
        for j in range(params.L)
    ]
    io.write_table_csv(outdir / "profile.csv", rows, ["site", "z", "rho", "phi", "f"])
    io.write_json(
        outdir / "profile.json",
        {
            "rho0": spec.rho0,
            "coupling_ratio": spec.coupling_ratio,
            "vbar": spec.vbar,
            "branch": spec.branch,
            "width": prof.width,
            "phase_jump": prof.phase_jump,
            "sound_speed": prof.sound_speed,
            "peak_value": prof.peak_value,
        },
    )
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True)
    ax1.plot(prof.z, prof.rho, "k-")
    ax1.set_ylabel(r"$\rho$")
    ax2.plot(prof.z, prof.phi, "b-")
    ax2.set_ylabel(r"$\phi$")
    ax2.set_xlabel("z")
    fig.savefig(outdir / "profile.png")
    plt.close(fig)
    print(f"wrote {outdir}")
    return 0


def _run_engine_command(args, engines):
    config = _config_from_args(args, engines)
    outdir = _output_root(args) / config.name
    result = run_scenario(config, outdir, stop_after=args.stop_after)
    print(f"wrote {outdir} (status: {result.manifest['status']})")
    if result.audit_failures:
        _fail("conservation audit failed", {"failures": result.audit_failures})
    return 0


def cmd_meanfield(args):
    return _run_engine_command(args, ["meanfield"])


def cmd_quantum(args):
    engines = ["meanfield", args.engine] if args.with_meanfield else [args.engine]
    return _run_engine_command(args, engines)


def cmd_compare(args):
    times_a, fields_a = io.read_trajectory_csv(args.a)
    times_b, fields_b = io.read_trajectory_csv(args.b)
    quantity_field = {"density": "rho", "condensate": "rho_s"}[args.quantity]
    a = fields_a[quantity_field][-1]
    b = fields_b[quantity_field][-1]
    if args.mode == "quantum-vs-mf":
        res = analysis.delta_quantum_vs_mf(a, b, quantity=args.quantity, time=times_a[-1])
    else:
        if args.background is None:
            _fail("continuum-vs-mf comparison needs --background")
        res = analysis.delta_continuum_vs_mf(
            a, b, args.background, quantity=args.quantity, time=times_a[-1]
        )
    print(json.dumps({"mode": args.mode, "quantity": res.quantity,
                      "time": res.time, "value": res.value}))
    return 0


def cmd_scan(args):
    if args.config:
        template = ScenarioConfig.from_json(Path(args.config).read_text())
    else:
        template = _config_from_args(args, ["meanfield", "quantum-mps"])
    vjs = [float(x) for x in args.vj_grid.split(",") if x]
    vbars = [float(x) for x in args.vbar_grid.split(",") if x]
    outdir = _output_root(args) / (args.name or f"scan-{template.name}")
    outdir.mkdir(parents=True, exist_ok=True)
    table = outdir / "scan.csv"
    if table.exists():
        table.unlink()
    fieldnames = [
        "coupling_ratio", "vbar", "status", "error",
        "delta_continuum_density", "delta_rho_density", "delta_rho_condensate",
        "entropy_peak", "discarded_weight", "wallclock_seconds",
    ]

    def persist(point):
        row = {k: point.row().get(k, "") for k in fieldnames}
        io.append_table_row(table, row, fieldnames)

    points = analysis.stability_scan(
        template, vjs, vbars, workers=args.workers, on_point=persist
    )
    io.write_json(
        outdir / "scan.json",
        {
            "template": template.to_dict(),
            "template_hash": template.config_hash(),
            "grid": {"coupling_ratio": vjs, "vbar": vbars},
            "n_failed": sum(1 for p in points if p.status != "ok"),
        },
    )
    figures.scan_figure(outdir / "scan.png", points)
    print(f"wrote {outdir} ({len(points)} points)")
    return 0


def cmd_preset(args):
    outroot = _output_root(args) / args.figure
    if args.figure == "fig6":
        rows = ground_state_study(12, 0.95, (0.1, 0.25, 0.45), outroot)
        print(f"wrote {outroot} ({len(rows)} sectors)")
        return 0
    failures = []
    for config in preset_configs(args.figure):
        if args.list:
            print(config.name)
            continue
        result = run_scenario(config, outroot / config.name)
        print(f"wrote {outroot / config.name} (status: {result.manifest['status']})")
        failures.extend(f"{config.name}: {f}" for f in result.audit_failures)
    if failures:
        _fail("conservation audit failed", {"failures": failures})
    return 0


def cmd_resume(args):
    rundir = Path(args.rundir)
    result = resume_run(rundir)
    print(f"resumed {rundir} (status: {result.manifest['status']})")
    if result.audit_failures:
        _fail("conservation audit failed", {"failures": result.audit_failures})
    return 0


def _fail(message, detail=None):
    diag = {"error": message}
    if detail:
        diag.update(detail)
    print(json.dumps(diag), file=sys.stderr)
    raise SystemExit(2)


def build_parser():
    p = argparse.ArgumentParser(
        prog="solitonlab",
        description="Lattice solitons of hard-core bosons: continuum, mean-field, and quantum dynamics.",
    )
    p.add_argument("--version", action="version", version=f"solitonlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("continuum", help="tabulate the analytic soliton profile")
    _add_lattice_flags(pc)
    pc.add_argument("--vbar", type=float, default=0.0)
    pc.add_argument("--branch", choices=("bright", "dark"), default="bright")
    pc.add_argument("--center", type=float, default=None)
    pc.add_argument("--outdir", type=str, default=None)
    pc.add_argument("--name", type=str, default=None)
    pc.set_defaults(func=cmd_continuum)

    pm = sub.add_parser("meanfield", help="run the mean-field engine")
    _add_lattice_flags(pm)
    _add_state_flags(pm)
    _add_run_flags(pm)
    pm.add_argument("--outdir", type=str, default=None)
    pm.set_defaults(func=cmd_meanfield)

    pq = sub.add_parser("quantum", help="run a quantum engine (MPS or exact)")
    _add_lattice_flags(pq)
    _add_state_flags(pq)
    _add_run_flags(pq)
    pq.add_argument("--engine", choices=("quantum-mps", "quantum-exact"),
                    default="quantum-mps")
    pq.add_argument("--with-meanfield", action="store_true",
                    help="also run the mean-field reference")
    pq.add_argument("--outdir", type=str, default=None)
    pq.set_defaults(func=cmd_quantum)

    pcmp = sub.add_parser("compare", help="discrepancy between two trajectory CSVs")
    pcmp.add_argument("--a", required=True, help="numerator-side trajectory CSV")
    pcmp.add_argument("--b", required=True, help="reference trajectory CSV")
    pcmp.add_argument("--mode", choices=("quantum-vs-mf", "continuum-vs-mf"),
                      default="quantum-vs-mf")
    pcmp.add_argument("--quantity", choices=("density", "condensate"), default="density")
    pcmp.add_argument("--background", type=float, default=None)
    pcmp.set_defaults(func=cmd_compare)

    ps = sub.add_parser("scan", help="stability scan over (V/J, vbar)")
    _add_lattice_flags(ps)
    _add_state_flags(ps)
    _add_run_flags(ps)
    ps.add_argument("--vj-grid", type=str, default="0.9,0.925,0.95")
    ps.add_argument("--vbar-grid", type=str, default="0")
    ps.add_argument("--workers", type=int, default=None,
                    help="parallel scan points (default: SOLITONLAB_WORKERS)")
    ps.add_argument("--outdir", type=str, default=None)
    ps.set_defaults(func=cmd_scan)

    pp = sub.add_parser("preset", help="run a paper-figure preset pipeline")
    pp.add_argument("figure", choices=PRESET_NAMES)
    pp.add_argument("--list", action="store_true", help="list scenarios, do not run")
    pp.add_argument("--outdir", type=str, default=None)
    pp.set_defaults(func=cmd_preset)

    pr = sub.add_parser("resume", help="continue an interrupted run directory")
    pr.add_argument("rundir")
    pr.set_defaults(func=cmd_resume)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SolitonLabError as exc:
        _fail(f"{type(exc).__name__}: {exc}")
    except SystemExit:
        raise
    except Exception as exc:  # structured diagnostics for anything unexpected
        _fail(f"unhandled {type(exc).__name__}: {exc}")


if __name__ == "__main__":
    raise SystemExit(main())
