"""Comparison metrics and derived diagnostics over stored trajectories.

Two relative L2 discrepancies are used throughout; they differ only in the
denominator and are easy to confuse, so both are spelled out:

* continuum vs lattice mean field (background-subtracted denominator):

      Delta = ||rho_cont - rho_mf|| / ||rho_cont - rho0||

* quantum vs lattice mean field (raw denominator):

      delta = ||rho_q - rho_mf|| / ||rho_mf||

Both are site-relabeling invariant and scale-free, and both shrink linearly
when the non-reference input is mixed linearly toward the reference.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .records import Trajectory


@dataclass
class DiscrepancyResult:
    quantity: str
    value: float
    time: float = 0.0
    scenario: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.value < 0.0:
            raise ValueError("discrepancy is non-negative by construction")


def _check_pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("profiles must be 1d arrays of equal length")
    return a, b


def delta_continuum_vs_mf(
    continuum, meanfield, background, quantity="density", time=0.0, scenario=None
) -> DiscrepancyResult:
    """Background-subtracted relative L2 difference, continuum as reference."""
    cont, mf = _check_pair(continuum, meanfield)
    den = np.sqrt(np.sum((cont - background) ** 2))
    if den == 0.0:
        raise ZeroDivisionError(
            "continuum profile equals the background everywhere"
        )
    value = float(np.sqrt(np.sum((cont - mf) ** 2)) / den)
    return DiscrepancyResult(quantity, value, time, scenario or {})


def delta_quantum_vs_mf(
    quantum, meanfield, quantity="density", time=0.0, scenario=None
) -> DiscrepancyResult:
    """Raw-denominator relative L2 difference, mean field as reference."""
    q, mf = _check_pair(quantum, meanfield)
    den = np.sqrt(np.sum(mf**2))
    if den == 0.0:
        raise ZeroDivisionError("reference profile vanishes everywhere")
    value = float(np.sqrt(np.sum((q - mf) ** 2)) / den)
    return DiscrepancyResult(quantity, value, time, scenario or {})


def max_entropy_bound(L, M):
    """Entropy of a maximally entangled M|(L-M) bipartition: M ln 2."""
    if not (1 <= M <= L - 1):
        raise ValueError(f"bipartition M={M} invalid for L={L}")
    if M > L - M:
        raise ValueError(f"convention requires M <= L - M, got M={M}, L={L}")
    return M * np.log(2.0)


@dataclass
class SpacetimeMap:
    """Dense (time x space) matrix of one observable, with axis metadata."""

    field: str
    matrix: np.ndarray
    times: np.ndarray
    positions: np.ndarray
    axis: str  # "site" or "bond"


def spacetime_map(trajectory: Trajectory, field_name) -> SpacetimeMap:
    """Stack a per-site or per-bond observable into a contourable matrix."""
    allowed = {"rho": "site", "rho_s": "site", "phase": "site",
               "entropy": "bond", "corr_nn": "bond"}
    if field_name not in allowed:
        raise ValueError(f"unknown field {field_name!r}; pick from {sorted(allowed)}")
    times = trajectory.times
    if times.size > 1:
        dt = np.diff(times)
        if np.max(np.abs(dt - dt[0])) > 1e-9 * max(abs(dt[0]), 1.0):
            raise ValueError("spacetime map requires uniformly sampled trajectory")
    mat = trajectory.field_matrix(field_name)
    axis = allowed[field_name]
    positions = np.arange(mat.shape[1], dtype=float)
    if axis == "bond":
        positions += 0.5  # bond b sits between sites b and b+1
    return SpacetimeMap(field_name, mat, times, positions, axis)


@dataclass
class ScanPoint:
    coupling_ratio: float
    vbar: float
    status: str = "ok"
    error: str = ""
    results: dict = field(default_factory=dict)

    def row(self):
        out = {
            "coupling_ratio": self.coupling_ratio,
            "vbar": self.vbar,
            "status": self.status,
            "error": self.error,
        }
        out.update(self.results)
        return out


def _worker_budget():
    return max(1, int(os.environ.get("SOLITONLAB_WORKERS", "1")))


def _scan_point(args):
    template, vj, vbar = args
    from . import pipeline  # deferred: pipeline sits above analysis

    try:
        results = pipeline.run_scan_point(template, vj, vbar)
        return ScanPoint(vj, vbar, results=results)
    except Exception as exc:  # per-point failures are recorded, scan continues
        return ScanPoint(vj, vbar, status="failed", error=f"{type(exc).__name__}: {exc}")


def stability_scan(template, coupling_ratios, vbars, workers=None, on_point=None):
    """Full-pipeline discrepancies over a (V/J, vbar) grid.

    ``template`` is a ScenarioConfig whose coupling and speed are replaced
    per grid point.  Failures are recorded per point and the scan continues.
    ``on_point`` (if given) is called with each finished ScanPoint, in grid
    order, so partial results can be persisted incrementally.
    """
    grid = [(template, vj, vbar) for vj in coupling_ratios for vbar in vbars]
    if not grid:
        return []
    workers = workers if workers is not None else _worker_budget()
    points = []

    def emit(point):
        points.append(point)
        if on_point is not None:
            on_point(point)

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for p in pool.map(_scan_point, grid):
                emit(p)
    else:
        for g in grid:
            emit(_scan_point(g))
    return points
