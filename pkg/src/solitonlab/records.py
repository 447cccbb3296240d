"""Time-stamped observable records shared by all evolution engines."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ObservableRecord:
    """Per-site observables plus global totals at one instant.

    ``entropy`` and ``corr_nn`` live on bonds (length L-1); mean-field
    product states carry exact zeros there.  ``discarded_weight`` is the
    cumulative truncation loss of an MPS run (zero for the other engines).
    """

    t: float
    rho: np.ndarray
    rho_s: np.ndarray
    phase: np.ndarray
    entropy: np.ndarray
    corr_nn: np.ndarray
    norm: float
    energy: float
    total_sz: float
    discarded_weight: float = 0.0

    @property
    def n_sites(self):
        return self.rho.size


@dataclass
class Trajectory:
    """Ordered records from one evolution, with run-level metadata."""

    records: list[ObservableRecord] = field(default_factory=list)
    engine: str = ""
    metadata: dict = field(default_factory=dict)

    def append(self, rec: ObservableRecord):
        self.records.append(rec)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def times(self):
        return np.array([r.t for r in self.records])

    def field_matrix(self, name):
        """Stack one per-site (or per-bond) field into a (time x space) matrix."""
        return np.array([getattr(r, name) for r in self.records])

    def at_time(self, t, atol=1e-9) -> ObservableRecord:
        times = self.times
        i = int(np.argmin(np.abs(times - t)))
        if abs(times[i] - t) > atol:
            raise KeyError(f"no record at t={t} (closest: {times[i]})")
        return self.records[i]

    def final(self) -> ObservableRecord:
        return self.records[-1]

    def conservation_audit(self):
        """Relative drifts of the conserved totals over the whole run."""
        first = self.records[0]
        rel = lambda now, ref: abs(now - ref) / max(abs(ref), 1.0)
        return {
            "norm_drift": max(abs(r.norm - first.norm) for r in self.records),
            "energy_drift": max(
                abs(r.energy - first.energy) / max(abs(first.energy), 1e-300)
                for r in self.records
            ),
            "total_sz_drift": max(rel(r.total_sz, first.total_sz) for r in self.records),
            "discarded_weight": self.records[-1].discarded_weight,
        }
