"""Deterministic file emission: trajectory CSVs, tables, sidecars, manifests.

Trajectory CSVs carry the fixed column contract

    t, site, rho, rho_s, phase, entropy_bond, corr_nn

with times in units 1/J.  Bond quantities are stored on the row of their
left site; the last site's bond columns are zero.  Floats are written with
repr-faithful precision so identical runs yield identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .records import ObservableRecord, Trajectory

TRAJECTORY_HEADER = ["t", "site", "rho", "rho_s", "phase", "entropy_bond", "corr_nn"]


def fmt(x):
    return format(float(x), ".17g")


def _record_rows(rec: ObservableRecord):
    L = rec.n_sites
    for j in range(L):
        eb = rec.entropy[j] if j < L - 1 else 0.0
        cn = rec.corr_nn[j] if j < L - 1 else 0.0
        yield [fmt(rec.t), str(j), fmt(rec.rho[j]), fmt(rec.rho_s[j]),
               fmt(rec.phase[j]), fmt(eb), fmt(cn)]


def write_trajectory_csv(path, trajectory: Trajectory):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_HEADER)
        for rec in trajectory:
            w.writerows(_record_rows(rec))


class TrajectoryWriter:
    """Streaming trajectory writer; append mode supports resumed runs."""

    def __init__(self, path, append=False):
        self.path = Path(path)
        mode = "a" if append and self.path.exists() else "w"
        self._fh = open(self.path, mode, newline="")
        self._w = csv.writer(self._fh)
        if mode == "w":
            self._w.writerow(TRAJECTORY_HEADER)

    def write_record(self, rec: ObservableRecord):
        self._w.writerows(_record_rows(rec))
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_trajectory_csv(path):
    """Read a trajectory CSV back into per-time arrays.

    Returns (times, fields) where fields maps column name to a
    (n_times x L) array; bond columns keep their zero-padded last site.
    """
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != TRAJECTORY_HEADER:
            raise ValueError(f"unexpected trajectory header: {header}")
        rows = [[float(x) for x in row] for row in r]
    data = np.asarray(rows)
    if data.size == 0:
        raise ValueError(f"empty trajectory file: {path}")
    times = np.unique(data[:, 0])
    L = int(data[:, 1].max()) + 1
    if data.shape[0] != times.size * L:
        raise ValueError("trajectory rows do not form a full (time x site) grid")
    fields = {}
    for k, name in enumerate(TRAJECTORY_HEADER[2:], start=2):
        fields[name] = data[:, k].reshape(times.size, L)
    return times, fields


def write_table_csv(path, rows, fieldnames):
    """CSV of dict rows; floats written deterministically."""
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames)
        w.writeheader()
        for row in rows:
            w.writerow(
                {k: fmt(v) if isinstance(v, float) else v for k, v in row.items()}
            )


def append_table_row(path, row, fieldnames):
    path = Path(path)
    fresh = not path.exists()
    with open(path, "a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames)
        if fresh:
            w.writeheader()
        w.writerow({k: fmt(v) if isinstance(v, float) else v for k, v in row.items()})
        fh.flush()


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def hash_tree(outdir, names):
    """Content hashes of the named files in a run directory."""
    return {name: sha256_file(Path(outdir) / name) for name in sorted(names)}
