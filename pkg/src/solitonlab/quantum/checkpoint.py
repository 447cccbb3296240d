"""Binary checkpoint container for MPS evolutions.

Layout: 8-byte magic, little-endian uint64 header length, UTF-8 JSON header
(lattice params, evolution config, time, step, cumulative discarded weight,
total S^z sector, tensor shapes), then the payload as raw little-endian
IEEE-754 doubles: each site tensor as complex128 (interleaved re/im), each
bond spectrum as float64.  A resumed run continues bit-identically because
the tensors are stored exactly.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from ..errors import CheckpointError
from ..model import LatticeParams
from .config import EvolutionConfig
from .gates import SZ
from .mps import MPS

MAGIC = b"SLMPS001"
FORMAT_VERSION = 1


def save_checkpoint(path, mps: MPS, params: LatticeParams, config: EvolutionConfig, extra=None):
    header = {
        "format_version": FORMAT_VERSION,
        "params": {"L": params.L, "J": params.J, "V": params.V, "boundary": params.boundary},
        "config": {
            "duration": config.duration,
            "dt": config.dt,
            "chi_max": config.chi_max,
            "trunc_tol": config.trunc_tol,
            "measure_every": config.measure_every,
            "w_budget": config.w_budget,
        },
        "time": mps.t,
        "step": int(round(mps.t / config.dt)),
        "discarded_weight": mps.discarded_weight,
        "total_sz": float(np.sum(mps.expect_site(SZ).real)),
        "shapes": [list(b.shape) for b in mps.B],
        "bond_sizes": [int(lam.size) for lam in mps.lambdas],
        "extra": extra or {},
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for b in mps.B:
            fh.write(np.ascontiguousarray(b, dtype="<c16").tobytes())
        for lam in mps.lambdas:
            fh.write(np.ascontiguousarray(lam, dtype="<f8").tobytes())


def load_checkpoint(path):
    """Read (mps, params, config, header) back; CheckpointError on any damage."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except FileNotFoundError:
        raise CheckpointError(f"checkpoint not found: {path}")
    if len(raw) < len(MAGIC) + 8 or raw[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"not a checkpoint file: {path}")
    off = len(MAGIC)
    (hlen,) = struct.unpack_from("<Q", raw, off)
    off += 8
    try:
        header = json.loads(raw[off : off + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt checkpoint header: {exc}")
    off += hlen
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {header.get('format_version')}"
        )

    params = LatticeParams(**header["params"])
    cfg = header["config"]
    config = EvolutionConfig(
        duration=cfg["duration"],
        dt=cfg["dt"],
        chi_max=cfg["chi_max"],
        trunc_tol=cfg["trunc_tol"],
        measure_every=cfg["measure_every"],
        w_budget=cfg["w_budget"],
    )
    tensors = []
    for shape in header["shapes"]:
        count = int(np.prod(shape))
        nbytes = count * 16
        if off + nbytes > len(raw):
            raise CheckpointError("checkpoint truncated in tensor payload")
        tensors.append(
            np.frombuffer(raw, dtype="<c16", count=count, offset=off)
            .reshape(shape)
            .astype(complex)
        )
        off += nbytes
    lambdas = []
    for size in header["bond_sizes"]:
        nbytes = size * 8
        if off + nbytes > len(raw):
            raise CheckpointError("checkpoint truncated in spectrum payload")
        lambdas.append(
            np.frombuffer(raw, dtype="<f8", count=size, offset=off).astype(float)
        )
        off += nbytes
    if off != len(raw):
        raise CheckpointError("checkpoint has trailing bytes")
    mps = MPS(
        tensors,
        lambdas,
        t=header["time"],
        discarded_weight=header["discarded_weight"],
    )
    return mps, params, config, header
