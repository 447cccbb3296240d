"""Spin operators, bond Hamiltonians, and the second-order Trotter schedule.

The chain Hamiltonian is

    H = - sum_j [ J S_j . S_{j+1} - g S^z_j S^z_{j+1} ] - g sum_j S^z_j,
    g = J - V,

split into two-site bond terms.  The on-site field is shared half/half
between the two bonds touching an interior site; the end sites carry full
weight in their single bond, so the bond terms sum to H exactly (checked
against a dense assembly in the tests).  Every gate exp(-i h_b tau) is
unitary and commutes with the total S^z of its bond.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from ..model import LatticeParams

ID2 = np.eye(2, dtype=complex)
SZ = np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex)
SP = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SM = SP.T.conj()
SX = 0.5 * (SP + SM)
SY = -0.5j * (SP - SM)

# sum over bonds of this 4x4 gives the XXZ part of H
SDOTS = np.kron(SX, SX) + np.kron(SY, SY) + np.kron(SZ, SZ)


def field_weights(L, bond):
    """(left, right) shares of the on-site field carried by this bond."""
    wl = 1.0 if bond == 0 else 0.5
    wr = 1.0 if bond == L - 2 else 0.5
    return wl, wr


def bond_hamiltonian(params: LatticeParams, bond):
    """4x4 two-site term h_b; sum_b h_b equals the full Hamiltonian."""
    if not 0 <= bond <= params.L - 2:
        raise ValueError(f"bond {bond} outside open chain of {params.L} sites")
    g = params.g
    wl, wr = field_weights(params.L, bond)
    h = -params.J * SDOTS + g * np.kron(SZ, SZ)
    h -= g * (wl * np.kron(SZ, ID2) + wr * np.kron(ID2, SZ))
    return h


def full_hamiltonian_dense(params: LatticeParams):
    """Dense 2^L x 2^L Hamiltonian, for small-L assembly checks and oracles."""
    L = params.L
    dim = 2**L
    H = np.zeros((dim, dim), dtype=complex)

    def embed(op, site):
        mats = [ID2] * L
        mats[site] = op
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out

    for j in range(L - 1):
        for a, b in ((SX, SX), (SY, SY), (SZ, SZ)):
            H += -params.J * embed(a, j) @ embed(b, j + 1)
        H += params.g * embed(SZ, j) @ embed(SZ, j + 1)
    for j in range(L):
        H += -params.g * embed(SZ, j)
    return H


def gate_from_bond(h, tau):
    """Two-site gate exp(-i h tau), reshaped to (s', t', s, t)."""
    return expm(-1j * tau * h).reshape(2, 2, 2, 2)


def trotter_gates(params: LatticeParams, dt):
    """Second-order even/odd Trotter schedule for one time step dt.

    Returns an ordered list of sweeps [(bonds, gates), ...]: even bonds at
    dt/2, odd bonds at dt, even bonds at dt/2.  Gates within a sweep act on
    disjoint bonds.
    """
    L = params.L
    even = list(range(0, L - 1, 2))
    odd = list(range(1, L - 1, 2))
    even_half = [gate_from_bond(bond_hamiltonian(params, b), 0.5 * dt) for b in even]
    odd_full = [gate_from_bond(bond_hamiltonian(params, b), dt) for b in odd]
    return [(even, even_half), (odd, odd_full), (even, even_half)]
