"""Dense statevector engine: Lanczos propagator and sector ground states.

Serves as the small-chain oracle for the MPS engine.  Site 0 is the most
significant bit of the basis index; bit value 1 means spin down (site
occupied), so the amplitude layout matches the Kronecker order of
``gates.full_hamiltonian_dense``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from ..errors import EigensolverError, KrylovError
from ..model import BlochProduct, LatticeParams
from ..records import ObservableRecord, Trajectory

MAX_DENSE_SITES = 14
MAX_SECTOR_SITES = 16


@dataclass
class DenseState:
    """Full 2^L amplitude vector at one instant."""

    psi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=complex)
        nrm = np.linalg.norm(self.psi)
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"state norm {nrm} deviates from 1 beyond 1e-12")

    @property
    def L(self):
        n = int(round(np.log2(self.psi.size)))
        if 2**n != self.psi.size:
            raise ValueError("amplitude vector length is not a power of two")
        return n


def dense_from_bloch(bloch: BlochProduct) -> DenseState:
    """Kronecker product of the site spinors (site 0 most significant)."""
    if len(bloch) > MAX_DENSE_SITES:
        raise ValueError(f"dense engine limited to L <= {MAX_DENSE_SITES}")
    psi = np.array([1.0 + 0.0j])
    for vec in bloch.site_vectors():
        psi = np.kron(psi, vec)
    return DenseState(psi=psi)


def _site_bit(L, j, indices):
    return (indices >> (L - 1 - j)) & 1


def hamiltonian_sparse(params: LatticeParams):
    """Sparse CSR Hamiltonian in the full 2^L space."""
    L = params.L
    if L > MAX_DENSE_SITES:
        raise ValueError(f"dense engine limited to L <= {MAX_DENSE_SITES}")
    dim = 2**L
    idx = np.arange(dim, dtype=np.int64)
    sz = np.stack([0.5 - _site_bit(L, j, idx) for j in range(L)])

    diag = np.zeros(dim)
    for j in range(L - 1):
        diag += -params.V * sz[j] * sz[j + 1]
    diag += -params.g * sz.sum(axis=0)
    H = sp.diags(diag, format="csr", dtype=complex)

    # hopping -(J/2)(S+ S- + S- S+) on every bond
    for j in range(L - 1):
        off_l, off_r = 1 << (L - 1 - j), 1 << (L - 2 - j)
        mask = (_site_bit(L, j, idx) == 1) & (_site_bit(L, j + 1, idx) == 0)
        src = idx[mask]
        dst = src - off_l + off_r
        amp = np.full(src.size, -0.5 * params.J)
        hop = sp.csr_matrix((amp, (dst, src)), shape=(dim, dim), dtype=complex)
        H = H + hop + hop.T.conj()
    return H


def lanczos_expmv(H, psi, dt, tol=1e-12, max_dim=60):
    """exp(-i H dt) psi by Lanczos with full reorthogonalization.

    The Krylov dimension grows adaptively until the a posteriori residual
    estimate drops below ``tol``; an exactly invariant subspace (breakdown)
    terminates early with the exact result.  Raises KrylovError if
    ``max_dim`` vectors do not suffice.
    """
    nrm = np.linalg.norm(psi)
    if nrm == 0.0:
        raise KrylovError("cannot propagate the zero vector")
    dim = psi.size
    v = np.empty((max_dim + 1, dim), dtype=complex)
    v[0] = psi / nrm
    alphas, betas = [], []
    y = None
    for j in range(max_dim):
        w = H @ v[j]
        alphas.append(float(np.vdot(v[j], w).real))
        w = w - alphas[-1] * v[j]
        if j > 0:
            w = w - betas[-1] * v[j - 1]
        # full reorthogonalization keeps the basis clean at tiny extra cost
        w = w - v[: j + 1].T @ (v[: j + 1].conj() @ w)
        beta = float(np.linalg.norm(w))

        evals, evecs = eigh_tridiagonal(alphas, betas)
        y = evecs @ (np.exp(-1j * dt * evals) * evecs[0, :])
        if beta < 1e-13 * max(1.0, abs(alphas[-1])):
            break  # invariant subspace: current projection is exact
        if j >= 2 and abs(dt) * beta * abs(y[-1]) < tol:
            break
        betas.append(beta)
        v[j + 1] = w / beta
    else:
        raise KrylovError(
            f"Lanczos did not converge within {max_dim} vectors "
            f"(residual {abs(dt) * beta * abs(y[-1]):.3e})"
        )
    k = len(alphas)
    return nrm * (v[:k].T @ y)


def dense_entropy_profile(state):
    """Per-bond entanglement entropy by explicit Schmidt decomposition."""
    psi = state.psi if isinstance(state, DenseState) else np.asarray(state)
    L = int(round(np.log2(psi.size)))
    out = np.zeros(L - 1)
    for b in range(L - 1):
        mat = psi.reshape(2 ** (b + 1), -1)
        s = np.linalg.svd(mat, compute_uv=False)
        p = s * s
        p = p[p > 1e-300]
        out[b] = float(-np.sum(p * np.log(p)))
    return out


def measure_dense(state: DenseState, params: LatticeParams, H=None) -> ObservableRecord:
    psi = state.psi
    L = params.L
    dim = psi.size
    idx = np.arange(dim, dtype=np.int64)
    prob = np.abs(psi) ** 2

    rho = np.empty(L)
    splus = np.empty(L, dtype=complex)
    for j in range(L):
        bit = _site_bit(L, j, idx)
        rho[j] = float(prob[bit == 1].sum())
        down = idx[bit == 1]
        splus[j] = np.sum(np.conj(psi[down - (1 << (L - 1 - j))]) * psi[down])
    sz = 0.5 - rho

    sdots = np.empty(L - 1)
    for j in range(L - 1):
        bl = _site_bit(L, j, idx)
        br = _site_bit(L, j + 1, idx)
        szsz = float(np.sum(prob * (0.5 - bl) * (0.5 - br)))
        mask = (bl == 1) & (br == 0)
        src = idx[mask]
        dst = src - (1 << (L - 1 - j)) + (1 << (L - 2 - j))
        spsm = np.sum(np.conj(psi[dst]) * psi[src])
        sdots[j] = float(spsm.real) + szsz
    mean_prod = np.real(splus[:-1] * np.conj(splus[1:])) + sz[:-1] * sz[1:]

    if H is None:
        H = hamiltonian_sparse(params)
    return ObservableRecord(
        t=state.t,
        rho=rho,
        rho_s=np.abs(splus) ** 2,
        phase=np.angle(splus),
        entropy=dense_entropy_profile(state),
        corr_nn=sdots - mean_prod,
        norm=float(np.linalg.norm(psi)),
        energy=float(np.vdot(psi, H @ psi).real),
        total_sz=float(np.sum(sz)),
    )


def krylov_exact_evolve(
    state: DenseState, params: LatticeParams, dt, duration, measure_every=None, tol=1e-13
) -> Trajectory:
    """Exact-oracle evolution; same observable records as the MPS engine."""
    if params.L > MAX_DENSE_SITES:
        raise ValueError(f"dense engine limited to L <= {MAX_DENSE_SITES}")
    n_steps = int(round(duration / dt))
    if abs(n_steps * dt - duration) > 1e-9:
        raise ValueError(f"duration {duration} is not a multiple of dt {dt}")
    stride = max(1, int(round((measure_every or 10 * dt) / dt)))
    H = hamiltonian_sparse(params)
    traj = Trajectory(engine="quantum-exact", metadata={"dt": dt, "duration": duration})
    traj.append(measure_dense(state, params, H))
    psi = state.psi
    for step in range(1, n_steps + 1):
        psi = lanczos_expmv(H, psi, dt, tol=tol)
        state = DenseState(psi=psi, t=step * dt)
        if step % stride == 0 or step == n_steps:
            traj.append(measure_dense(state, params, H))
    return traj


def _sector_basis(L, n_down):
    """All basis indices with exactly n_down occupied sites, ascending."""
    states = []
    for occ in combinations(range(L), n_down):
        i = 0
        for j in occ:
            i |= 1 << (L - 1 - j)
        states.append(i)
    return np.array(sorted(states), dtype=np.int64)


def sector_hamiltonian(params: LatticeParams, n_down):
    """Hamiltonian restricted to the fixed-magnetization sector."""
    L = params.L
    basis = _sector_basis(L, n_down)
    pos = {int(s): k for k, s in enumerate(basis)}
    dim = basis.size

    sz = np.stack([0.5 - _site_bit(L, j, basis) for j in range(L)])
    diag = -params.g * sz.sum(axis=0)
    for j in range(L - 1):
        diag += -params.V * sz[j] * sz[j + 1]

    rows, cols, vals = [], [], []
    for k, s in enumerate(basis):
        for j in range(L - 1):
            bl = (s >> (L - 1 - j)) & 1
            br = (s >> (L - 2 - j)) & 1
            if bl == 1 and br == 0:
                target = s - (1 << (L - 1 - j)) + (1 << (L - 2 - j))
                m = pos[int(target)]
                rows.extend((m, k))
                cols.extend((k, m))
                vals.extend((-0.5 * params.J, -0.5 * params.J))
    H = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
    H = H + sp.diags(diag)
    return H.tocsr(), basis


def ground_state_reference(params: LatticeParams, n_particles):
    """Lowest state in the fixed-magnetization sector: (energy, entropy profile).

    ``n_particles`` is the number of occupied sites (down spins); the
    sector's total S^z is L/2 - n_particles.  Lanczos (ARPACK) on the
    sector matrix; tiny sectors are diagonalized densely.
    """
    L = params.L
    if L > MAX_SECTOR_SITES:
        raise ValueError(f"sector diagonalization limited to L <= {MAX_SECTOR_SITES}")
    if not 0 <= n_particles <= L:
        raise ValueError(f"filling {n_particles} outside [0, {L}]")
    H, basis = sector_hamiltonian(params, n_particles)
    dim = H.shape[0]
    if dim <= 16:
        evals, evecs = np.linalg.eigh(H.toarray())
        energy, vec = float(evals[0]), evecs[:, 0]
    else:
        try:
            evals, evecs = eigsh(H, k=1, which="SA", maxiter=5000)
        except ArpackNoConvergence as exc:
            raise EigensolverError(f"sector ground state did not converge: {exc}")
        energy, vec = float(evals[0]), evecs[:, 0]
    full = np.zeros(2**L, dtype=complex)
    full[basis] = vec
    return energy, dense_entropy_profile(full)
