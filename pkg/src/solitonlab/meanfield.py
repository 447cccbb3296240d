"""Mean-field dynamics of the chain in canonical variables (delta_j, phi_j).

delta_j = 1 - 2 rho_j is the population imbalance conjugate to the phase
phi_j.  The equations of motion on the open chain are

    ddelta_j/dt = (J/2) sum_{i=+-1} sqrt((1-delta_j^2)(1-delta_{j+i}^2))
                        sin(phi_{j+i} - phi_j)
    dphi_j/dt   = (J/2) delta_j/sqrt(1-delta_j^2)
                        sum_{i=+-1} sqrt(1-delta_{j+i}^2) cos(phi_{j+i}-phi_j)
                  - (V/2) sum_{i=+-1} delta_{j+i} - (J - V) delta_bg

with one-sided neighbor sums at the chain ends.  The constant delta_bg is
the background imbalance 1 - 2 rho0; with that choice the homogeneous state
is an exact fixed point in the bulk.  sqrt(1-delta^2) is floored at 1e-15
inside the phase velocity only: a fully occupied or empty site has a gauge
phase, while ddelta/dt vanishes there naturally.

Total imbalance sum_j delta_j is conserved exactly by the flow (the bond
terms cancel pairwise), and the coherent-state energy is conserved as well;
both are auditable per sample.  Integration is fixed-step classical RK4
(default dt = 0.01, finer than the quantum Trotter step; mean-field cost is
negligible).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import IntegratorError
from .model import LatticeParams, wrap_phase
from .records import ObservableRecord, Trajectory

SQRT_FLOOR = 1e-15
DELTA_EXCURSION_TOL = 1e-9
DEFAULT_DT = 0.01


@dataclass
class MeanFieldState:
    """Canonical pairs of all sites at one instant, plus run constants."""

    t: float
    delta: np.ndarray
    phi: np.ndarray
    params: LatticeParams
    delta_bg: float

    def __post_init__(self):
        self.delta = np.asarray(self.delta, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        if self.delta.shape != (self.params.L,) or self.phi.shape != (self.params.L,):
            raise ValueError("delta/phi length must match the lattice size")
        if np.max(np.abs(self.delta)) > 1.0 + DELTA_EXCURSION_TOL:
            raise ValueError(f"|delta| exceeds 1: {np.max(np.abs(self.delta))}")
        self.delta = np.clip(self.delta, -1.0, 1.0)

    @property
    def rho(self):
        return 0.5 * (1.0 - self.delta)

    @property
    def rho_s(self):
        r = self.rho
        return r * (1.0 - r)


def from_density_phase(params, rho, phi, rho0) -> MeanFieldState:
    """Initial state from a density/phase profile riding on background rho0."""
    rho = np.asarray(rho, dtype=float)
    return MeanFieldState(
        t=0.0,
        delta=1.0 - 2.0 * rho,
        phi=wrap_phase(phi),
        params=params,
        delta_bg=1.0 - 2.0 * rho0,
    )


def _neighbor_terms(delta, phi):
    """Per-site one-sided sums of sqrt(1-d^2) {sin,cos}(phi_nbr - phi) and delta_nbr."""
    s = np.sqrt(np.clip(1.0 - delta * delta, 0.0, None))
    sin_sum = np.zeros_like(delta)
    cos_sum = np.zeros_like(delta)
    dsum = np.zeros_like(delta)
    dphi_right = phi[1:] - phi[:-1]  # phi_{j+1} - phi_j at the bond
    sin_b = np.sin(dphi_right)
    cos_b = np.cos(dphi_right)
    sin_sum[:-1] += s[1:] * sin_b
    sin_sum[1:] += -s[:-1] * sin_b
    cos_sum[:-1] += s[1:] * cos_b
    cos_sum[1:] += s[:-1] * cos_b
    dsum[:-1] += delta[1:]
    dsum[1:] += delta[:-1]
    return s, sin_sum, cos_sum, dsum


def eom_rhs(state: MeanFieldState):
    """Time derivatives (ddelta, dphi) of all sites."""
    return _rhs_arrays(
        state.delta, state.phi, state.params.J, state.params.V, state.delta_bg
    )


def _rhs_arrays(delta, phi, J, V, delta_bg):
    s, sin_sum, cos_sum, dsum = _neighbor_terms(delta, phi)
    ddelta = 0.5 * J * s * sin_sum
    s_floored = np.maximum(s, SQRT_FLOOR)
    dphi = (
        0.5 * J * (delta / s_floored) * cos_sum
        - 0.5 * V * dsum
        - (J - V) * delta_bg
    )
    return ddelta, dphi


def step_rk4(state: MeanFieldState, dt) -> MeanFieldState:
    """One classical fixed-step RK4 advance; phases re-wrapped after the step."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt == 0.0:
        return replace(state)
    J, V, bg = state.params.J, state.params.V, state.delta_bg
    d0, p0 = state.delta, state.phi
    k1d, k1p = _rhs_arrays(d0, p0, J, V, bg)
    k2d, k2p = _rhs_arrays(d0 + 0.5 * dt * k1d, p0 + 0.5 * dt * k1p, J, V, bg)
    k3d, k3p = _rhs_arrays(d0 + 0.5 * dt * k2d, p0 + 0.5 * dt * k2p, J, V, bg)
    k4d, k4p = _rhs_arrays(d0 + dt * k3d, p0 + dt * k3p, J, V, bg)
    delta = d0 + (dt / 6.0) * (k1d + 2.0 * (k2d + k3d) + k4d)
    phi = p0 + (dt / 6.0) * (k1p + 2.0 * (k2p + k3p) + k4p)
    if np.max(np.abs(delta)) > 1.0 + DELTA_EXCURSION_TOL:
        raise IntegratorError(
            f"step rejected at t={state.t}: |delta| reached "
            f"{np.max(np.abs(delta))} (> 1 + {DELTA_EXCURSION_TOL})"
        )
    return MeanFieldState(
        t=state.t + dt,
        delta=np.clip(delta, -1.0, 1.0),
        phi=wrap_phase(phi),
        params=state.params,
        delta_bg=bg,
    )


def energy(state: MeanFieldState):
    """Coherent-state energy of the spin chain for this (delta, phi) profile.

    E = -sum_bonds [ (J/4) sqrt((1-d_j^2)(1-d_{j+1}^2)) cos(phi_{j+1}-phi_j)
                     + (V/4) d_j d_{j+1} ] - (J-V)/2 sum_j d_j.
    """
    d, p = state.delta, state.phi
    J, V = state.params.J, state.params.V
    s = np.sqrt(np.clip(1.0 - d * d, 0.0, None))
    bond = 0.25 * J * s[:-1] * s[1:] * np.cos(p[1:] - p[:-1]) + 0.25 * V * d[:-1] * d[1:]
    return float(-np.sum(bond) - 0.5 * (J - V) * np.sum(d))


def measure(state: MeanFieldState) -> ObservableRecord:
    L = state.params.L
    return ObservableRecord(
        t=state.t,
        rho=state.rho,
        rho_s=state.rho_s,
        phase=state.phi.copy(),
        entropy=np.zeros(L - 1),
        corr_nn=np.zeros(L - 1),
        norm=1.0,
        energy=energy(state),
        total_sz=float(0.5 * np.sum(state.delta)),
    )


def evolve(state: MeanFieldState, duration, dt=DEFAULT_DT, sample_every=None) -> Trajectory:
    """Advance by ``duration`` (units 1/J), sampling every ``sample_every`` time.

    Returns the sampled trajectory; the final record is always at the end
    time.  ``sample_every`` defaults to 25 steps.
    """
    if duration < 0:
        raise ValueError("duration must be non-negative")
    if dt <= 0 or dt > 0.05:
        raise ValueError("mean-field step must satisfy 0 < dt <= 0.05")
    n_steps = int(round(duration / dt))
    if abs(n_steps * dt - duration) > 1e-9:
        raise ValueError(f"duration {duration} is not a multiple of dt {dt}")
    stride = max(1, int(round((sample_every or 25 * dt) / dt)))
    traj = Trajectory(engine="meanfield", metadata={"dt": dt, "duration": duration})
    traj.append(measure(state))
    for step in range(1, n_steps + 1):
        state = step_rk4(state, dt)
        if step % stride == 0 or step == n_steps:
            traj.append(measure(state))
    return traj
