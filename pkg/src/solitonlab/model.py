"""Chain parameters, the spin/boson dictionary, and Bloch product states.

The hard-core boson chain with hopping J/2 and nearest-neighbor attraction V
maps onto a spin-1/2 chain: occupied site = spin down, empty site = spin up,
so the local density is rho_j = 1/2 - <S^z_j>.  The effective longitudinal
field has magnitude g = J - V and is always recomputed from (J, V), never
stored.

Product states are parametrized per site by Bloch angles (theta, phi) with

    rho_j   = (1 - cos theta_j)/2,
    <S^+_j> = sqrt(rho_j (1 - rho_j)) e^{i phi_j},
    <S^z_j> = 1/2 - rho_j.

By construction every site satisfies <S^x>^2 + <S^y>^2 + <S^z>^2 = 1/4.
Building the product state directly from (rho, phi) is exactly equivalent to
relaxing into an aligned strong external field along the same local Bloch
vectors (the field-preparation route in the literature); we skip the
redundant ground-state solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

RHO_CLAMP_TOL = 1e-12


def wrap_phase(phi):
    """Wrap angles to the half-open interval (-pi, pi]."""
    phi = np.asarray(phi, dtype=float)
    wrapped = np.pi - np.mod(np.pi - phi, 2.0 * np.pi)
    return wrapped if wrapped.ndim else float(wrapped)


@dataclass(frozen=True)
class LatticeParams:
    """Open chain of L sites with exchange J and nearest-neighbor coupling V."""

    L: int
    J: float = 1.0
    V: float = 0.0
    boundary: str = field(default="open")

    def __post_init__(self):
        if not isinstance(self.L, (int, np.integer)) or self.L < 4:
            raise ValueError(f"need at least 4 sites, got L={self.L}")
        if not np.isfinite(self.J) or not np.isfinite(self.V):
            raise ValueError("J and V must be finite")
        if self.J <= 0:
            raise ValueError(f"J must be positive, got {self.J}")
        if not 0 <= self.V / self.J < 1:
            raise ValueError(f"supported regime is 0 <= V/J < 1, got {self.V / self.J}")
        if self.boundary != "open":
            raise ValueError("only open boundaries are supported")

    @property
    def g(self):
        """Field magnitude g = J - V (derived, never stored)."""
        return self.J - self.V

    @property
    def coupling_ratio(self):
        return self.V / self.J


def make_params(L, J=1.0, V=0.0) -> LatticeParams:
    return LatticeParams(L=int(L), J=float(J), V=float(V))


@dataclass
class BlochProduct:
    """Site-local Bloch angles defining a spin-coherent product state."""

    theta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.phi = wrap_phase(np.asarray(self.phi, dtype=float))
        if self.theta.shape != self.phi.shape or self.theta.ndim != 1:
            raise ValueError("theta and phi must be 1d arrays of equal length")
        if np.any(self.theta < -1e-15) or np.any(self.theta > np.pi + 1e-15):
            raise ValueError("theta outside [0, pi]")

    def __len__(self):
        return self.theta.size

    @property
    def rho(self):
        """Particle density rho_j = (1 - cos theta_j)/2 = sin^2(theta_j/2)."""
        return 0.5 * (1.0 - np.cos(self.theta))

    @property
    def delta(self):
        """Canonical population imbalance delta_j = cos theta_j = 1 - 2 rho_j."""
        return np.cos(self.theta)

    @property
    def rho_s(self):
        """Condensate density rho^s_j = rho_j (1 - rho_j) = |<S^+_j>|^2."""
        r = self.rho
        return r * (1.0 - r)

    def spin_expectations(self):
        """Per-site (<S^x>, <S^y>, <S^z>) of the coherent product state."""
        sperp = 0.5 * np.sin(self.theta)
        return (
            sperp * np.cos(self.phi),
            sperp * np.sin(self.phi),
            0.5 * np.cos(self.theta),
        )

    @property
    def splus(self):
        """Order parameter <S^+_j> = sqrt(rho^s_j) e^{i phi_j}."""
        return np.sqrt(self.rho_s) * np.exp(1j * self.phi)

    def site_vectors(self):
        """Local 2-spinors [cos(theta/2), e^{i phi} sin(theta/2)] in the (up, down) basis."""
        up = np.cos(0.5 * self.theta)
        down = np.exp(1j * self.phi) * np.sin(0.5 * self.theta)
        return np.stack([up, down], axis=1)


def bloch_from_density_phase(rho, phi) -> BlochProduct:
    """Build the coherent product state with prescribed densities and phases.

    Densities outside [0, 1] by more than ``RHO_CLAMP_TOL`` are rejected;
    within that tolerance they are clamped (the arccos would otherwise NaN).
    """
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if rho.shape != phi.shape:
        raise ValueError("rho and phi must have the same shape")
    if np.any(rho < -RHO_CLAMP_TOL) or np.any(rho > 1.0 + RHO_CLAMP_TOL):
        bad = rho[(rho < -RHO_CLAMP_TOL) | (rho > 1.0 + RHO_CLAMP_TOL)]
        raise ValueError(f"density outside [0,1]: {bad[:3]}")
    rho = np.clip(rho, 0.0, 1.0)
    theta = np.arccos(1.0 - 2.0 * rho)
    return BlochProduct(theta=theta, phi=phi)


def gaussian_profile(L, rho0, amplitude, width, center=None, phase_jump=False):
    """Gaussian density bump/notch with an optional pi phase step at the center.

    rho_j = rho0 + A exp(-(j - x0)^2 / 2 sigma^2).  Positive A is a density
    elevation, negative A a notch.  With ``phase_jump`` the phase is 0 left of
    the center and pi from the center on; otherwise it is flat.
    """
    L = int(L)
    if width <= 0:
        raise ValueError("width must be positive")
    if center is None:
        center = 0.5 * (L - 1)
    j = np.arange(L, dtype=float)
    rho = rho0 + amplitude * np.exp(-((j - center) ** 2) / (2.0 * width**2))
    if rho.min() < -RHO_CLAMP_TOL or rho.max() > 1.0 + RHO_CLAMP_TOL:
        raise ValueError(
            f"profile leaves [0,1]: min={rho.min():.3g}, max={rho.max():.3g}"
        )
    rho = np.clip(rho, 0.0, 1.0)
    phi = np.where(j >= center, np.pi, 0.0) if phase_jump else np.zeros(L)
    return rho, phi
