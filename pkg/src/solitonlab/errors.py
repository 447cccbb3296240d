"""Exception types shared across the package."""


class SolitonLabError(Exception):
    """Base class for all package-specific failures."""


class SingularWidthError(SolitonLabError, ValueError):
    """Soliton width formula hit a vanishing denominator (rho0=1/2 and V/J=0)."""


class PhaseDomainError(SolitonLabError, ValueError):
    """Phase-jump formula evaluated outside its domain."""


class PhaseConsistencyError(SolitonLabError, RuntimeError):
    """Integrated phase profile disagrees with the analytic total jump."""


class IntegratorError(SolitonLabError, RuntimeError):
    """Mean-field RK4 step produced an unphysical state."""


class TruncationBudgetError(SolitonLabError, RuntimeError):
    """MPS evolution can no longer certify its accuracy budget."""


class KrylovError(SolitonLabError, RuntimeError):
    """Krylov propagator failed to converge or broke down."""


class EigensolverError(SolitonLabError, RuntimeError):
    """Sector ground-state search did not converge."""


class CheckpointError(SolitonLabError, RuntimeError):
    """Checkpoint file is missing, corrupt, or incompatible."""


class BoundaryHorizonError(SolitonLabError, ValueError):
    """Requested evolution time exceeds the boundary-safety horizon."""


class ScenarioError(SolitonLabError, ValueError):
    """Scenario configuration is invalid or inconsistent."""
