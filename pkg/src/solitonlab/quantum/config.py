"""Evolution-control knobs shared by the quantum engines."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class EvolutionConfig:
    """Trotter step, horizon, and truncation policy of a quantum run.

    ``trunc_tol`` caps the discarded Schmidt weight of every single gate
    application; ``chi_max`` is the hard bond-dimension cap on top of that.
    ``w_budget`` is the run-level cumulative discarded-weight target (the
    engine aborts at 100x the budget, or when the cap bites while the
    per-gate truncation still exceeds ``trunc_tol``: accuracy is then no
    longer certified).
    """

    duration: float
    dt: float = 0.05
    chi_max: int = 1000
    trunc_tol: float = 1e-10
    measure_every: float | None = None
    w_budget: float = 1e-9

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.duration < 0:
            raise ValueError("duration must be non-negative")
        if self.chi_max < 1:
            raise ValueError("chi_max must be at least 1")
        if self.trunc_tol < 0 or self.w_budget <= 0:
            raise ValueError("tolerances must be positive")

    @property
    def n_steps(self):
        n = int(round(self.duration / self.dt))
        if abs(n * self.dt - self.duration) > 1e-9:
            raise ValueError(
                f"duration {self.duration} is not a multiple of dt {self.dt}"
            )
        return n

    @property
    def measure_stride(self):
        if self.measure_every is None:
            return 10
        return max(1, int(round(self.measure_every / self.dt)))
