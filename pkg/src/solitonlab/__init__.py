"""solitonlab: lattice solitons of hard-core bosons.

A numerical laboratory for solitary waves of strongly repulsive lattice
bosons (equivalently, an anisotropic spin-1/2 chain in a longitudinal
field).  Three descriptions of the same dynamics live side by side:

* ``continuum``  -- the analytic solitary-wave family of the continuum
  mean-field theory (density profile, width, phase jump, sound speed),
* ``meanfield``  -- the discrete equations of motion for the canonical
  site variables (population imbalance, phase), integrated with RK4,
* ``quantum``    -- full many-body evolution of the spin chain: a TEBD
  matrix-product-state engine plus a dense Krylov propagator that serves
  as a small-size oracle.

``analysis`` quantifies how well the three agree, ``cli`` orchestrates
reproducible scenario runs.
"""

__version__ = "0.1.0"

from .model import LatticeParams, BlochProduct, make_params, bloch_from_density_phase
from .continuum import SolitonSpec, sound_speed, soliton_width, phase_jump

__all__ = [
    "LatticeParams",
    "BlochProduct",
    "make_params",
    "bloch_from_density_phase",
    "SolitonSpec",
    "sound_speed",
    "soliton_width",
    "phase_jump",
    "__version__",
]
