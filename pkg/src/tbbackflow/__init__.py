"""Quantum backflow on biased tight-binding chains.

Closed-form flux bounds, optimal states and integrated backflow
eigenproblems for infinite chains and finite rings.
"""

from .errors import (
    BackflowError,
    ConvergenceFailure,
    NoInteriorMax,
    NonPositiveData,
    NormViolation,
    NotSymmetric,
    SameModeError,
    WindowTooSmall,
)
from .lattice import ChainParams, positive_momentum_window
from .flux import RingCoeffs, WeightSamples, general_flux, site_flux, two_state_min
from .extremal import bounds, optimal_state, ring_bounds, infinite_bounds
from .bm import BMProblem, bm_peak, lambda_p

__version__ = "0.1.0"
