"""Ionization limits in ultra-intense fields: pulse invariants, survival probabilities
and a one-dimensional Schroedinger-equation laboratory."""
from . import errors, pulse, qdyn, spectral
from .pulse import PulseClass, PulseInvariants, PulseShape, c0_zero_structure, classify, displacement, momentum_transfer
from .spectral import (MomentumState, h0_moments, hyperu, pfeifer_time, q_delta, q_hydrogen,
                       survival_amplitude, survival_probability)

__version__ = "0.1.0"
