"""One-dimensional time-dependent Schroedinger solver and strong-field probes."""
from .bound import BoundSet, bound_states, ionization
from .grid import Grid1D, GridState, boost, free_propagate, gauge_relate, translate
from .potentials import PotentialGrid
from .probes import boosted_projection, case1_bound_check, remark5_product, theorem2_deviation
from .propagate import evolve, propagate_kh, propagate_length
from .sweep import SweepResult, sweep_amplitude

__all__ = [
    "BoundSet", "bound_states", "ionization",
    "Grid1D", "GridState", "boost", "free_propagate", "gauge_relate", "translate",
    "PotentialGrid",
    "boosted_projection", "case1_bound_check", "remark5_product", "theorem2_deviation",
    "evolve", "propagate_kh", "propagate_length",
    "SweepResult", "sweep_amplitude",
]
