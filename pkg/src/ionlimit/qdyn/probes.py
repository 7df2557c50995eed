"""Finite-amplitude probes of the strong-field limit statements."""
from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError, PartitionError, RegimeError
from ..pulse import PulseClass, PulseShape, c0_zero_structure, classify
from .bound import BoundSet
from .grid import GridState, free_propagate, gauge_relate, kinetic_norm, momentum_norm
from .potentials import PotentialGrid
from .propagate import evolve, propagate_kh


def theorem2_deviation(phi: GridState, V: PotentialGrid, pulse: PulseShape, E0, dt):
    """``||U'(tau, 0) phi - exp(-i tau H0) phi||`` for the accelerated-frame propagator U'.

    Only meaningful when c0 vanishes on a finite set; pulses whose
    displacement is flat on an interval are rejected.
    """
    _, flats, _ = c0_zero_structure(pulse)
    if flats:
        raise RegimeError(f"c0 vanishes identically on {flats}")
    out = propagate_kh(phi, V, pulse, E0, dt)
    return (out - free_propagate(phi, pulse.tau)).norm()


def case1_bound_check(psi: GridState, V: PotentialGrid, pulse: PulseShape, E0, P: BoundSet):
    """Both sides of the large-momentum-transfer bound on the surviving bound amplitude.

    With ``phi = exp(-i tau H0) psi``, ``b = E0 b0(tau)`` and ``c = E0 c0(tau)``::

        lhs = ||P exp(-i b x) exp(i c p) phi||
        rhs = (2 / b^2) (||H0 phi|| + |b| ||p phi|| + ||V(x - c) phi||)

    Returns
    -------
    (lhs, rhs) : tuple of float
    """
    inv = classify(pulse)
    if inv.regime is not PulseClass.CASE_I:
        raise RegimeError(f"pulse is {inv.regime}, expected CaseI")
    if E0 == 0:
        raise InvalidInputError("E0 must be nonzero")
    b = E0 * inv.b0_tau
    c = E0 * inv.c0_tau
    phi = free_propagate(psi, pulse.tau)
    lhs = float(np.linalg.norm(P.overlaps(gauge_relate(phi, b, c))))
    vphi = GridState(phi.grid, V.shifted(c) * phi.psi).norm()
    rhs = 2.0 / b ** 2 * (kinetic_norm(phi) + abs(b) * momentum_norm(phi) + vphi)
    return lhs, float(rhs)


def boosted_projection(phi: GridState, beta, gamma, P: BoundSet):
    """``||P exp(-i beta x) exp(i gamma p) phi||``."""
    return float(np.linalg.norm(P.overlaps(gauge_relate(phi, beta, gamma))))


def check_partition(partition, tau=None):
    """Validate an alternating flat/non-flat partition and return it as floats."""
    t = np.asarray(partition, dtype=float)
    if t.ndim != 1 or len(t) < 2 or len(t) % 2:
        raise PartitionError("partition needs an even number (>= 2) of breakpoints")
    if not np.all(np.isfinite(t)) or t[0] != 0 or np.any(np.diff(t) < 0):
        raise PartitionError("partition must start at 0 and be non-decreasing")
    if tau is not None and not np.isclose(t[-1], tau, rtol=0, atol=1e-12 * max(1.0, tau)):
        raise PartitionError(f"partition ends at {t[-1]}, not at tau={tau}")
    return t


def remark5_product(psi: GridState, partition, V: PotentialGrid, dt, tau=None):
    """Product of full and free evolutions over a flat/non-flat partition.

    Intervals ``[t_{2j}, t_{2j+1}]`` (where c0 vanishes identically and the
    potential sits undisplaced) use ``H0 + V``; the intervening ones use
    ``H0``.  Factors are applied in time order.
    """
    t = check_partition(partition, tau)
    out = psi
    for j in range(len(t) - 1):
        span = t[j + 1] - t[j]
        if span == 0:
            continue
        out = evolve(out, V, span, dt) if j % 2 == 0 else free_propagate(out, span)
    return out


__all__ = ["theorem2_deviation", "case1_bound_check", "boosted_projection",
           "check_partition", "remark5_product"]
