"""Ionization probability as a function of field amplitude."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError
from ..io import write_csv, write_manifest
from ..pulse import PulseShape, describe, displacement, momentum_transfer
from .bound import BoundSet, bound_states, ionization
from .grid import GridState, free_propagate, gauge_relate
from .potentials import PotentialGrid
from .propagate import propagate_kh


@dataclass
class SweepRow:
    E0: float
    P_ion: float = float("nan")
    populations: np.ndarray = field(default_factory=lambda: np.zeros(0))
    deviation: float | None = None
    error: str | None = None


@dataclass
class SweepResult:
    """One row per amplitude plus the descriptors needed to re-run the sweep."""

    rows: list
    n_bound: int
    dt: float
    grid: dict
    pulse: dict
    potential: dict

    @property
    def E0(self):
        return np.array([r.E0 for r in self.rows])

    @property
    def P_ion(self):
        return np.array([r.P_ion for r in self.rows])

    @property
    def deviation(self):
        return np.array([np.nan if r.deviation is None else r.deviation for r in self.rows])

    def header(self):
        return ["E0", "P_ion"] + [f"pop_{n}" for n in range(self.n_bound)] + ["dev_theorem2"]

    def table(self):
        out = []
        for r in self.rows:
            pops = list(r.populations) if len(r.populations) else [None] * self.n_bound
            out.append([r.E0, r.P_ion, *pops, r.deviation])
        return out

    def manifest(self):
        return {"kind": "sweep", "grid": self.grid, "dt": self.dt, "pulse": self.pulse,
                "potential": self.potential, "n_bound": self.n_bound,
                "row_errors": {f"{r.E0!r}": r.error for r in self.rows if r.error}}

    def write(self, csv_path, manifest_path=None):
        write_csv(csv_path, self.header(), self.table())
        if manifest_path is not None:
            write_manifest(manifest_path, self.manifest())
        return csv_path


def check_amplitudes(E0_list):
    """Ascending, at least four values, and at least one decade between the extreme positive ones."""
    e = np.asarray(E0_list, dtype=float)
    problems = []
    if e.ndim != 1 or len(e) < 4:
        problems.append("E0 grid needs at least 4 values")
    elif not np.all(np.isfinite(e)) or np.any(e < 0):
        problems.append("E0 values must be finite and non-negative")
    else:
        if np.any(np.diff(e) <= 0):
            problems.append("E0 grid must be strictly ascending")
        pos = e[e > 0]
        if len(pos) < 2 or pos.max() < 10 * pos.min() * (1 - 1e-12):
            problems.append("E0 grid must span at least one decade")
    return problems


def sweep_amplitude(psi: GridState, V: PotentialGrid, pulse: PulseShape, E0_list, dt,
                    bound_set: BoundSet | None = None, deviation=False):
    """Ionization of ``psi`` after the pulse for each amplitude in ``E0_list``.

    Each row propagates in the accelerated frame, maps back with the exact
    boost and shift, and projects on the bound states.  A failing row keeps
    its error message and the sweep moves on.
    """
    problems = check_amplitudes(E0_list)
    if problems:
        raise InvalidInputError("; ".join(problems))
    P = bound_set if bound_set is not None else bound_states(V)
    b0 = momentum_transfer(pulse, pulse.tau)
    c0 = displacement(pulse, pulse.tau)
    free = free_propagate(psi, pulse.tau) if deviation else None
    rows = []
    for E0 in map(float, E0_list):
        row = SweepRow(E0)
        try:
            kh = propagate_kh(psi, V, pulse, E0, dt)
            if deviation:
                row.deviation = (kh - free).norm()
            lab = gauge_relate(kh, E0 * b0, E0 * c0)
            row.P_ion = ionization(lab, P)
            row.populations = P.populations(lab)
        except (ValueError, RuntimeError) as exc:
            row.error = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return SweepResult(rows, len(P), float(dt), psi.grid.describe(), describe(pulse), V.describe())
