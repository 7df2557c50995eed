"""Bound states of the 3-point finite-difference Hamiltonian and the ionization projector."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ..errors import GridTooSmallError, NoBoundStateError, NormError
from .grid import Grid1D, GridState
from .potentials import PotentialGrid

EDGE_DECAY = 1e-8


@dataclass(frozen=True, eq=False)
class BoundSet:
    """Negative-energy eigenpairs; ``vectors[n]`` is normalised with the dx weight."""

    grid: Grid1D
    energies: np.ndarray
    vectors: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.energies)

    def state(self, n=0):
        return GridState(self.grid, self.vectors[n].astype(complex))

    def overlaps(self, psi: GridState):
        """<chi_n, psi> for every bound state."""
        return self.vectors @ psi.psi * self.grid.dx

    def populations(self, psi: GridState):
        return np.abs(self.overlaps(psi)) ** 2

    def project(self, psi: GridState):
        """P psi."""
        return GridState(self.grid, self.overlaps(psi) @ self.vectors)


def fd_hamiltonian(V: PotentialGrid):
    """Diagonal and off-diagonal of ``-1/2 d^2/dx^2 + V`` (3-point stencil)."""
    dx = V.grid.dx
    d = 1.0 / dx ** 2 + V.values
    e = np.full(V.grid.n - 1, -0.5 / dx ** 2)
    return d, e


def apply_fd_hamiltonian(V: PotentialGrid, psi):
    d, e = fd_hamiltonian(V)
    out = d * psi
    out[:-1] += e * psi[1:]
    out[1:] += e * psi[:-1]
    return out


def bound_states(V: PotentialGrid, max_count=8):
    """Lowest negative-energy eigenpairs of the finite-difference Hamiltonian.

    Raises
    ------
    NoBoundStateError
        No negative eigenvalue.
    GridTooSmallError
        The ground state has not decayed below 1e-8 (relative) at the edges.
    """
    d, e = fd_hamiltonian(V)
    count = min(max_count, V.grid.n)
    w, vec = eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1))
    neg = w < 0
    if not np.any(neg):
        raise NoBoundStateError(f"{V.kind} potential has no bound state on this grid")
    w, vec = w[neg], vec[:, neg].T
    peak = np.argmax(np.abs(vec), axis=1)
    vec = vec * np.sign(vec[np.arange(len(w)), peak])[:, None] / np.sqrt(V.grid.dx)
    g0 = np.abs(vec[0])
    if max(g0[:2].max(), g0[-2:].max()) > EDGE_DECAY * g0.max():
        raise GridTooSmallError("ground state does not decay at the grid edges")
    return BoundSet(V.grid, w, vec)


def ionization(psi_final: GridState, P: BoundSet):
    """1 - sum_n |<chi_n, psi>|^2, clamped to [0, 1]."""
    nrm = psi_final.norm()
    if abs(nrm - 1) > 1e-4:
        raise NormError(f"final state norm {nrm} outside 1 +- 1e-4")
    return float(min(1.0, max(0.0, 1.0 - P.populations(psi_final).sum())))
