"""Periodic 1D grid, grid wavefunctions and exact free/gauge operations."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import fft

from ..errors import InvalidInputError, WrapAroundError

WRAP_TOL = 1e-6


@dataclass(frozen=True)
class Grid1D:
    """Symmetric periodic grid ``x_j = -x_max + j dx``, ``dx = 2 x_max / n``."""

    x_max: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.x_max) and self.x_max > 0):
            raise InvalidInputError("x_max must be positive")
        if self.n < 256 or self.n & (self.n - 1):
            raise InvalidInputError("n must be a power of two >= 256")

    @property
    def x_min(self):
        return -self.x_max

    @property
    def dx(self):
        return 2 * self.x_max / self.n

    @property
    def x(self):
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def k(self):
        return 2 * np.pi * fft.fftfreq(self.n, self.dx)

    @property
    def k_max(self):
        return np.pi / self.dx

    def describe(self):
        return {"x_max": self.x_max, "n": self.n, "dx": self.dx}


@dataclass(frozen=True, eq=False)
class GridState:
    """Complex amplitudes on a grid; ``||psi||^2 = sum |psi_j|^2 dx``."""

    grid: Grid1D
    psi: np.ndarray = field(repr=False)

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex)
        if psi.shape != (self.grid.n,):
            raise InvalidInputError("psi does not match the grid")
        if not np.all(np.isfinite(psi)):
            raise InvalidInputError("psi has non-finite entries")
        object.__setattr__(self, "psi", psi)

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.psi) ** 2) * self.grid.dx))

    def inner(self, other):
        """<self, other>."""
        return complex(np.vdot(self.psi, other.psi) * self.grid.dx)

    def normalized(self):
        return GridState(self.grid, self.psi / self.norm())

    def __sub__(self, other):
        return GridState(self.grid, self.psi - other.psi)

    def density(self):
        return np.abs(self.psi) ** 2

    @classmethod
    def gaussian(cls, grid, x0=0.0, width=1.0, k0=0.0):
        """Normalised packet ``exp(-(x-x0)^2/(4 width^2) + i k0 x)``."""
        x = grid.x
        psi = (2 * np.pi * width ** 2) ** -0.25 * np.exp(-(x - x0) ** 2 / (4 * width ** 2) + 1j * k0 * x)
        return cls(grid, psi)


def free_gaussian(grid, t, x0=0.0, width=1.0, k0=0.0):
    """Closed-form free evolution of :meth:`GridState.gaussian` at time t."""
    x = grid.x
    s = width ** 2 * (1 + 0.5j * t / width ** 2)
    arg = -(x - x0 - k0 * t) ** 2 / (4 * s) + 1j * k0 * (x - x0) - 0.5j * k0 * k0 * t + 1j * k0 * x0
    return (2 * np.pi) ** -0.25 * np.sqrt(width / s) * np.exp(arg)


def free_propagate(phi: GridState, t):
    """exp(-i t H0) phi by exact multiplication with exp(-i k^2 t / 2)."""
    if not np.isfinite(t):
        raise InvalidInputError("t must be finite")
    g = phi.grid
    return GridState(g, fft.ifft(np.exp(-0.5j * t * g.k ** 2) * fft.fft(phi.psi)))


def translate(phi: GridState, c):
    """exp(i c p) phi, i.e. ``phi(x + c)``, via the momentum-space phase exp(i k c)."""
    g = phi.grid
    if abs(c) >= g.x_max:
        raise WrapAroundError(f"translation {c} exceeds half the grid extent")
    if c != 0:
        x = g.x
        wrapped = (x < g.x_min + c) if c > 0 else (x > g.x_max + c)
        lost = float(np.sum(np.abs(phi.psi[wrapped]) ** 2) * g.dx)
        if lost > WRAP_TOL:
            raise WrapAroundError(f"translation by {c} wraps probability {lost:.2e}")
    return GridState(g, fft.ifft(np.exp(1j * c * g.k) * fft.fft(phi.psi)))


def boost(phi: GridState, b):
    """exp(-i b x) phi (pointwise)."""
    g = phi.grid
    if abs(b) >= g.k_max:
        raise InvalidInputError(f"boost {b} aliases on a grid with k_max={g.k_max:.3g}")
    return GridState(g, np.exp(-1j * b * g.x) * phi.psi)


def gauge_relate(psi_kh: GridState, b, c):
    """exp(-i b x) exp(i c p) psi: maps the accelerated-frame state to the lab frame.

    Up to a global phase this equals the length-gauge state when ``b = b(tau)``
    and ``c = c(tau)``.
    """
    return boost(translate(psi_kh, c), b)


def kinetic_norm(phi: GridState):
    """||H0 phi|| with the exact (spectral) kinetic operator."""
    g = phi.grid
    return float(np.linalg.norm(0.5 * g.k ** 2 * fft.fft(phi.psi)) * np.sqrt(g.dx / g.n))


def momentum_norm(phi: GridState):
    """||p phi||."""
    g = phi.grid
    return float(np.linalg.norm(g.k * fft.fft(phi.psi)) * np.sqrt(g.dx / g.n))
