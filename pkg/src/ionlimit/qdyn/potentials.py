"""Model potentials sampled on a grid."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..errors import InvalidInputError
from .grid import Grid1D

EDGE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class PotentialGrid:
    """Real potential values on a grid with a kind tag and parameters.

    Values must vanish at the grid edges (``|V| < 1e-6 depth``); the
    accelerated-frame propagator treats V as zero outside the grid.
    """

    grid: Grid1D
    kind: str
    params: dict
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,) or not np.all(np.isfinite(v)):
            raise InvalidInputError("potential values do not match the grid")
        depth = abs(self.params.get("depth", 1.0))
        if max(abs(v[0]), abs(v[-1])) >= EDGE_TOL * depth:
            raise InvalidInputError("potential does not vanish at the grid edges")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def soft_core(cls, grid, depth=1.0, a=np.sqrt(2.0), cutoff=60.0):
        """``-depth / sqrt(x^2 + a^2)`` with a cosine taper to zero on [cutoff/2, cutoff]."""
        if cutoff >= grid.x_max:
            raise InvalidInputError("soft-core cutoff must lie inside the grid")
        x = np.abs(grid.x)
        r0 = 0.5 * cutoff
        win = np.where(x <= r0, 1.0,
                       np.where(x >= cutoff, 0.0, 0.5 * (1 + np.cos(np.pi * (x - r0) / (cutoff - r0)))))
        v = -depth / np.sqrt(x * x + a * a) * win
        return cls(grid, "soft-core", {"depth": depth, "a": float(a), "cutoff": cutoff}, v)

    @classmethod
    def gaussian_well(cls, grid, depth=1.0, width=1.0):
        """``-depth exp(-x^2 / (2 width^2))``."""
        v = -depth * np.exp(-0.5 * (grid.x / width) ** 2)
        v[np.abs(v) < 1e-300] = 0.0
        return cls(grid, "gaussian-well", {"depth": depth, "width": width}, v)

    @classmethod
    def square_well(cls, grid, depth=1.0, half_width=2.0):
        """``-depth`` on ``|x| <= half_width``."""
        v = np.where(np.abs(grid.x) <= half_width, -depth, 0.0)
        return cls(grid, "square-well", {"depth": depth, "half_width": half_width}, v)

    def shifted(self, c):
        """V(x - c) by 4-point Lagrange interpolation of the samples; zero outside the grid."""
        return shift_samples(self.values, c / self.grid.dx, self._padded)

    @cached_property
    def _padded(self):
        return pad_samples(self.values)

    def describe(self):
        return {"kind": self.kind, **self.params}


def pad_samples(v):
    """``v`` with ``len(v) + 2`` zeros on each side."""
    z = np.zeros(len(v) + 2)
    return np.concatenate([z, v, z])


def shift_samples(v, s, padded=None):
    """Sample ``v`` at fractional index ``j - s`` for all j (cubic Lagrange, zero padding).

    Shifts of more than ``len(v)`` samples give zeros.
    """
    n = len(v)
    if abs(s) > n:
        return np.zeros(n)
    if padded is None:
        padded = pad_samples(v)
    m = int(np.floor(s))
    frac = s - m
    start = n + 2 - m  # padded index of v[j - m] at j = 0
    if frac == 0.0:
        return padded[start:start + n].copy()
    u = 1.0 - frac
    # nodes at -1, 0, 1, 2 relative to index j - m - 1
    w = (-u * (u - 1) * (u - 2) / 6, (u + 1) * (u - 1) * (u - 2) / 2,
         -(u + 1) * u * (u - 2) / 2, (u + 1) * u * (u - 1) / 6)
    base = start - 1
    return (w[0] * padded[base - 1:base - 1 + n] + w[1] * padded[base:base + n]
            + w[2] * padded[base + 1:base + 1 + n] + w[3] * padded[base + 2:base + 2 + n])
