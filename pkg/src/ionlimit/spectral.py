"""Free-evolution survival of spherically symmetric bound states.

For a momentum amplitude psi(p) (p = |p|, normalised as
``4 pi int p^2 |psi|^2 dp = 1``) the survival amplitude under H0 = p^2/2 is

    A(tau) = 4 pi int_0^inf p^2 |psi(p)|^2 exp(-i tau p^2 / 2) dp,

the Fourier transform of the kinetic-energy distribution
``mu'(l) = 4 pi sqrt(2 l) |psi(sqrt(2 l))|^2``.  For the built-in states the
integrand continues analytically into the lower-right quadrant, so the ray
``p = exp(-i pi/4) s`` turns the oscillation into ``exp(-tau s^2 / 2)``.
Tabulated states fall back to a Filon rule on the real axis.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.polynomial import legendre
from scipy import integrate
from scipy.interpolate import CubicSpline

from .errors import InvalidInputError, UnsupportedDomainError
from .quadrature import exp_sinh, filon_quadratic_phase

SQRT_PI = math.sqrt(math.pi)
ROT = np.exp(-0.25j * math.pi)
_NORM_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class MomentumState:
    """Spherically symmetric momentum-space amplitude.

    Use the constructors :meth:`hydrogen_1s`, :meth:`point_interaction`,
    :meth:`gaussian` and :meth:`tabulated`.

    The Gaussian convention is ``|psi(p)|^2 = (2 pi sigma^2)^{-3/2}
    exp(-p^2 / (2 sigma^2))``, i.e. each Cartesian momentum component has
    variance sigma^2; its survival amplitude is ``(1 + i tau sigma^2)^{-3/2}``.
    """

    kind: str
    alpha: float = 1.0
    sigma: float = 1.0
    p_grid: np.ndarray | None = field(default=None, repr=False)
    psi_grid: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def hydrogen_1s(cls):
        return cls._checked(cls("hydrogen"))

    @classmethod
    def point_interaction(cls, alpha):
        if not (np.isfinite(alpha) and alpha > 0):
            raise InvalidInputError("alpha must be positive")
        return cls._checked(cls("point", alpha=float(alpha)))

    @classmethod
    def gaussian(cls, sigma):
        if not (np.isfinite(sigma) and sigma > 0):
            raise InvalidInputError("sigma must be positive")
        return cls._checked(cls("gaussian", sigma=float(sigma)))

    @classmethod
    def tabulated(cls, p, psi):
        """Amplitude on a radial grid; renormalised, zero beyond the last point."""
        p = np.asarray(p, dtype=float)
        psi = np.asarray(psi, dtype=float)
        if p.ndim != 1 or p.shape != psi.shape or p.size < 4:
            raise InvalidInputError("need matching 1-D p and psi arrays (>= 4 points)")
        if np.any(np.diff(p) <= 0) or p[0] < 0:
            raise InvalidInputError("p grid must be increasing and non-negative")
        raw = cls("tabulated", p_grid=p, psi_grid=psi)
        norm = raw._norm_integral()
        if not norm > 0:
            raise InvalidInputError("tabulated amplitude has zero norm")
        return cls("tabulated", p_grid=p, psi_grid=psi / math.sqrt(norm))

    @classmethod
    def _checked(cls, state):
        n = state._norm_integral()
        if abs(n - 1) > _NORM_TOL:
            raise InvalidInputError(f"state not normalised (norm {n})")
        return state

    # -- amplitude -------------------------------------------------------------

    @property
    def _spline(self):
        if "_spl" not in self.__dict__:
            object.__setattr__(self, "_spl", CubicSpline(self.p_grid, self.psi_grid))
        return self.__dict__["_spl"]

    def amplitude(self, p):
        """psi(p) for real p >= 0."""
        p = np.asarray(p, dtype=float)
        if self.kind == "hydrogen":
            return math.sqrt(8) / math.pi / (1 + p * p) ** 2
        if self.kind == "point":
            a = self.alpha
            return math.sqrt(a) / math.pi / (a * a + p * p)
        if self.kind == "gaussian":
            s2 = self.sigma ** 2
            return (2 * math.pi * s2) ** -0.75 * np.exp(-p * p / (4 * s2))
        pg = self.p_grid
        inside = p <= pg[-1]
        return np.where(inside, self._spline(np.clip(p, pg[0], pg[-1])), 0.0)

    def density_weight(self, p):
        """4 pi p^2 |psi(p)|^2, continued analytically for complex p (built-in kinds)."""
        if self.kind == "tabulated":
            return 4 * math.pi * p * p * self.amplitude(p) ** 2
        p2 = p * p
        if self.kind == "hydrogen":
            return 4 * math.pi * p2 * (8 / math.pi ** 2) / (1 + p2) ** 4
        if self.kind == "point":
            a2 = self.alpha ** 2
            return 4 * math.pi * p2 * (self.alpha / math.pi ** 2) / (a2 + p2) ** 2
        s2 = self.sigma ** 2
        return 4 * math.pi * p2 * (2 * math.pi * s2) ** -1.5 * np.exp(-p2 / (2 * s2))

    def rotation_angle(self, tau):
        """Angle of the integration ray for the survival integral."""
        if self.kind == "gaussian":
            # direction that makes the combined Gaussian exponent real
            return -0.5 * math.atan(tau * self.sigma ** 2)
        return -0.25 * math.pi

    @property
    def tail_exponent(self):
        """Large-p power law of |psi(p)|^2 (-inf for faster-than-power decay)."""
        if self.kind == "hydrogen":
            return -8.0
        if self.kind == "point":
            return -4.0
        if self.kind == "gaussian":
            return -math.inf
        p, psi = self.p_grid, self.psi_grid
        sel = (p > 0.8 * p[-1]) & (np.abs(psi) > 0)
        if sel.sum() < 3:
            return -math.inf
        slope = np.polyfit(np.log(p[sel]), np.log(psi[sel] ** 2), 1)[0]
        return float(slope)

    def _norm_integral(self):
        if self.kind == "tabulated":
            # p^2 * cubic^2 is a degree-8 polynomial per knot interval: 5-point GL is exact
            x, w = legendre.leggauss(5)
            pg = self.p_grid
            a, b = pg[:-1, None], pg[1:, None]
            pts = 0.5 * (a + b) + 0.5 * (b - a) * x
            vals = pts ** 2 * self._spline(pts) ** 2
            return float(4 * math.pi * np.sum(0.5 * (b - a) * w * vals))
        val, _ = exp_sinh(self.density_weight)
        return float(val)

    def describe(self):
        d = {"kind": self.kind}
        if self.kind == "point":
            d["alpha"] = self.alpha
        if self.kind == "gaussian":
            d["sigma"] = self.sigma
        if self.kind == "tabulated":
            d["n_points"] = int(self.p_grid.size)
        return d


def load_tabulated_csv(path):
    """Read a two-column ``p,psi_hat`` CSV with header."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    try:
        data = np.array([[float(x) for x in r[:2]] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != 2:
        raise InvalidInputError(f"{path}: expected two columns p,psi_hat")
    return MomentumState.tabulated(data[:, 0], data[:, 1])


def spectral_density(state: MomentumState, lam):
    """mu'(lambda) = 4 pi sqrt(2 lambda) |psi(sqrt(2 lambda))|^2; zero for lambda < 0."""
    lam = np.asarray(lam, dtype=float)
    pos = np.clip(lam, 0.0, None)
    p = np.sqrt(2 * pos)
    out = np.where(lam > 0, 4 * math.pi * p * state.amplitude(p) ** 2, 0.0)
    return float(out) if out.ndim == 0 else out


def _check_tau(tau):
    if not np.isfinite(tau) or tau < 0:
        raise InvalidInputError("tau must be finite and non-negative")


def survival_amplitude(state: MomentumState, tau, method=None):
    """<psi, exp(-i tau H0) psi>.

    Parameters
    ----------
    method : {"rotated", "filon"}, optional
        Default is the rotated ray for built-in states and the real-ray Filon
        rule for tabulated ones.
    """
    _check_tau(tau)
    if tau == 0:
        return 1.0 + 0.0j
    method = method or ("filon" if state.kind == "tabulated" else "rotated")
    if method == "rotated":
        if state.kind == "tabulated":
            raise InvalidInputError("tabulated states have no analytic continuation")
        r = np.exp(1j * state.rotation_angle(tau))
        val, _ = exp_sinh(lambda s: state.density_weight(r * s) * np.exp(-0.5j * tau * (r * s) ** 2) * r)
        return complex(val)
    if method == "filon":
        p_max = state.p_grid[-1] if state.kind == "tabulated" else None
        weight = lambda p: state.density_weight(p)
        val, _ = filon_quadratic_phase(weight, tau, p_max=p_max)
        return complex(val)
    raise InvalidInputError(f"unknown method {method!r}")


def survival_probability(state: MomentumState, tau, method=None):
    """q(tau) = |<psi, exp(-i tau H0) psi>|^2."""
    return abs(survival_amplitude(state, tau, method)) ** 2


def limit_ionization_single(state: MomentumState, tau, method=None):
    """Limiting ionization 1 - q(tau) for a potential with a single bound state."""
    return 1.0 - survival_probability(state, tau, method)


def _gamma_half(x):
    """Gamma at a positive integer or half-integer, from exact closed forms."""
    two_x = round(2 * x)
    if two_x <= 0 or abs(two_x - 2 * x) > 1e-12:
        raise UnsupportedDomainError(f"gamma({x}) not in the half-integer table")
    if two_x % 2 == 0:
        return float(math.factorial(two_x // 2 - 1))
    n = (two_x - 1) // 2
    return math.factorial(2 * n) / (4 ** n * math.factorial(n)) * SQRT_PI


_HYPERU_B = (-1.5, 0.5)


def hyperu(a, b, z):
    """Tricomi U(a, b, z) restricted to a = 3/2, b in {-3/2, 1/2}, z = i y with y >= 0.

    Uses ``U = Gamma(a)^{-1} int_0^inf exp(-z t) t^{a-1} (1+t)^{b-a-1} dt``
    along the ray ``t = exp(-i pi/4) s``; at z = 0 returns
    ``Gamma(1-b) / Gamma(a+1-b)``.
    """
    z = complex(z)
    if a != 1.5 or b not in _HYPERU_B:
        raise UnsupportedDomainError(f"hyperu implemented only for a=3/2, b in {_HYPERU_B}")
    if z.real != 0 or z.imag < 0 or not np.isfinite(z.imag):
        raise UnsupportedDomainError("hyperu implemented only on the non-negative imaginary axis")
    if z == 0:
        return complex(_gamma_half(1 - b) / _gamma_half(a + 1 - b))
    y = z.imag
    expo = b - a - 1

    def integrand(s):
        t = ROT * s
        return np.exp(-1j * y * t) * np.sqrt(t) * (1 + t) ** expo * ROT

    val, _ = exp_sinh(integrand)
    return complex(val / _gamma_half(a))


def q_hydrogen(tau):
    """Hydrogen 1s survival probability, (64/pi) |U(3/2, -3/2, i tau/2)|^2."""
    _check_tau(tau)
    return 64 / math.pi * abs(hyperu(1.5, -1.5, 0.5j * tau)) ** 2


def q_delta(alpha, tau):
    """Point-interaction survival probability, (1/pi) |U(3/2, 1/2, i tau alpha^2/2)|^2."""
    if not (np.isfinite(alpha) and alpha > 0):
        raise InvalidInputError("alpha must be positive")
    _check_tau(tau)
    return abs(hyperu(1.5, 0.5, 0.5j * tau * alpha * alpha)) ** 2 / math.pi


@dataclass(frozen=True)
class H0Moments:
    m1: float
    m2: float
    divergent: bool


def h0_moments(state: MomentumState):
    """<H0> and <H0^2>; flags divergence from the large-p tail exponent.

    A moment integrand decaying like p^-1 or slower is declared divergent and
    reported as ``inf``.
    """
    e = state.tail_exponent
    div1 = 4 + e >= -1
    div2 = 6 + e >= -1

    def moment(k):
        if state.kind == "tabulated":
            f = lambda p: state.density_weight(p) * (0.5 * p * p) ** k
            return integrate.quad(f, 0, state.p_grid[-1], limit=500,
                                  points=state.p_grid[1:-1][:400])[0]
        val, _ = exp_sinh(lambda p: state.density_weight(p) * (0.5 * p * p) ** k)
        return float(val.real if np.iscomplexobj(val) else val)

    m1 = math.inf if div1 else moment(1)
    m2 = math.inf if div2 else moment(2)
    return H0Moments(m1, m2, div1 or div2)


def pfeifer_time(state: MomentumState):
    """pi / sqrt(<H0^2> - <H0>^2), or ``None`` when the energy variance is unbounded."""
    mom = h0_moments(state)
    if mom.divergent:
        return None
    var = mom.m2 - mom.m1 ** 2
    if not var > 0:
        return None
    return math.pi / math.sqrt(var)
