"""Pulse shapes f(t) on [0, tau] and their classical invariants.

The field is E(t) = E0 f(t).  For a shape f the package works with the
shape-normalised integrals

    b0(t) = int_0^t f(s) ds                 (momentum transfer per unit E0)
    c0(t) = int_0^t b0(s) ds                (displacement per unit E0)
          = t b0(t) - int_0^t s f(s) ds

Analytic kinds are written as finite sums Re[A s^m exp(i kappa s)] on
pieces (rectangular, trapezoidal, sin^2 envelopes with an optional cosine
carrier), so both antiderivatives are exact.  The gaussian envelope uses the
Faddeeva function.  Sampled pulses are linear interpolants and are integrated
exactly as such.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import integrate, optimize, special

from .errors import InvalidInputError, ZeroPulseError

KINDS = ("rectangular", "trapezoidal", "sin2", "gaussian", "sampled", "gap")


class PulseClass(enum.Enum):
    """Asymptotic regime tag; carries no ordering."""

    CASE_I = "CaseI"
    CASE_II = "CaseII"
    CASE_III = "CaseIII"

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class PulseShape:
    """A pulse shape supported on [0, tau].

    Parameters
    ----------
    kind : str
        One of ``rectangular``, ``trapezoidal``, ``sin2``, ``gaussian``,
        ``sampled`` or ``gap``.  The first four are envelopes; ``gap`` is one
        carrier period, a field-free stretch, then another carrier period
        (see :meth:`gap_cycles`).
    tau : float
        Pulse duration (a.u.).
    omega : float, optional
        Carrier frequency.  When given, the envelope is multiplied by
        ``cos(omega t + phase)``.
    phase : float
        Carrier phase in radians.
    ramp_fraction : float
        Trapezoid ramp length as a fraction of tau, in (0, 0.5].
    center, width : float, optional
        Gaussian envelope centre and standard deviation (default tau/2, tau/6).
    samples : array_like, optional
        Values on the uniform grid ``linspace(0, tau, len(samples))``.
    scale : float
        Overall multiplier of the shape (the f -> lambda f rescaling).
    """

    kind: str
    tau: float
    omega: float | None = None
    phase: float = 0.0
    ramp_fraction: float = 0.1
    center: float | None = None
    width: float | None = None
    samples: np.ndarray | None = field(default=None, repr=False)
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown pulse kind {self.kind!r}")
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise InvalidInputError("tau must be finite and positive")
        if not np.isfinite(self.scale):
            raise InvalidInputError("scale must be finite")
        if self.omega is not None and not np.isfinite(self.omega):
            raise InvalidInputError("omega must be finite")
        if self.kind == "gap":
            if not (self.omega and self.omega > 0):
                raise InvalidInputError("gap pulse needs omega > 0")
            if self.tau < 4 * np.pi / self.omega * (1 - 1e-12):
                raise InvalidInputError("gap pulse needs tau >= two carrier periods")
        if self.kind == "trapezoidal" and not 0 < self.ramp_fraction <= 0.5:
            raise InvalidInputError("ramp_fraction must lie in (0, 0.5]")
        if self.kind == "gaussian":
            if self.center is None:
                object.__setattr__(self, "center", 0.5 * self.tau)
            if self.width is None:
                object.__setattr__(self, "width", self.tau / 6.0)
            if not self.width > 0:
                raise InvalidInputError("gaussian width must be positive")
        if self.kind == "sampled":
            if self.samples is None:
                raise InvalidInputError("sampled pulse needs samples")
            arr = np.array(self.samples, dtype=float)
            if arr.ndim != 1 or arr.size < 2:
                raise InvalidInputError("sampled pulse needs at least 2 samples")
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError("samples must be finite")
            arr.setflags(write=False)
            object.__setattr__(self, "samples", arr)
        if self.scale == 0 or (self.kind == "sampled" and not np.any(self.samples)):
            raise ZeroPulseError("pulse shape vanishes identically")

    # -- construction helpers -------------------------------------------

    @classmethod
    def cos_cycles(cls, cycles, omega=1.0, **kw):
        """``cos(omega t)`` over ``cycles`` full periods (b0 = c0 = 0 at tau)."""
        return cls("rectangular", 2 * np.pi * cycles / omega, omega=omega, **kw)

    @classmethod
    def sin_cycles(cls, cycles, omega=1.0, **kw):
        """``sin(omega t)`` over ``cycles`` full periods (b0 = 0, c0 != 0 at tau)."""
        return cls("rectangular", 2 * np.pi * cycles / omega, omega=omega,
                   phase=-np.pi / 2, **kw)

    @classmethod
    def gap_cycles(cls, gap, omega=1.0, **kw):
        """One ``cos`` period, ``gap`` of zero field, one more ``cos`` period.

        Both b0 and c0 return to zero after the first period, so c0 vanishes
        identically across the gap.
        """
        return cls("gap", 4 * np.pi / omega + gap, omega=omega, **kw)

    @classmethod
    def sampled_from(cls, values, tau, scale=1.0):
        return cls("sampled", tau, samples=np.asarray(values, float), scale=scale)

    def scaled(self, lam):
        """Return the shape ``lam * f``."""
        from dataclasses import replace
        return replace(self, scale=self.scale * lam)

    @property
    def times(self):
        """Sample times of a sampled pulse."""
        return np.linspace(0.0, self.tau, len(self.samples))

    # -- piece representation --------------------------------------------

    @cached_property
    def _pieces(self):
        # list of (t0, t1, [(A, m, kappa), ...]) with f = Re sum A s^m e^{i kappa s}
        tau = self.tau
        w = self.omega or 0.0
        ph = self.phase if self.omega is not None else 0.0
        carrier = self.scale * np.exp(1j * ph)
        if self.kind == "rectangular":
            return [(0.0, tau, [(carrier, 0, w)])]
        if self.kind == "trapezoidal":
            r = self.ramp_fraction * tau
            pieces = [(0.0, r, [(carrier / r, 1, w)])]
            if tau - 2 * r > 0:
                pieces.append((r, tau - r, [(carrier, 0, w)]))
            pieces.append((tau - r, tau, [(carrier * tau / r, 0, w), (-carrier / r, 1, w)]))
            return pieces
        if self.kind == "sin2":
            big = 2 * np.pi / tau
            return [(0.0, tau, [(0.5 * carrier, 0, w),
                                (-0.25 * carrier, 0, w + big),
                                (-0.25 * carrier, 0, w - big)])]
        if self.kind == "gap":
            period = 2 * np.pi / w
            t2 = tau - period
            return [(0.0, period, [(carrier, 0, w)]), (period, t2, []),
                    (t2, tau, [(carrier * np.exp(-1j * w * t2), 0, w)])]
        return None

    # -- evaluation --------------------------------------------------------

    def __call__(self, t):
        """Evaluate f(t); zero outside [0, tau]."""
        t = np.asarray(t, dtype=float)
        inside = (t >= 0) & (t <= self.tau)
        out = np.zeros(t.shape)
        if self.kind == "sampled":
            out = self.scale * np.interp(t, self.times, self.samples)
        elif self.kind == "gaussian":
            env = np.exp(-0.5 * ((t - self.center) / self.width) ** 2)
            if self.omega is not None:
                env = env * np.cos(self.omega * t + self.phase)
            out = self.scale * env
        else:
            for k, (t0, t1, terms) in enumerate(self._pieces):
                last = k == len(self._pieces) - 1
                sel = (t >= t0) & ((t <= t1) if last else (t < t1))
                val = sum((A * t ** m * np.exp(1j * kap * t) for A, m, kap in terms), np.zeros(t.shape))
                out = np.where(sel, np.real(val), out)
        return np.where(inside, out, 0.0)

    @cached_property
    def max_abs(self):
        """max |f| on [0, tau] (dense sampling for analytic kinds)."""
        if self.kind == "sampled":
            return float(np.max(np.abs(self.samples)) * abs(self.scale))
        n = 8193
        if self.omega:
            n = max(n, int(64 * abs(self.omega) * self.tau / (2 * np.pi)) + 1)
        return float(np.max(np.abs(self(np.linspace(0.0, self.tau, n)))))

    def moment_integral(self, t, m):
        """``int_0^t s^m f(s) ds`` for m in {0, 1}, vectorised over t."""
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, 0.0, self.tau)
        if self.kind == "sampled":
            return self.scale * _pl_moment(self.times, self.samples, tc, m)
        if self.kind == "gaussian":
            return _gaussian_moment(self, tc, m)
        total = np.zeros(tc.shape)
        for t0, t1, terms in self._pieces:
            upper = np.clip(tc, t0, t1)
            for A, mk, kap in terms:
                total = total + np.real(A * _mono_exp_integral(mk + m, kap, t0, upper))
        return total


# -- exact integrals ------------------------------------------------------------


def _u_moments(lmax, kappa, delta):
    """int_0^delta u^l e^{i kappa u} du for l = 0..lmax (vectorised over delta)."""
    shape = np.shape(delta)
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    x = kappa * delta
    small = np.abs(x) < 1.0
    out = np.zeros((lmax + 1,) + delta.shape, dtype=complex)
    if np.any(small):
        d = delta[small]
        ix = 1j * kappa * d
        for l in range(lmax + 1):
            term = np.ones_like(ix)
            acc = term / (l + 1)
            for n in range(1, 30):
                term = term * ix / n
                acc = acc + term / (n + l + 1)
            out[l][small] = acc * d ** (l + 1)
    big = ~small
    if np.any(big):
        d = delta[big]
        e = np.exp(1j * kappa * d)
        prev = (e - 1.0) / (1j * kappa)
        out[0][big] = prev
        for l in range(1, lmax + 1):
            prev = (d ** l * e - l * prev) / (1j * kappa)
            out[l][big] = prev
    return out.reshape((lmax + 1,) + shape)


def _mono_exp_integral(j, kappa, t0, t):
    """int_{t0}^{t} s^j e^{i kappa s} ds for t >= t0."""
    delta = np.asarray(t, dtype=float) - t0
    mom = _u_moments(j, kappa, delta)
    acc = sum(math.comb(j, l) * t0 ** (j - l) * mom[l] for l in range(j + 1))
    return np.exp(1j * kappa * t0) * acc


def _pl_moment(times, vals, t, m):
    """Exact moment of the linear interpolant through (times, vals)."""
    h = times[1] - times[0]
    f0, f1 = vals[:-1], vals[1:]
    g = (f1 - f0) / h
    t0 = times[:-1]
    if m == 0:
        seg = f0 * h + g * h ** 2 / 2
    else:
        seg = t0 * (f0 * h + g * h ** 2 / 2) + f0 * h ** 2 / 2 + g * h ** 3 / 3
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    idx = np.clip(np.floor(t / h).astype(int), 0, len(times) - 2)
    u = t - times[idx]
    fi, gi, ti = f0[idx], g[idx], t0[idx]
    if m == 0:
        part = fi * u + gi * u ** 2 / 2
    else:
        part = ti * (fi * u + gi * u ** 2 / 2) + fi * u ** 2 / 2 + gi * u ** 3 / 3
    return cum[idx] + part


def _scaled_erf(u, v):
    """exp(-v^2) * erf(u - i v), stable for large v."""
    shape = np.shape(u)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    z = u - 1j * v
    pref = np.exp(-u ** 2 + 2j * u * v)
    pos = u >= 0
    out = np.empty(u.shape, dtype=complex)
    out[pos] = np.exp(-v * v) - pref[pos] * special.wofz(1j * z[pos])
    out[~pos] = -np.exp(-v * v) + pref[~pos] * special.wofz(-1j * z[~pos])
    return out.reshape(shape)


def _gaussian_moment(p, t, m):
    c, w = p.center, p.width
    om = p.omega or 0.0
    A = p.scale * np.exp(1j * (p.phase if p.omega is not None else 0.0))
    v = om * w / math.sqrt(2)
    s2w = math.sqrt(2) * w

    def zeroth(t):
        # int_0^t h(s) e^{i om s} ds
        return (s2w * math.sqrt(math.pi) / 2 * np.exp(1j * om * c)
                * (_scaled_erf((t - c) / s2w, v) - _scaled_erf(np.array(-c / s2w), v)))

    i0 = zeroth(t)
    if m == 0:
        return np.real(A * i0)

    def he(s):
        return np.exp(-0.5 * ((s - c) / w) ** 2 + 1j * om * s)

    shifted = -w * w * (he(t) - he(0.0)) + 1j * om * w * w * i0
    return np.real(A * (shifted + c * i0))


# -- public operations ----------------------------------------------------------


def _check_finite(*vals):
    for v in vals:
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("non-finite input")


def eval_field(p: PulseShape, E0, t):
    """E(t) = E0 f(t); exactly zero outside [0, tau]."""
    _check_finite(E0, t)
    out = E0 * p(t)
    return float(out) if np.ndim(out) == 0 else out


def momentum_transfer(p: PulseShape, t):
    """b0(t) = int_0^t f(s) ds."""
    _check_finite(t)
    out = p.moment_integral(t, 0)
    return float(out) if np.ndim(out) == 0 else out


def displacement(p: PulseShape, t):
    """c0(t) = t b0(t) - int_0^t s f(s) ds."""
    _check_finite(t)
    t = np.asarray(t, dtype=float)
    out = np.where(t > 0, t * p.moment_integral(t, 0) - p.moment_integral(t, 1), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def displacement_direct(p: PulseShape, t):
    """c0(t) as the adaptive-quadrature integral of b0 (second, independent route)."""
    _check_finite(t)
    t = float(t)
    if t <= 0:
        return 0.0
    breaks = [0.0, min(t, p.tau)]
    if p._pieces is not None:
        breaks += [b for t0, t1, _ in p._pieces for b in (t0, t1) if 0 < b < min(t, p.tau)]
    breaks = sorted(set(breaks))
    val = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        limit = 200 + int(4 * abs(p.omega or 0) * (b - a))
        val += integrate.quad(lambda s: momentum_transfer(p, s), a, b,
                              epsabs=0, epsrel=1e-13, limit=limit)[0]
    if t > p.tau:
        val += (t - p.tau) * momentum_transfer(p, p.tau)
    return val


@dataclass(frozen=True)
class PulseInvariants:
    """Classical invariants and regime of a pulse shape.

    ``b_scale = tau max|f|`` and ``c_scale = tau^2 max|f|`` normalise the
    comparisons against ``tol``.
    """

    b0_tau: float
    c0_tau: float
    a0: float
    regime: PulseClass
    tol: float
    b_scale: float
    c_scale: float
    c0_zeros: tuple
    c0_flat_intervals: tuple
    remark5_partition: tuple

    @property
    def b0_normalized(self):
        return self.b0_tau / self.b_scale

    @property
    def c0_normalized(self):
        return self.c0_tau / self.c_scale


def classify(p: PulseShape, tol=1e-10, nsamples=1024):
    """Compute b0(tau), c0(tau), the regime and the zero structure of c0."""
    if not 0 < tol <= 1e-3:
        raise InvalidInputError("tol must lie in (0, 1e-3]")
    fmax = p.max_abs
    if fmax == 0:
        raise ZeroPulseError("pulse shape vanishes identically")
    b = momentum_transfer(p, p.tau)
    c = displacement(p, p.tau)
    b_scale, c_scale = p.tau * fmax, p.tau ** 2 * fmax
    bn, an = abs(b) / b_scale, math.hypot(b / b_scale, c / c_scale)
    if bn > tol:
        regime = PulseClass.CASE_I
    elif an > tol:
        regime = PulseClass.CASE_II
    else:
        regime = PulseClass.CASE_III
    zeros, flats, part = c0_zero_structure(p, nsamples, tol)
    return PulseInvariants(b, c, math.hypot(b, c), regime, tol, b_scale, c_scale,
                           tuple(zeros), tuple(flats), tuple(part))


def c0_zero_structure(p: PulseShape, nsamples=1024, tol=1e-10):
    """Isolated zeros, flat intervals and the alternating flat/non-flat partition of c0.

    A sample counts as vanishing when ``|c0| <= tol tau^2 max|f|``.  Runs of at
    least three vanishing samples are flat intervals.  Note that a quadratic
    touch of zero spans about ``2 sqrt(2 tol) nsamples`` samples, so
    ``nsamples`` should stay well below ``1 / sqrt(tol)``.

    Returns
    -------
    zeros : list of float
    flats : list of (float, float)
    partition : list of float
        ``0 = t_0 <= t_1 < ... <= t_{2N+1} = tau``; intervals ``[t_{2j}, t_{2j+1}]``
        are flat (possibly empty at either end), the others are not.
    """
    if nsamples < 64:
        raise InvalidInputError("nsamples must be >= 64")
    tau = p.tau
    fmax = p.max_abs
    if fmax == 0:
        raise ZeroPulseError("pulse shape vanishes identically")
    thr = tol * tau ** 2 * fmax
    res = tau / (64 * nsamples)
    t = np.linspace(0.0, tau, nsamples + 1)
    c = displacement(p, t)
    below = np.abs(c) <= thr
    # c0 == 0 on an interval forces b0 == 0 there as well
    b_quiet = np.abs(momentum_transfer(p, t)) <= tol * tau * fmax

    def c0(s):
        return displacement(p, s)

    flats, short_runs = [], []
    i = 0
    while i <= nsamples:
        if below[i]:
            j = i
            while j + 1 <= nsamples and below[j + 1]:
                j += 1
            if j - i + 1 >= 3 and np.all(b_quiet[i:j + 1]):
                flats.append((i, j))
            else:
                short_runs.append((i, j))
            i = j + 1
        else:
            i += 1

    zeros = []
    for i, j in short_runs:
        k = i + int(np.argmin(np.abs(c[i:j + 1])))
        zeros.append(_refine_touch(c0, t, k, nsamples, res))
    for k in range(nsamples):
        if not below[k] and not below[k + 1] and np.sign(c[k]) != np.sign(c[k + 1]):
            zeros.append(_bisect(c0, t[k], t[k + 1], c[k], res))
    for k in range(1, nsamples):
        if below[k - 1] or below[k] or below[k + 1]:
            continue
        ak = abs(c[k])
        if ak <= abs(c[k - 1]) and ak <= abs(c[k + 1]) and np.sign(c[k - 1]) == np.sign(c[k + 1]) == np.sign(c[k]):
            tz = _refine_touch(c0, t, k, nsamples, res)
            if abs(c0(tz)) <= thr:
                zeros.append(tz)

    def quiet(s):
        return (abs(c0(s)) <= thr) and (abs(momentum_transfer(p, s)) <= tol * tau * fmax)

    flat_iv = [(_edge(quiet, t[i - 1], t[i], res) if i > 0 else 0.0,
                _edge(quiet, t[j + 1], t[j], res) if j < nsamples else tau) for i, j in flats]
    zeros = sorted(z for z in zeros if not any(a <= z <= b for a, b in flat_iv))
    dedup = []
    for z in zeros:
        if not dedup or z - dedup[-1] > res:
            dedup.append(float(z))

    ivs = list(flat_iv)
    if not ivs or ivs[0][0] > 0:
        ivs.insert(0, (0.0, 0.0))
    if ivs[-1][1] < tau:
        ivs.append((tau, tau))
    partition = [x for iv in ivs for x in iv]
    return dedup, flat_iv, partition


def _edge(pred, out, inn, res):
    """Boundary between ``out`` (pred False) and ``inn`` (pred True), to within res."""
    while abs(inn - out) > res:
        mid = 0.5 * (out + inn)
        if pred(mid):
            inn = mid
        else:
            out = mid
    return float(inn)


def _bisect(fun, a, b, fa, res):
    while b - a > res:
        m = 0.5 * (a + b)
        fm = fun(m)
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _refine_touch(fun, t, k, n, res):
    lo, hi = t[max(k - 1, 0)], t[min(k + 1, n)]
    r = optimize.minimize_scalar(lambda s: abs(fun(s)), bounds=(lo, hi), method="bounded",
                                 options={"xatol": min(res, 1e-9 * t[-1])})
    cand = [(abs(fun(t[k])), t[k]), (abs(r.fun), r.x)]
    return float(min(cand)[1])


# -- configuration ----------------------------------------------------------------


def load_sampled_csv(path):
    """Read a two-column ``t,f`` CSV with header into a sampled pulse."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(x) for x in r[:2]] for r in rows[1:] if r], dtype=float)
    if data.shape[0] < 2:
        raise InvalidInputError(f"{path}: need at least 2 samples")
    t, f = data[:, 0], data[:, 1]
    if abs(t[0]) > 1e-12:
        raise InvalidInputError(f"{path}: samples must start at t=0")
    steps = np.diff(t)
    if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * steps.mean():
        raise InvalidInputError(f"{path}: sample times must be uniformly spaced")
    return PulseShape.sampled_from(f, float(t[-1]))


def pulse_from_config(cfg, base_dir=None):
    """Build a pulse from a key-value mapping.

    Keys: ``kind`` (an envelope kind, ``sampled``, or the shortcuts ``cos`` /
    ``sin`` for whole carrier cycles), ``tau``, ``omega``, ``cycles``,
    ``phase``, ``ramp_fraction``, ``center``, ``width``, ``scale``,
    ``samples_path``, ``gap`` (field-free stretch of the ``gap`` kind).
    """
    cfg = dict(cfg)
    kind = cfg.pop("kind", "rectangular")
    scale = float(cfg.pop("scale", 1.0))
    if kind in ("cos", "sin"):
        omega = float(cfg.get("omega", 1.0))
        cycles = float(cfg.get("cycles", 1))
        maker = PulseShape.cos_cycles if kind == "cos" else PulseShape.sin_cycles
        return maker(cycles, omega, scale=scale)
    if kind == "gap":
        return PulseShape.gap_cycles(float(cfg.get("gap", 0.0)), float(cfg.get("omega", 1.0)), scale=scale)
    if kind == "sampled":
        path = Path(cfg["samples_path"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return load_sampled_csv(path).scaled(scale)
    tau = cfg.get("tau")
    omega = cfg.get("omega")
    if tau is None and omega is not None and "cycles" in cfg:
        tau = 2 * np.pi * float(cfg["cycles"]) / float(omega)
    if tau is None:
        raise InvalidInputError("pulse config needs tau (or omega and cycles)")
    kw = {k: float(cfg[k]) for k in ("phase", "ramp_fraction", "center", "width") if k in cfg}
    return PulseShape(kind, float(tau), omega=None if omega is None else float(omega),
                      scale=scale, **kw)


def describe(p: PulseShape):
    """Plain-dict description used in run manifests."""
    d = {"kind": p.kind, "tau": p.tau, "omega": p.omega, "phase": p.phase, "scale": p.scale}
    if p.kind == "trapezoidal":
        d["ramp_fraction"] = p.ramp_fraction
    if p.kind == "gaussian":
        d.update(center=p.center, width=p.width)
    if p.kind == "sampled":
        d["samples"] = [float(x) for x in p.samples]
    return d
