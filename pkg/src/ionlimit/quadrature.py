"""Quadrature rules for half-line and oscillatory integrals.

Both rules refine by doubling the node count until successive results agree
to ``rtol`` (relative), with a hard cap on the number of nodes.
"""
import math

import numpy as np
from numpy.polynomial import legendre
from scipy import special

from .errors import AccuracyError

RTOL = 1e-11
MAX_NODES = 2 ** 20
ABS_FAIL = 1e-10
_TMAX = 4.4  # exp(pi/2 sinh 4.4) ~ 1e28


def exp_sinh(f, rtol=RTOL, max_nodes=MAX_NODES):
    """Integrate ``f`` over (0, inf) with the exp-sinh (double exponential) rule.

    ``f`` must accept an ndarray of positive abscissae and may return complex
    values.  Handles algebraic endpoint singularities at 0 and algebraic or
    exponential decay at infinity.

    Returns
    -------
    value, estimate : complex or float, float
        The integral and the absolute change at the last doubling.

    Raises
    ------
    AccuracyError
        When the node cap is reached with an error estimate above 1e-10.
    """
    h = 0.5
    t = np.arange(-_TMAX, _TMAX + h / 2, h)
    total = _es_sum(f, t)
    prev = h * total
    est = np.inf
    while True:
        h /= 2
        new_t = np.arange(-_TMAX + h, _TMAX, 2 * h)
        if len(t) + len(new_t) > max_nodes:
            break
        t = np.concatenate([t, new_t])
        total = total + _es_sum(f, new_t)
        cur = h * total
        est = abs(cur - prev)
        if est <= rtol * abs(cur) or cur == 0:
            return cur, est
        prev = cur
    if est > ABS_FAIL:
        raise AccuracyError("exp-sinh quadrature did not converge", est)
    return prev, est


def _es_sum(f, t):
    u = 0.5 * math.pi * np.sinh(t)
    s = np.exp(u)
    w = 0.5 * math.pi * np.cosh(t) * s
    vals = f(s) * w
    vals = np.where(np.isfinite(vals), vals, 0.0)
    return np.sum(vals)


def gauss_legendre(f, a, b, n):
    """n-point Gauss-Legendre rule on [a, b]."""
    x, w = legendre.leggauss(n)
    half = 0.5 * (b - a)
    return half * np.sum(w * f(0.5 * (a + b) + half * x))


def _filon_panel(g, a, b, omega, x, w, pn):
    """int_a^b g(l) exp(-i omega l) dl with g expanded in Legendre polynomials."""
    m, h = 0.5 * (a + b), 0.5 * (b - a)
    vals = g(m + h * x)
    n = len(x)
    deg = np.arange(n)
    coef = (2 * deg + 1) / 2 * (pn @ (w * vals))
    mom = 2 * (-1j) ** deg * special.spherical_jn(deg, omega * h)
    return h * np.exp(-1j * omega * m) * np.sum(coef * mom)


def filon_linear_phase(g, omega, start, stop, nodes=16, ratio=2.0):
    """``int_start^stop g(l) exp(-i omega l) dl`` on geometric panels.

    ``g`` is smooth on each panel; the oscillatory factor is integrated
    exactly against the Legendre expansion of ``g`` (a Filon-type rule), so
    the cost does not grow with ``omega``.
    """
    if not (0 <= start < stop):
        raise ValueError("need 0 <= start < stop")
    edges = [start] if start > 0 else [0.0, min(1.0, stop)]
    while edges[-1] < stop:
        edges.append(min(edges[-1] * ratio, stop))
    x, w = legendre.leggauss(nodes)
    pn = legendre.legvander(x, nodes - 1).T
    body = sum(_filon_panel(g, a, b, omega, x, w, pn) for a, b in zip(edges[:-1], edges[1:]))
    # leading endpoint term of the tail beyond ``stop``
    tail = g(np.array([stop]))[0] * np.exp(-1j * omega * stop) / (1j * omega) if omega else 0.0
    return body + tail


def filon_quadratic_phase(weight, tau, rtol=RTOL, max_nodes=MAX_NODES, p_max=None):
    """``int_0^inf weight(p) exp(-i tau p^2 / 2) dp`` on the real axis.

    Near the stationary point the integral is done in ``p`` with
    Gauss-Legendre over a window holding a few radians of phase; beyond it the
    substitution ``l = p^2/2`` makes the phase linear and the Filon rule takes
    over on geometric panels in ``l``.  ``weight`` must be even-smooth in ``p``
    (e.g. ``p^2 |psi(p)|^2``).
    """
    p1 = min(math.sqrt(8.0 / tau), 0.5) if tau > 0 else 0.5
    l1 = 0.5 * p1 * p1
    l_max = 0.5 * (p_max if p_max is not None else 1e4) ** 2

    def g(lam):
        p = np.sqrt(2 * lam)
        return weight(p) / p

    nodes = 16
    prev = None
    est = np.inf
    while 2 * nodes * (2 + math.log2(l_max / l1)) <= max_nodes:
        head = gauss_legendre(lambda p: weight(p) * np.exp(-0.5j * tau * p * p), 0.0, p1, 2 * nodes)
        cur = head + filon_linear_phase(g, tau, l1, l_max, nodes=nodes)
        if prev is not None:
            est = abs(cur - prev)
            if est <= rtol * abs(cur):
                return cur, est
        prev = cur
        nodes *= 2
    if est > ABS_FAIL:
        raise AccuracyError("Filon real-ray quadrature did not converge", est)
    return prev, est
