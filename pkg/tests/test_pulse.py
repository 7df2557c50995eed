import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from ionlimit.errors import InvalidInputError, ZeroPulseError
from ionlimit.pulse import (PulseClass, PulseShape, c0_zero_structure, classify, describe, displacement,
                            displacement_direct, eval_field, load_sampled_csv, momentum_transfer,
                            pulse_from_config)

ANALYTIC = [
    PulseShape("rectangular", 2.0),
    PulseShape("trapezoidal", 3.0, ramp_fraction=0.2),
    PulseShape("trapezoidal", 3.0, omega=2.5, phase=0.3, ramp_fraction=0.5),
    PulseShape("sin2", 4.0),
    PulseShape("sin2", 4.0, omega=3.0, phase=-0.7),
    PulseShape("gaussian", 5.0),
    PulseShape("gaussian", 5.0, omega=4.0, center=2.0, width=0.7),
    PulseShape.sin_cycles(2, 1.3),
    PulseShape.gap_cycles(0.8, 2.0),
]


def quad_moments(p, t, m):
    edges = [piece[0] for piece in (p._pieces or [])]
    brk = sorted(x for x in [p.tau * k / 8 for k in range(1, 8)] + edges if 0 < x < t)
    return integrate.quad(lambda s: s ** m * p(s), 0, t, points=brk or None, limit=400,
                          epsabs=1e-14, epsrel=1e-13)[0]


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("p", ANALYTIC, ids=lambda p: f"{p.kind}-{p.omega}")
def test_moments_match_adaptive_quadrature(p):
    for t in np.linspace(0, p.tau, 9):
        b_ref = quad_moments(p, t, 0)
        c_ref = t * b_ref - quad_moments(p, t, 1)
        assert momentum_transfer(p, t) == pytest.approx(b_ref, abs=1e-11)
        assert displacement(p, t) == pytest.approx(c_ref, abs=1e-10 * p.tau)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("p", ANALYTIC[:5], ids=lambda p: p.kind)
def test_displacement_identity_equals_direct_double_integral(p):
    for t in (0.3 * p.tau, 0.71 * p.tau, p.tau):
        assert displacement(p, t) == pytest.approx(displacement_direct(p, t), abs=1e-10)


def test_sampled_pulse_integrals_are_exact_for_piecewise_linear():
    rng = np.random.default_rng(7)
    f = rng.normal(size=41)
    p = PulseShape.sampled_from(f, 2.0)
    t = p.times
    h = t[1] - t[0]
    # b0 at nodes: trapezoid is exact; c0: Simpson is exact on quadratic b0
    b_nodes = np.concatenate([[0], np.cumsum(0.5 * h * (f[1:] + f[:-1]))])
    b_mid = b_nodes[:-1] + 0.5 * h * (f[:-1] + 0.5 * (f[:-1] + f[1:])) / 2
    c_nodes = np.concatenate([[0], np.cumsum(h / 6 * (b_nodes[:-1] + 4 * b_mid + b_nodes[1:]))])
    np.testing.assert_allclose(momentum_transfer(p, t), b_nodes, atol=1e-13)
    np.testing.assert_allclose(displacement(p, t), c_nodes, atol=1e-13)


@pytest.mark.parametrize("omega", [0.5, 1.0, 2.0, 3.0])
def test_single_sin_cycle_is_case_two_with_known_displacement(omega):
    inv = classify(PulseShape.sin_cycles(1, omega))
    assert inv.regime is PulseClass.CASE_II
    assert abs(inv.c0_tau - 2 * math.pi / omega ** 2) <= 1e-10 * 2 * math.pi / omega ** 2
    assert abs(inv.b0_normalized) <= 1e-10


@pytest.mark.parametrize("cycles", [1, 2, 5])
def test_cos_cycles_are_case_three(cycles):
    inv = classify(PulseShape.cos_cycles(cycles, 1.7))
    assert inv.regime is PulseClass.CASE_III
    assert abs(inv.b0_normalized) <= 1e-10 and abs(inv.c0_normalized) <= 1e-10
    np.testing.assert_allclose(inv.c0_zeros, 2 * math.pi / 1.7 * np.arange(cycles + 1), atol=1e-6)


def test_rectangular_is_case_one():
    inv = classify(PulseShape("rectangular", 1.5))
    assert inv.regime is PulseClass.CASE_I
    assert inv.b0_tau == pytest.approx(1.5)
    assert inv.c0_tau == pytest.approx(1.5 ** 2 / 2)
    assert str(inv.regime) == "CaseI"


def test_gap_pulse_has_flat_interval_across_the_gap():
    omega, gap = 2.0, 1.5
    zeros, flats, part = c0_zero_structure(PulseShape.gap_cycles(gap, omega))
    period = 2 * math.pi / omega
    assert len(flats) == 1
    assert flats[0] == pytest.approx((period, period + gap), abs=1e-4)
    assert part[0] == 0 and part[-1] == pytest.approx(2 * period + gap)
    assert zeros[0] == 0


def test_sin2_onset_is_not_flat():
    _, flats, part = c0_zero_structure(PulseShape("sin2", 10.0))
    assert flats == []
    assert part == [0.0, 0.0, 10.0, 10.0]


@settings(max_examples=25, deadline=None)
@given(omega=st.floats(0.5, 4.0), gap=st.floats(0.0, 3.0))
def test_partition_tiles_the_pulse(omega, gap):
    p = PulseShape.gap_cycles(gap, omega)
    _, flats, part = c0_zero_structure(p)
    part = np.asarray(part)
    assert part[0] == 0 and part[-1] == pytest.approx(p.tau)
    assert len(part) % 2 == 0 and np.all(np.diff(part) >= 0)
    for a, b in flats:
        assert any(np.isclose(part[2 * j], a) and np.isclose(part[2 * j + 1], b) for j in range(len(part) // 2))


@settings(max_examples=30, deadline=None)
@given(lam=st.floats(0.01, 100.0), tau=st.floats(0.5, 20.0), kind=st.sampled_from(["rectangular", "sin2", "gaussian"]))
def test_amplitude_scaling_leaves_regime_and_normalised_invariants(lam, tau, kind):
    p = PulseShape(kind, tau, omega=1.1)
    a, b = classify(p), classify(p.scaled(lam))
    assert a.regime is b.regime
    assert b.b0_tau == pytest.approx(lam * a.b0_tau, rel=1e-12, abs=1e-14 * lam * tau)
    assert b.b0_normalized == pytest.approx(a.b0_normalized, rel=1e-9, abs=1e-13)


def test_field_vanishes_outside_support_and_scales_with_amplitude():
    p = PulseShape.sin_cycles(1, 2.0)
    assert eval_field(p, 3.0, -0.1) == 0.0
    assert eval_field(p, 3.0, p.tau + 0.1) == 0.0
    assert eval_field(p, 3.0, 0.4) == pytest.approx(3.0 * math.sin(0.8))


@pytest.mark.parametrize("kwargs, err", [
    ({"kind": "square", "tau": 1.0}, InvalidInputError),
    ({"kind": "rectangular", "tau": 0.0}, InvalidInputError),
    ({"kind": "rectangular", "tau": math.inf}, InvalidInputError),
    ({"kind": "rectangular", "tau": 1.0, "omega": math.nan}, InvalidInputError),
    ({"kind": "trapezoidal", "tau": 1.0, "ramp_fraction": 0.7}, InvalidInputError),
    ({"kind": "rectangular", "tau": 1.0, "scale": 0.0}, ZeroPulseError),
    ({"kind": "sampled", "tau": 1.0, "samples": np.zeros(5)}, ZeroPulseError),
    ({"kind": "gap", "tau": 1.0, "omega": 1.0}, InvalidInputError),
])
def test_invalid_pulses_are_rejected(kwargs, err):
    with pytest.raises(err):
        PulseShape(**kwargs)


def test_non_finite_time_is_rejected():
    with pytest.raises(InvalidInputError):
        momentum_transfer(PulseShape("rectangular", 1.0), math.nan)


def test_sampled_csv_roundtrip_and_errors(tmp_path):
    good = tmp_path / "f.csv"
    t = np.linspace(0, 2, 21)
    good.write_text("t,f\n" + "\n".join(f"{a},{math.sin(a)}" for a in t))
    p = load_sampled_csv(good)
    assert p.tau == pytest.approx(2.0)
    assert p(1.0) == pytest.approx(math.sin(1.0))
    uneven = tmp_path / "u.csv"
    uneven.write_text("t,f\n0,1\n0.1,2\n0.3,1\n")
    with pytest.raises(InvalidInputError):
        load_sampled_csv(uneven)
    late = tmp_path / "l.csv"
    late.write_text("t,f\n0.5,1\n1,2\n1.5,1\n")
    with pytest.raises(InvalidInputError):
        load_sampled_csv(late)


def test_config_shortcuts():
    p = pulse_from_config({"kind": "cos", "cycles": 3, "omega": 2.0})
    assert p.tau == pytest.approx(3 * math.pi)
    assert classify(p).regime is PulseClass.CASE_III
    q = pulse_from_config({"kind": "sin2", "omega": 1.0, "cycles": 2})
    assert q.tau == pytest.approx(4 * math.pi)
    g = pulse_from_config({"kind": "gap", "omega": 2.0, "gap": 1.0})
    assert g.tau == pytest.approx(2 * math.pi + 1.0)
    assert describe(p)["kind"] == "rectangular"
    with pytest.raises(InvalidInputError):
        pulse_from_config({"kind": "rectangular"})
