import math

import numpy as np
import pytest
from scipy.optimize import brentq

from ionlimit.errors import (BoundaryContaminationError, DisplacementExceedsGridError, GridTooSmallError,
                             InvalidInputError, NoBoundStateError, NormError, PartitionError, RegimeError,
                             WrapAroundError)
from ionlimit.pulse import PulseShape, displacement, momentum_transfer
from ionlimit.qdyn import (Grid1D, GridState, PotentialGrid, boost, bound_states, boosted_projection,
                           case1_bound_check, evolve, free_propagate, gauge_relate, ionization, propagate_kh,
                           propagate_length, remark5_product, sweep_amplitude, theorem2_deviation, translate)
from ionlimit.qdyn.grid import free_gaussian
from ionlimit.qdyn.potentials import shift_samples

SMALL = Grid1D(50.0, 1024)


@pytest.fixture(scope="module")
def soft():
    V = PotentialGrid.soft_core(SMALL, cutoff=40.0)
    P = bound_states(V)
    return V, P, P.state(0)


def guard(grid):
    return grid.dx ** 2 / math.pi


# -- grid and exact operations -----------------------------------------------------


def test_grid_validation_and_geometry():
    with pytest.raises(InvalidInputError):
        Grid1D(10.0, 1000)
    with pytest.raises(InvalidInputError):
        Grid1D(-1.0, 1024)
    g = Grid1D(10.0, 256)
    assert g.x[0] == -10.0 and g.dx == pytest.approx(20 / 256)
    assert np.max(np.abs(g.k)) == pytest.approx(g.k_max)


def test_free_gaussian_spreading_matches_closed_form():
    g = Grid1D(160.0, 4096)
    phi = GridState.gaussian(g, x0=-5.0, width=1.2, k0=0.8)
    for t in (0.0, 3.0, 25.0):
        out = free_propagate(phi, t)
        assert np.max(np.abs(out.psi - free_gaussian(g, t, -5.0, 1.2, 0.8))) <= 1e-6


def test_free_propagation_is_a_unitary_group():
    rng = np.random.default_rng(1)
    phi = GridState(SMALL, np.exp(-SMALL.x ** 2 / 8) * (1 + 0.1 * rng.normal(size=SMALL.n))).normalized()
    a = free_propagate(free_propagate(phi, 1.3), 2.1)
    b = free_propagate(phi, 3.4)
    assert (a - b).norm() <= 1e-12
    assert abs(b.norm() - 1) <= 1e-12
    assert (free_propagate(phi, 0.0) - phi).norm() <= 1e-14


def test_translate_and_boost():
    phi = GridState.gaussian(SMALL, x0=2.0, width=1.0)
    moved = translate(phi, 3.0)  # phi(x + 3)
    assert (moved - GridState.gaussian(SMALL, x0=-1.0, width=1.0)).norm() <= 1e-12
    assert (gauge_relate(phi, 0.0, 0.0) - phi).norm() <= 1e-14
    back = boost(boost(phi, 2.5), -2.5)
    assert (back - phi).norm() <= 1e-13
    assert abs(gauge_relate(phi, 4.0, -7.0).norm() - 1) <= 1e-12
    with pytest.raises(WrapAroundError):
        translate(phi, 60.0)
    with pytest.raises(WrapAroundError):
        translate(GridState.gaussian(SMALL, x0=-45.0), 10.0)
    with pytest.raises(InvalidInputError):
        boost(phi, 2 * SMALL.k_max)


# -- potentials --------------------------------------------------------------------


def test_shift_interpolation_is_exact_for_integer_shifts_and_cubics():
    v = np.arange(20.0) ** 3 - 4 * np.arange(20.0)
    np.testing.assert_array_equal(shift_samples(v, 3), np.concatenate([np.zeros(3), v[:-3]]))
    s = 2.37
    j = np.arange(20.0)
    interior = slice(5, 18)
    np.testing.assert_allclose(shift_samples(v, s)[interior], ((j - s) ** 3 - 4 * (j - s))[interior], rtol=1e-12)
    assert not np.any(shift_samples(v, 25.0))


def test_potential_guards():
    with pytest.raises(InvalidInputError):
        PotentialGrid.soft_core(SMALL)  # default cutoff 60 lies outside x_max = 50
    with pytest.raises(InvalidInputError):
        PotentialGrid.gaussian_well(Grid1D(5.0, 256), depth=1.0, width=3.0)
    V = PotentialGrid.square_well(SMALL, 2.0, 1.5)
    assert V.describe() == {"kind": "square-well", "depth": 2.0, "half_width": 1.5}


# -- bound states ------------------------------------------------------------------


def square_well_levels(depth, half_width):
    """Exact levels from the even/odd matching conditions, located by bisection."""
    z0 = half_width * math.sqrt(2 * depth)
    levels = []
    k = 0
    while k * math.pi / 2 < z0:
        lo, hi = k * math.pi / 2 + 1e-12, min((k + 1) * math.pi / 2, z0) - 1e-12
        if k % 2 == 0:
            fn = lambda z: z * math.tan(z) - math.sqrt(z0 ** 2 - z ** 2)
        else:
            fn = lambda z: -z / math.tan(z) - math.sqrt(z0 ** 2 - z ** 2)
        if fn(lo) * fn(hi) < 0:
            z = brentq(fn, lo, hi, xtol=1e-14)
            levels.append(z ** 2 / (2 * half_width ** 2) - depth)
        k += 1
    return levels


@pytest.mark.parametrize("depth, half_width", [(1.0, 0.5), (1.0, 2.0), (2.0, 2.0), (0.5, 6.0)])
def test_square_well_count_and_levels(depth, half_width):
    exact = square_well_levels(depth, half_width)
    g = Grid1D(40.0, 8192)
    P = bound_states(PotentialGrid.square_well(g, depth, half_width), max_count=32)
    assert len(P) == len(exact)
    np.testing.assert_allclose(P.energies, exact, atol=5e-3)


def test_soft_core_ground_energy_self_consistent_under_refinement():
    e = {n: bound_states(PotentialGrid.soft_core(Grid1D(150.0, n)), 1).energies[0] for n in (4096, 8192, 16384)}
    rich_a = (4 * e[8192] - e[4096]) / 3
    rich_b = (4 * e[16384] - e[8192]) / 3
    assert abs(rich_a - rich_b) <= 1e-6


def test_bound_state_errors():
    with pytest.raises(NoBoundStateError):
        bound_states(PotentialGrid(SMALL, "free", {}, np.zeros(SMALL.n)))
    with pytest.raises(GridTooSmallError):
        bound_states(PotentialGrid.gaussian_well(Grid1D(12.0, 256), depth=0.1, width=1.0))


def test_ionization_and_projector(soft):
    V, P, chi0 = soft
    assert ionization(chi0, P) == pytest.approx(0.0, abs=1e-12)
    mix = GridState(SMALL, (P.state(0).psi + P.state(1).psi) / math.sqrt(2))
    assert ionization(mix, P) == pytest.approx(0.0, abs=1e-12)
    far = GridState.gaussian(SMALL, x0=0.0, width=0.5, k0=30.0)
    assert ionization(far, P) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(NormError):
        ionization(GridState(SMALL, 1.1 * chi0.psi), P)
    rng = np.random.default_rng(3)
    u, v = (GridState(SMALL, rng.normal(size=SMALL.n) + 1j * rng.normal(size=SMALL.n)) for _ in range(2))
    Pv = P.project(v)
    assert (P.project(Pv) - Pv).norm() <= 1e-10
    assert abs(u.inner(Pv) - P.project(u).inner(v)) <= 1e-10


# -- propagation -------------------------------------------------------------------


def test_time_step_guard(soft):
    V, _, chi0 = soft
    with pytest.raises(InvalidInputError):
        evolve(chi0, V, 1.0, 1.01 * guard(SMALL))


def test_stationary_state_and_norm(soft):
    V, P, chi0 = soft
    out = evolve(chi0, V, 20.0, guard(SMALL))
    assert abs(chi0.inner(out)) ** 2 >= 1 - 1e-6
    assert abs(out.norm() - 1) <= 1e-8


def test_zero_field_gauges_coincide(soft):
    V, _, chi0 = soft
    p = PulseShape.sin_cycles(1, 2.0)
    a = propagate_length(chi0, V, p, 0.0, guard(SMALL))
    b = propagate_kh(chi0, V, p, 0.0, guard(SMALL))
    assert (a - b).norm() <= 1e-12


def test_gauge_equivalence_small_grid():
    g = Grid1D(80.0, 4096)
    V = PotentialGrid.soft_core(g, cutoff=50.0)
    P = bound_states(V)
    p = PulseShape.sin_cycles(1, 2.0)
    E0, dt = 3.0, guard(g)
    L = propagate_length(P.state(0), V, p, E0, dt)
    K = gauge_relate(propagate_kh(P.state(0), V, p, E0, dt),
                     E0 * momentum_transfer(p, p.tau), E0 * displacement(p, p.tau))
    assert abs(ionization(L, P) - ionization(K, P)) <= 1e-3
    assert abs(abs(L.inner(K)) - 1) <= 1e-6


def test_boundary_and_displacement_errors(soft):
    V, _, chi0 = soft
    runner = GridState.gaussian(SMALL, x0=40.0, width=1.0, k0=5.0)
    with pytest.raises(BoundaryContaminationError):
        evolve(runner, V, 5.0, guard(SMALL))
    with pytest.raises(DisplacementExceedsGridError):
        propagate_kh(chi0, V, PulseShape("rectangular", 1.0), 200.0, guard(SMALL))


def _convergence(V, P, p, E0, grid):
    dt = guard(grid)
    runs = []
    for step in (dt, dt / 2):
        kh = propagate_kh(P.state(0), V, p, E0, step)
        runs.append(ionization(gauge_relate(kh, E0 * momentum_transfer(p, p.tau), E0 * displacement(p, p.tau)), P))
    return abs(runs[0] - runs[1])


def test_time_step_convergence_per_pulse_class():
    g = Grid1D(64.0, 2048)
    soft_V = PotentialGrid.soft_core(g, cutoff=40.0)
    soft_P = bound_states(soft_V)
    well_V = PotentialGrid.square_well(g, 1.0, 2.0)
    well_P = bound_states(well_V)
    assert _convergence(well_V, well_P, PulseShape("rectangular", 1.0), 5.0, g) <= 1e-5
    assert _convergence(soft_V, soft_P, PulseShape.sin_cycles(1, 2.0), 5.0, g) <= 1e-5
    assert _convergence(soft_V, soft_P, PulseShape.cos_cycles(1, 2.0), 5.0, g) <= 1e-5


# -- probes ------------------------------------------------------------------------


def test_theorem2_deviation_basics(soft):
    V, _, chi0 = soft
    p = PulseShape.sin_cycles(1, 2.0)
    d0 = theorem2_deviation(chi0, V, p, 0.0, guard(SMALL))
    ref = (evolve(chi0, V, p.tau, guard(SMALL)) - free_propagate(chi0, p.tau)).norm()
    assert d0 == pytest.approx(ref, rel=1e-12)
    assert 0 < d0 <= 2
    with pytest.raises(RegimeError):
        theorem2_deviation(chi0, V, PulseShape.gap_cycles(1.0, 2.0), 1.0, guard(SMALL))


def test_case1_bound_check(soft):
    V, P, chi0 = soft
    with pytest.raises(RegimeError):
        case1_bound_check(chi0, V, PulseShape.sin_cycles(1, 2.0), 5.0, P)
    for E0 in (2.0, 8.0, 20.0):
        lhs, rhs = case1_bound_check(chi0, V, PulseShape("rectangular", 1.0), E0, P)
        assert 0 <= lhs <= rhs


def test_boosted_projection_identity(soft):
    V, P, chi0 = soft
    assert boosted_projection(chi0, 0.0, 0.0, P) == pytest.approx(1.0, abs=1e-12)
    assert boosted_projection(chi0, 20.0, 0.0, P) < 1e-6


def test_remark5_product_limits(soft):
    V, _, chi0 = soft
    dt = guard(SMALL)
    phi = GridState.gaussian(SMALL, x0=1.0, width=1.5)
    assert (remark5_product(phi, [0.0, 2.0], V, dt) - evolve(phi, V, 2.0, dt)).norm() <= 1e-12
    assert (remark5_product(phi, [0.0, 0.0, 2.0, 2.0], V, dt) - free_propagate(phi, 2.0)).norm() <= 1e-12
    mixed = remark5_product(phi, [0.0, 0.5, 1.5, 2.0], V, dt)
    ref = evolve(free_propagate(evolve(phi, V, 0.5, dt), 1.0), V, 0.5, dt)
    assert (mixed - ref).norm() <= 1e-12
    for bad in ([0.0, 1.0, 2.0], [0.5, 1.0], [0.0, 2.0, 1.0, 3.0]):
        with pytest.raises(PartitionError):
            remark5_product(phi, bad, V, dt)
    with pytest.raises(PartitionError):
        remark5_product(phi, [0.0, 1.0], V, dt, tau=2.0)


# -- sweep -------------------------------------------------------------------------


def test_sweep_rows_and_errors(soft, tmp_path):
    V, P, chi0 = soft
    p = PulseShape.sin_cycles(1, 2.0)
    res = sweep_amplitude(chi0, V, p, [0.0, 1.0, 3.0, 10.0, 200.0], guard(SMALL), bound_set=P, deviation=True)
    # FD eigenvectors are stationary under the spectral kinetic operator only to O(dx^2)
    assert res.rows[0].P_ion == pytest.approx(0.0, abs=1e-6)
    assert res.rows[-1].error.startswith("DisplacementExceedsGridError")
    assert np.isnan(res.rows[-1].P_ion)
    assert all(r.error is None for r in res.rows[:-1])
    csv = tmp_path / "s.csv"
    res.write(csv, tmp_path / "s.json")
    lines = csv.read_text().splitlines()
    assert lines[0] == ",".join(["E0", "P_ion"] + [f"pop_{n}" for n in range(len(P))] + ["dev_theorem2"])
    assert lines[-1].startswith("200,nan,")
    assert "row_errors" in (tmp_path / "s.json").read_text()


@pytest.mark.parametrize("grid, msg", [([1.0, 2.0, 5.0], "at least 4"), ([1.0, 3.0, 2.0, 10.0], "ascending"),
                                       ([1.0, 2.0, 3.0, 4.0], "decade")])
def test_sweep_amplitude_validation(soft, grid, msg):
    V, P, chi0 = soft
    with pytest.raises(InvalidInputError, match=msg):
        sweep_amplitude(chi0, V, PulseShape.sin_cycles(1, 2.0), grid, guard(SMALL), bound_set=P)
