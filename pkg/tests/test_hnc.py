import math

import numpy as np
import pytest

from qcmap.errors import ConvergenceError, DivergenceError, ValidationError
from qcmap.fermion import JelliumSpec, gr0_t0, ideal_structure_factor
from qcmap.grid import K_SPACE, RadialFn, build_grid, fourier_forward
from qcmap.hnc import (
    HncControls,
    PairPotential,
    SpeciesSpec,
    closure_residual,
    coulomb_pair_potential,
    oz_c_from_h,
    oz_h_from_c,
    oz_residual,
    s_of_k,
    solve_hnc,
    solve_hnc_multi,
    stacked_gamma,
)
from qcmap.pauli import extract_pauli


def soft(grid, amp=2.0):
    return PairPotential.short(RadialFn(grid, amp * np.exp(-grid.r**2)), "soft")


def ocp(gamma, n_points=2048):
    """One-component plasma at coupling Gamma (a = 1, T = 1/Gamma)."""
    a = 1.0
    n = 3.0 / (4.0 * math.pi * a**3)
    grid = build_grid(n_points, 60.0 * a)
    pot = coulomb_pair_potential(grid, gamma * a, a)
    return grid, n, solve_hnc(pot, SpeciesSpec(n, 1.0 / gamma, 1.0))


def test_zero_potential(grid):
    st = solve_hnc(PairPotential.zero(grid), SpeciesSpec(0.7))
    assert np.max(np.abs(st.g.values - 1)) < 1e-10
    assert np.max(np.abs(st.c.values)) < 1e-10
    assert np.max(np.abs(s_of_k(st, 0.7).values - 1)) < 1e-10
    assert st.s_k.space == K_SPACE


def test_low_density_limit(grid):
    pot = soft(grid)
    st = solve_hnc(pot, SpeciesSpec(1e-6))
    target = np.exp(-pot.short_range.values)
    assert np.sqrt(np.mean((st.g.values - target) ** 2)) < 1e-4


def test_self_consistency_invariants(grid):
    pot = soft(grid, 3.0)
    tol = 1e-9
    st = solve_hnc(pot, SpeciesSpec(0.4), controls=HncControls(tol=tol))
    assert st.residual <= tol
    assert np.all(st.g.values >= 0)
    assert oz_residual([[st]], [[pot]]) <= 10 * tol
    assert closure_residual(st, pot) <= 10 * tol
    assert len(st.residual_history) == st.iterations


def test_two_identical_species(grid):
    pot = soft(grid, 2.5)
    tol = 1e-9
    ctl = HncControls(tol=tol)
    one = solve_hnc(pot, SpeciesSpec(0.6), controls=ctl)
    two = solve_hnc_multi([SpeciesSpec(0.3), SpeciesSpec(0.3)], [[pot, pot], [pot, pot]],
                          controls=ctl)
    for row in two:
        for st in row:
            assert np.max(np.abs(st.g.values - one.g.values)) < 10 * tol


def test_multi_all_zero(grid):
    z = PairPotential.zero(grid)
    states = solve_hnc_multi([SpeciesSpec(0.1), SpeciesSpec(0.2), SpeciesSpec(0.3)],
                             [[z] * 3 for _ in range(3)])
    assert all(np.max(np.abs(s.g.values - 1)) < 1e-10 for row in states for s in row)
    assert stacked_gamma(states).shape == (3, 3, grid.n_points)


def test_oz_inversion(grid):
    h0 = RadialFn(grid, np.zeros(grid.n_points))
    assert np.all(oz_c_from_h(h0, 0.5).values == 0)
    spec = JelliumSpec(1.0, 1.0)
    g = build_grid(2048, 20.0)
    h = gr0_t0(spec, g).with_values(gr0_t0(spec, g).values - 1)
    n = spec.spin_density()
    c = oz_c_from_h(h, n)
    back = oz_h_from_c(c, n)
    assert np.max(np.abs(fourier_forward(back.values - h.values, g))) < 1e-10
    dilute = oz_c_from_h(h, 1e-12)
    assert np.max(np.abs(fourier_forward(dilute.values - h.values, g))) < 1e-9


def test_oz_rejects_unphysical_h(grid):
    h = RadialFn(grid, -5.0 * np.exp(-grid.r**2 / 4))
    with pytest.raises(ValidationError):
        oz_c_from_h(h, 10.0)


def test_structure_factor_round_trip_matches_ideal():
    spec = JelliumSpec(1.0, 1.0)
    grid = build_grid(2048, 20.0)
    g0 = gr0_t0(spec, grid)
    n = spec.spin_density()
    p = extract_pauli(g0, n, 1.0)
    st = solve_hnc(p.as_potential(), SpeciesSpec(n))
    assert np.max(np.abs(s_of_k(st, n).values - ideal_structure_factor(g0, n).values)) < 1e-3


@pytest.mark.parametrize("gamma", [0.1, 1.0, 10.0])
def test_ocp_hole_sum(gamma):
    grid, n, st = ocp(gamma)
    total = 4 * math.pi * n * grid.dr * np.sum(grid.r**2 * st.h.values)
    assert total == pytest.approx(-1.0, abs=0.02)


def test_ocp_debye_huckel_small_k():
    gamma = 0.1
    grid, n, st = ocp(gamma)
    kd2 = 4 * math.pi * n * gamma
    s = s_of_k(st, n).values
    k = grid.k
    small = k < 0.3 * math.sqrt(kd2)
    dh = k**2 / (k**2 + kd2)
    assert np.max(np.abs(s[small] - dh[small]) / dh[small]) < 0.05
    # perfect screening: S vanishes as k -> 0
    assert s[0] < s[5] < s[20]


def test_two_component_screening():
    n, t = 0.01, 1.0
    rs = (3 / (4 * math.pi * n)) ** (1 / 3)
    grid = build_grid(2048, 40 * rs)
    q = (1.0, -1.0)
    pots = [[coulomb_pair_potential(grid, q[i] * q[j] / t, rs, diffraction_length=0.5)
             for j in range(2)] for i in range(2)]
    states = solve_hnc_multi([SpeciesSpec(n / 2, t, qi) for qi in q], pots)
    for i in range(2):
        total = sum(
            (n / 2) * q[j] * q[i] * 4 * math.pi * grid.dr * np.sum(grid.r**2 * states[i][j].h.values)
            for j in range(2)
        )
        assert total == pytest.approx(-1.0, abs=0.02)
    assert oz_residual(states, pots) < 1e-7


def test_coulomb_split_reconstructs(grid):
    pot = coulomb_pair_potential(grid, 2.0, 1.3)
    assert np.allclose(pot.full_r, 2.0 / grid.r, rtol=1e-8, atol=0)
    diff = coulomb_pair_potential(grid, 2.0, 1.3, diffraction_length=0.4)
    far = grid.r > 14 * 0.4
    assert np.max(np.abs(diff.full_r - pot.full_r)[far]) < 1e-6
    with pytest.raises(ValidationError):
        coulomb_pair_potential(grid, 1.0, 0.0)
    with pytest.raises(ValidationError):
        coulomb_pair_potential(grid, 1.0, 1.0, diffraction_length=-1.0)


def test_monotone_residual_without_acceleration(grid):
    ctl = HncControls(mixing=0.2, ng_acceleration=False, tol=1e-9)
    for amp, n in [(2.0, 0.3), (1.0, 0.8)]:
        st = solve_hnc(soft(grid, amp), SpeciesSpec(n), controls=ctl)
        hist = np.asarray(st.residual_history)[5:]
        assert np.all(np.diff(hist) <= 1e-15)


def test_initialization_independence(grid):
    ctl = HncControls(tol=1e-10)
    near = solve_hnc(soft(grid, 2.2), SpeciesSpec(0.45), controls=ctl)
    cold = solve_hnc(soft(grid, 2.0), SpeciesSpec(0.5), controls=ctl)
    warm = solve_hnc(soft(grid, 2.0), SpeciesSpec(0.5), controls=ctl, initial_gamma=near.gamma)
    assert np.max(np.abs(cold.g.values - warm.g.values)) < 10 * ctl.tol
    assert warm.iterations <= cold.iterations


def test_max_iter_reports_diagnostics(grid):
    with pytest.raises(ConvergenceError) as err:
        solve_hnc(soft(grid), SpeciesSpec(0.5), controls=HncControls(max_iter=3))
    diag = err.value.diagnostics()
    assert diag["iterations"] == 3 and len(diag["residuals"]) == 3


def test_divergence_detected(grid):
    pot = PairPotential.short(RadialFn(grid, -8.0 * np.exp(-grid.r**2)))
    with pytest.raises(DivergenceError):
        solve_hnc(pot, SpeciesSpec(0.5), controls=HncControls(mixing=1.0, ng_acceleration=False))


def test_controls_validation():
    for bad in [dict(mixing=0.0), dict(mixing=1.5), dict(tol=0.0), dict(max_iter=0)]:
        with pytest.raises(ValidationError):
            HncControls(**bad)
    with pytest.raises(ValidationError):
        SpeciesSpec(0.0)
    with pytest.raises(ValidationError):
        SpeciesSpec(1.0, temperature=0.0)


def test_shape_validation(grid):
    z = PairPotential.zero(grid)
    with pytest.raises(ValidationError):
        solve_hnc_multi([SpeciesSpec(0.1), SpeciesSpec(0.1)], [[z]])
    other = PairPotential.zero(build_grid(512, 25.0))
    with pytest.raises(ValidationError):
        solve_hnc_multi([SpeciesSpec(0.1), SpeciesSpec(0.1)], [[z, other], [other, z]])


def test_potential_algebra(grid):
    a = coulomb_pair_potential(grid, 1.0, 1.0)
    b = soft(grid)
    s = (a + b).scaled(0.5)
    assert np.allclose(s.full_r, 0.5 * (a.full_r + b.full_r))
