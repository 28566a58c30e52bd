import math

import numpy as np
import pytest
import sympy as sp

from qcmap.bohm import (
    LineGrid,
    box_eigenstate,
    box_grid,
    continuity_residual,
    fields_from_density,
    kinetic_in_q,
    quantum_potential,
)
from qcmap.errors import ValidationError


def interior(fields, skip=5):
    """Valid points at least ``skip`` samples away from walls and nodes."""
    v = fields.valid.copy()
    bad = np.nonzero(~fields.valid)[0]
    idx = np.arange(v.size)
    for b in bad:
        v &= np.abs(idx - b) > skip
    return v


def gaussian_q_oracle(sigma, mass):
    x = sp.symbols("x", real=True)
    R = sp.exp(-x**2 / (2 * sigma**2))
    q = sp.simplify(-(1 / (2 * mass)) * sp.diff(R, x, 2) / R)
    return sp.lambdify(x, q, "numpy")


def test_box_ground_state_q_constant():
    f = box_eigenstate(1, 1.0)
    q = f.q[interior(f)]
    assert np.max(np.abs(q / (math.pi**2 / 2) - 1)) < 1e-8


@pytest.mark.parametrize("level", [1, 2, 3, 4, 5])
def test_kinetic_in_q(level):
    f = box_eigenstate(level, 1.0)
    kc = kinetic_in_q(f)
    assert kc.residual < 1e-6
    assert kc.integral_nq == pytest.approx((level * math.pi) ** 2 / 2, rel=1e-6)


@pytest.mark.parametrize("width,mass", [(2.0, 1.0), (1.0, 3.0)])
def test_box_scaling(width, mass):
    f = box_eigenstate(2, width, mass=mass)
    expected = (2 * math.pi / width) ** 2 / (2 * mass)
    assert np.max(np.abs(f.q[interior(f)] / expected - 1)) < 1e-8


def test_box_invariants():
    f = box_eigenstate(3, 1.5)
    assert np.sum(f.density) * f.grid.dx == pytest.approx(1.0, abs=1e-12)
    pos = f.density > 0
    assert np.allclose(f.amplitude[pos] ** 2, f.density[pos], rtol=1e-12, atol=0)
    assert np.all(f.current == 0) and f.phase is None


def test_box_node_excluded():
    f = box_eigenstate(2, 1.0)
    mid = np.argmin(np.abs(f.grid.x - 0.5))
    assert f.grid.x[mid] == pytest.approx(0.5, abs=1e-15)
    assert not f.valid[mid] and np.isnan(f.q[mid])
    assert not f.valid[0] and not f.valid[-1]


def test_second_order_convergence():
    errs = []
    for m in (64, 128, 256):
        f = box_eigenstate(1, 1.0, LineGrid(m + 1, 0.0, 1.0))
        errs.append(np.max(np.abs(f.q[f.valid] - math.pi**2 / 2)))
    assert errs[0] / errs[1] == pytest.approx(4.0, abs=0.5)
    assert errs[1] / errs[2] == pytest.approx(4.0, abs=0.5)


def test_gaussian_against_symbolic_oracle():
    sigma, mass = 0.7, 1.0
    g = LineGrid(4001, -4.0, 4.0)
    n = np.exp(-g.x**2 / sigma**2)
    qp = quantum_potential(n, g, mass)
    exact = gaussian_q_oracle(sigma, mass)(g.x)
    ok = qp.valid & (np.abs(g.x) < 2.5)
    assert np.max(np.abs(qp.q[ok] - exact[ok])) < 1e-4


def test_constant_density_has_zero_q():
    g = LineGrid(101, 0.0, 1.0)
    qp = quantum_potential(np.full(101, 0.3), g)
    assert np.max(np.abs(qp.q[qp.valid])) < 1e-10


def test_oscillator_kinetic_energy():
    omega = 1.3
    g = LineGrid(20001, -10.0, 10.0)
    n = math.sqrt(omega / math.pi) * np.exp(-omega * g.x**2)
    f = fields_from_density(n, g)
    kc = kinetic_in_q(f)
    assert kc.residual < 1e-6
    assert kc.kinetic_energy == pytest.approx(omega / 4, rel=1e-5)


def test_kinetic_preconditions():
    f = box_eigenstate(1, 1.0)
    doubled = fields_from_density(2 * f.density, f.grid)
    with pytest.raises(ValidationError):
        kinetic_in_q(doubled)
    moving = fields_from_density(f.density, f.grid, phase=0.5 * f.grid.x)
    with pytest.raises(ValidationError):
        kinetic_in_q(moving)
    assert np.allclose(moving.current, 0.5 * f.density)


def test_validation():
    with pytest.raises(ValidationError):
        LineGrid(8, 0.0, 1.0)
    with pytest.raises(ValidationError):
        LineGrid(32, 1.0, 1.0)
    g = LineGrid(32, 0.0, 1.0)
    with pytest.raises(ValidationError):
        quantum_potential(np.zeros(32), g)
    with pytest.raises(ValidationError):
        quantum_potential(-np.ones(32), g)
    with pytest.raises(ValidationError):
        quantum_potential(np.ones(31), g)
    for bad in (0, -1, 1.5, True):
        with pytest.raises(ValidationError):
            box_eigenstate(bad, 1.0)
    with pytest.raises(ValidationError):
        box_eigenstate(1, 0.0)
    assert box_grid(3, 2.0).n_points == 3 * 14000 + 1


# ---- continuity


def test_continuity_stationary_is_zero():
    f = box_eigenstate(2, 1.0, LineGrid(257, 0.0, 1.0))
    n = np.stack([f.density, f.density])
    s = np.zeros_like(n)
    assert np.all(continuity_residual(n, s, f.grid, 0.1) == 0)


def boosted_residual(m_pts, dt, v=0.8, sigma=0.5, mass=1.0):
    g = LineGrid(m_pts, -6.0, 6.0)
    times = np.array([0.0, dt])
    n = np.array([np.exp(-((g.x - v * t) / sigma) ** 2) for t in times])
    s = np.array([mass * v * g.x - 0.5 * mass * v**2 * t for t in times])
    res = continuity_residual(n, s, g, dt, mass)
    return np.max(np.abs(res[:, 5:-5]))


def test_continuity_galilean_boost_second_order():
    e1 = boosted_residual(401, 0.02)
    e2 = boosted_residual(801, 0.01)
    assert e1 / e2 == pytest.approx(4.0, abs=0.5)
    assert e2 < 2e-3


def test_continuity_pure_time_change(rng):
    g = LineGrid(64, 0.0, 1.0)
    n = rng.uniform(0.1, 1.0, size=(3, 64))
    dt = 0.05
    res = continuity_residual(n, np.zeros_like(n), g, dt)
    assert np.allclose(res, np.diff(n, axis=0) / dt)


def test_continuity_validation():
    g = LineGrid(32, 0.0, 1.0)
    with pytest.raises(ValidationError):
        continuity_residual(np.ones((2, 31)), np.ones((2, 31)), g, 0.1)
    with pytest.raises(ValidationError):
        continuity_residual(np.ones((1, 32)), np.ones((1, 32)), g, 0.1)
    with pytest.raises(ValidationError):
        continuity_residual(np.ones((2, 32)), np.ones((2, 32)), g, 0.0)
