import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcmap.errors import ValidationError
from qcmap.grid import (
    K_SPACE,
    R_SPACE,
    RadialFn,
    build_grid,
    ft_k_to_r,
    ft_r_to_k,
    radial_integral,
    value_at_origin,
)


def test_grid_arithmetic():
    g = build_grid(1024, 25.0)
    assert g.dr == pytest.approx(25.0 / 1024)
    assert g.dk == pytest.approx(math.pi / 25.0)
    assert g.dr * g.dk == pytest.approx(math.pi / 1024, rel=1e-15)
    assert g.r[0] == pytest.approx(g.dr)
    assert g.r[-1] == pytest.approx(25.0)
    assert len(g.k) == 1024


def test_smallest_grid():
    assert build_grid(64, 1.0).n_points == 64


@pytest.mark.parametrize("n,rmax", [(100, 10.0), (32, 1.0), (1024, 0.0), (1024, -2.0), (0, 1.0)])
def test_bad_grid(n, rmax):
    with pytest.raises(ValidationError):
        build_grid(n, rmax)


def test_meshes_are_read_only(grid):
    with pytest.raises(ValueError):
        grid.r[0] = 1.0


def test_radial_fn_rejects_nonfinite(grid):
    v = np.zeros(grid.n_points)
    v[3] = np.nan
    with pytest.raises(ValidationError):
        RadialFn(grid, v)
    with pytest.raises(ValidationError):
        RadialFn(grid, np.zeros(5))


def test_gaussian_transform(grid):
    f = RadialFn(grid, np.exp(-grid.r**2))
    F = ft_r_to_k(f)
    assert F.space == K_SPACE
    exact = math.pi**1.5 * np.exp(-grid.k**2 / 4)
    assert np.max(np.abs(F.values - exact)) < 1e-12
    back = ft_k_to_r(RadialFn(grid, exact, K_SPACE))
    assert np.max(np.abs(back.values - f.values)) < 1e-12


def test_zero_and_linearity(grid, rng):
    assert np.all(ft_r_to_k(RadialFn(grid, np.zeros(grid.n_points))).values == 0)
    assert np.all(ft_k_to_r(RadialFn(grid, np.zeros(grid.n_points), K_SPACE)).values == 0)
    a = np.exp(-grid.r**2) * rng.normal(size=grid.n_points)
    b = np.exp(-0.5 * grid.r)
    lhs = ft_r_to_k(RadialFn(grid, 2 * a - 3 * b)).values
    rhs = 2 * ft_r_to_k(RadialFn(grid, a)).values - 3 * ft_r_to_k(RadialFn(grid, b)).values
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_space_tags(grid):
    f = RadialFn(grid, np.exp(-grid.r))
    with pytest.raises(ValidationError):
        ft_k_to_r(f)
    with pytest.raises(ValidationError):
        ft_r_to_k(ft_r_to_k(f))
    assert ft_k_to_r(ft_r_to_k(f)).space == R_SPACE


@settings(max_examples=25, deadline=None)
@given(width=st.floats(0.3, 3.0), shift=st.floats(0.0, 5.0), power=st.integers(0, 3))
def test_round_trip_property(width, shift, power):
    g = build_grid(2048, 40.0)
    vals = g.r**power * np.exp(-((g.r - shift) / width) ** 2)
    f = RadialFn(g, vals)
    back = ft_k_to_r(ft_r_to_k(f)).values
    assert np.sqrt(np.mean((back - vals) ** 2)) < 1e-10


def test_parseval(grid):
    f = np.exp(-grid.r**2)
    F = ft_r_to_k(RadialFn(grid, f)).values
    lhs = np.sum(4 * np.pi * grid.r**2 * f**2) * grid.dr
    rhs = np.sum(grid.k**2 * F**2) * grid.dk / (2 * np.pi**2)
    assert abs(lhs - rhs) / lhs < 1e-8
    assert lhs == pytest.approx((np.pi / 2) ** 1.5, rel=1e-10)


def test_origin_and_integral(grid):
    f = RadialFn(grid, np.exp(-grid.r**2))
    assert value_at_origin(f) == pytest.approx(1.0, abs=1e-5)
    assert radial_integral(f.values, grid) == pytest.approx(np.pi**1.5, rel=1e-10)


def test_scaled_grid():
    g = build_grid(256, 10.0)
    s = g.scaled(5.0)
    assert s.n_points == 256 and s.r_max == 50.0
