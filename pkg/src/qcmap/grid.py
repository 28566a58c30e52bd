"""Radial meshes and 3-D Fourier-Bessel transforms.

The r-mesh is ``r_i = i*dr`` for ``i = 1..N`` with ``dr = r_max/N`` and the
conjugate k-mesh is ``k_j = j*pi/r_max``, so that ``dr*dk = pi/N``.  With this
pairing ``sin(k_j r_i) = sin(pi*i*j/N)`` and both transforms reduce to a type-I
discrete sine transform of length ``N - 1``.  The last point (``i = N`` or
``j = N``) is a node of every sine and always maps to zero.

Normalization pair (radially symmetric functions in three dimensions)::

    F(k) = (4*pi/k)      * integral dr r f(r) sin(kr)
    f(r) = 1/(2*pi**2*r) * integral dk k F(k) sin(kr)

Discretized by the rectangle rule these two sums are exact inverses on the
grid, because ``sum_j sin(pi*i*j/N) sin(pi*l*j/N) = (N/2) delta_il``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.fft import dst

from .errors import ValidationError

R_SPACE = "r"
K_SPACE = "k"


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial mesh with its conjugate wavenumber mesh."""

    n_points: int
    r_max: float

    def __post_init__(self):
        n = self.n_points
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise ValidationError(f"n_points must be an integer, got {n!r}")
        if n < 64 or n & (n - 1):
            raise ValidationError(f"n_points must be a power of two >= 64, got {n}")
        if not np.isfinite(self.r_max) or self.r_max <= 0:
            raise ValidationError(f"r_max must be positive, got {self.r_max}")
        object.__setattr__(self, "n_points", int(n))
        object.__setattr__(self, "r_max", float(self.r_max))

    @property
    def dr(self) -> float:
        return self.r_max / self.n_points

    @property
    def dk(self) -> float:
        return np.pi / self.r_max

    @cached_property
    def r(self) -> np.ndarray:
        return _readonly(np.arange(1, self.n_points + 1) * self.dr)

    @cached_property
    def k(self) -> np.ndarray:
        return _readonly(np.arange(1, self.n_points + 1) * self.dk)

    def scaled(self, factor: float) -> "RadialGrid":
        """Same number of points, all lengths multiplied by ``factor``."""
        return RadialGrid(self.n_points, self.r_max * factor)

    def to_dict(self) -> dict:
        return {"n_points": self.n_points, "r_max": self.r_max}


def build_grid(n_points: int, r_max: float) -> RadialGrid:
    """Construct a radial grid; raises ValidationError on illegal sizes."""
    return RadialGrid(n_points, r_max)


@dataclass(frozen=True, eq=False)
class RadialFn:
    """Real function sampled on a RadialGrid, tagged with the space it lives in."""

    grid: RadialGrid
    values: np.ndarray
    space: str = R_SPACE

    def __post_init__(self):
        if self.space not in (R_SPACE, K_SPACE):
            raise ValidationError(f"space must be 'r' or 'k', got {self.space!r}")
        v = _readonly(self.values)
        if v.shape != (self.grid.n_points,):
            raise ValidationError(
                f"values has shape {v.shape}, grid needs ({self.grid.n_points},)"
            )
        if not np.all(np.isfinite(v)):
            raise ValidationError("RadialFn values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def mesh(self) -> np.ndarray:
        return self.grid.r if self.space == R_SPACE else self.grid.k

    def with_values(self, values) -> "RadialFn":
        return RadialFn(self.grid, values, self.space)


def _sine_sum(x: np.ndarray) -> np.ndarray:
    """``out[j] = sum_i x[i] sin(pi*(i+1)*(j+1)/N)`` for arrays of length N.

    Works along the last axis; the final sample is a sine node on both sides.
    """
    out = np.zeros_like(x, dtype=float)
    # scipy's unnormalized DST-I carries a factor of 2
    out[..., :-1] = 0.5 * dst(x[..., :-1], type=1, axis=-1)
    return out


def fourier_forward(values: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Array version of :func:`ft_r_to_k`; transforms along the last axis."""
    k = grid.k
    return (4.0 * np.pi * grid.dr / k) * _sine_sum(np.asarray(values) * grid.r)


def fourier_inverse(values: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Array version of :func:`ft_k_to_r`; transforms along the last axis."""
    r = grid.r
    return (grid.dk / (2.0 * np.pi**2 * r)) * _sine_sum(np.asarray(values) * grid.k)


def ft_r_to_k(f: RadialFn) -> RadialFn:
    """Forward 3-D radial transform ``F(k) = (4 pi/k) int dr r f(r) sin(kr)``."""
    if f.space != R_SPACE:
        raise ValidationError("ft_r_to_k expects an r-space function")
    return RadialFn(f.grid, fourier_forward(f.values, f.grid), K_SPACE)


def ft_k_to_r(F: RadialFn) -> RadialFn:
    """Inverse transform ``f(r) = 1/(2 pi^2 r) int dk k F(k) sin(kr)``."""
    if F.space != K_SPACE:
        raise ValidationError("ft_k_to_r expects a k-space function")
    return RadialFn(F.grid, fourier_inverse(F.values, F.grid), R_SPACE)


def value_at_origin(f: RadialFn) -> float:
    """Quadratic extrapolation of ``f`` to ``r = 0`` from the first three samples."""
    v = f.values
    return float(3.0 * v[0] - 3.0 * v[1] + v[2])


def radial_integral(values: np.ndarray, grid: RadialGrid) -> float:
    """``int 4 pi r^2 f(r) dr`` with the same rectangle rule as the transforms."""
    return float(4.0 * np.pi * grid.dr * np.sum(grid.r**2 * values))
