"""Bohm's quantum potential for one-dimensional densities.

``Q = -(hbar^2/2m) R''/R`` with ``R = sqrt(n)``, evaluated with the
second-order centred stencil.  Points where the density falls to the node
threshold (and the two grid ends, where the stencil is undefined) are
masked; ``Q`` holds NaN there and ``valid`` records the mask.  Atomic units,
``hbar = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

NODE_THRESHOLD = 1e-10


@dataclass(frozen=True)
class LineGrid:
    n_points: int
    x_min: float
    x_max: float

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 16:
            raise ValidationError("LineGrid needs at least 16 points")
        if not self.x_max > self.x_min:
            raise ValidationError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, int(self.n_points))


@dataclass(frozen=True, eq=False)
class QuantumPotential:
    q: np.ndarray
    valid: np.ndarray


@dataclass(frozen=True, eq=False)
class BohmFields:
    """Density, amplitude, phase, quantum potential and current on a LineGrid.

    ``phase`` is None for stationary real states (constant S).
    """

    grid: LineGrid
    density: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray | None
    q: np.ndarray
    valid: np.ndarray
    current: np.ndarray
    mass: float = 1.0
    hbar: float = 1.0


def _as_density(n, grid: LineGrid) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if n.shape != (grid.n_points,):
        raise ValidationError(f"density has shape {n.shape}, grid has {grid.n_points} points")
    if np.any(n < 0) or not np.all(np.isfinite(n)):
        raise ValidationError("density must be finite and non-negative")
    if not np.any(n > 0):
        raise ValidationError("density is zero everywhere")
    return n


def quantum_potential(
    n, grid: LineGrid, mass: float = 1.0, hbar: float = 1.0,
    threshold: float = NODE_THRESHOLD,
) -> QuantumPotential:
    """Bohm potential of a sampled density, NaN outside the valid subdomain."""
    n = _as_density(n, grid)
    if not mass > 0:
        raise ValidationError("mass must be positive")
    # The second difference cancels all but ~(k dx)^2 of R, so rounding in R
    # is amplified by 1/(k dx)^2; extended precision (where the platform has
    # it) keeps that below the O(dx^2) truncation error on fine grids.
    R = np.sqrt(n.astype(np.longdouble))
    dx = (np.longdouble(grid.x_max) - np.longdouble(grid.x_min)) / (grid.n_points - 1)
    valid = n > threshold
    valid[0] = valid[-1] = False
    inner = valid[1:-1]
    ratio = (R[2:][inner] - 2 * R[1:-1][inner] + R[:-2][inner]) / R[1:-1][inner]
    q = np.full(n.shape, np.nan)
    q[valid] = (-(hbar**2 / (2.0 * mass)) * ratio / dx**2).astype(float)
    return QuantumPotential(q, valid)


def box_grid(level: int, width: float, per_level: int = 14000) -> LineGrid:
    """Grid on [0, a] whose spacing puts every node of level ``level`` on a sample."""
    return LineGrid(level * per_level + 1, 0.0, width)


def box_eigenstate(level: int, width: float, grid: LineGrid | None = None,
                   mass: float = 1.0) -> BohmFields:
    """Infinite-well eigenstate ``sqrt(2/a) sin(n pi x/a)`` as Bohm fields.

    The state is real, so the current vanishes identically and the phase is
    constant; all of the kinetic energy sits in Q.
    """
    if isinstance(level, bool) or int(level) != level or level < 1:
        raise ValidationError(f"level must be a positive integer, got {level!r}")
    if not width > 0:
        raise ValidationError("width must be positive")
    grid = grid or box_grid(int(level), width)
    if grid.x_min != 0.0 or grid.x_max != width:
        raise ValidationError("box grid must span [0, width]")
    # n x_i / a = n i/(N-1) exactly; reduce it to [-1/2, 1/2] in integers so
    # that sin keeps full relative accuracy next to both walls and every node
    den = grid.n_points - 1
    num = int(level) * np.arange(grid.n_points)
    turns = (num + den // 2) // den
    frac = (num - turns * den).astype(np.longdouble) / den
    psi = np.sqrt(np.longdouble(2.0) / np.longdouble(width)) * np.where(turns % 2, -1, 1) \
        * np.sin(np.longdouble(math.pi) * frac)
    n = (psi * psi).astype(float)
    qp = quantum_potential(n, grid, mass)
    return BohmFields(grid, n, np.sqrt(n), None, qp.q, qp.valid,
                      np.zeros_like(n), mass)


def fields_from_density(n, grid: LineGrid, phase=None, mass: float = 1.0) -> BohmFields:
    n = _as_density(n, grid)
    qp = quantum_potential(n, grid, mass)
    if phase is None:
        current = np.zeros_like(n)
    else:
        phase = np.asarray(phase, dtype=float)
        current = n * np.gradient(phase, grid.dx, edge_order=2) / mass
    return BohmFields(grid, n, np.sqrt(n), phase, qp.q, qp.valid, current, mass)


@dataclass(frozen=True)
class KineticCheck:
    integral_nq: float
    kinetic_energy: float
    residual: float


def kinetic_in_q(fields: BohmFields, norm_tol: float = 1e-6) -> KineticCheck:
    """Compare ``int n Q dx`` with ``(hbar^2/2m) int (R')^2 dx``.

    The derivative uses forward differences, the summation-by-parts partner
    of the centred second difference in Q, so for a density that vanishes at
    both ends the two sides agree up to the masked points.  Masked points
    contribute nothing to ``int n Q``.
    """
    if fields.phase is not None and np.ptp(fields.phase) > 0:
        raise ValidationError("kinetic_in_q needs a real stationary state (constant S)")
    g = fields.grid
    norm = float(np.sum(fields.density) * g.dx)
    if abs(norm - 1.0) > norm_tol:
        raise ValidationError(f"density is not normalized (integral = {norm:.12g})")
    nq = np.where(fields.valid, fields.density * np.nan_to_num(fields.q), 0.0)
    integral_nq = float(np.sum(nq) * g.dx)
    dR = np.diff(fields.amplitude) / g.dx
    ke = float(fields.hbar**2 / (2.0 * fields.mass) * np.sum(dR**2) * g.dx)
    return KineticCheck(integral_nq, ke, abs(integral_nq - ke) / abs(ke))


def continuity_residual(n_slices, s_slices, grid: LineGrid, dt: float,
                        mass: float = 1.0) -> np.ndarray:
    """``dn/dt + d/dx(n dS/dx / m)`` at the midpoints between time slices.

    Returns an array of shape (T-1, N): the time derivative is the slice
    difference, the flux divergence is averaged over the two slices, both
    second order.
    """
    n = np.asarray(n_slices, dtype=float)
    s = np.asarray(s_slices, dtype=float)
    if n.ndim != 2 or n.shape != s.shape or n.shape[1] != grid.n_points:
        raise ValidationError(
            f"density {n.shape} and phase {s.shape} slices must share a grid of "
            f"{grid.n_points} points"
        )
    if n.shape[0] < 2:
        raise ValidationError("need at least two time slices")
    if not dt > 0:
        raise ValidationError("dt must be positive")
    flux = n * np.gradient(s, grid.dx, axis=1, edge_order=2) / mass
    div = np.gradient(flux, grid.dx, axis=1, edge_order=2)
    return (n[1:] - n[:-1]) / dt + 0.5 * (div[1:] + div[:-1])
