"""Ornstein-Zernike / (M)HNC solver for uniform classical fluids.

The solver iterates on the short-range indirect correlation
``gamma_s = h - c - beta*phi_long`` (the long-range part of the pair
potential is carried analytically in k-space), so Coulomb systems are handled
without ever transforming a 1/r tail numerically.  One step is::

    g     = exp(-beta*phi_short + gamma_s + B)           closure
    c_s   = g - 1 - gamma_s
    C     = FT[c_s] - beta*phi_long(k)
    H     = (1 - C N)^-1 C                               matrix OZ, per k
    gamma_s_new = FT^-1[H - FT[c_s]]

followed by Picard mixing or, from iteration ``ng_start`` on, Ng's
three-point extrapolation.  With ``B = 0`` this is plain HNC.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf, erfc

from .errors import ConvergenceError, DivergenceError, ValidationError
from .grid import (
    K_SPACE,
    R_SPACE,
    RadialFn,
    RadialGrid,
    fourier_forward,
    fourier_inverse,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PairPotential:
    """Dimensionless pair interaction ``beta*phi`` split into short and long range.

    ``long_range_r`` and ``long_range_k`` are the same function in the two
    spaces; the k-space form is what enters the OZ step.
    """

    short_range: RadialFn
    long_range_r: RadialFn | None = None
    long_range_k: RadialFn | None = None
    label: str = ""

    def __post_init__(self):
        if self.short_range.space != R_SPACE:
            raise ValidationError("short_range must be an r-space function")
        if (self.long_range_r is None) != (self.long_range_k is None):
            raise ValidationError("long-range part needs both r- and k-space forms")
        if self.long_range_k is not None:
            if self.long_range_k.space != K_SPACE or self.long_range_r.space != R_SPACE:
                raise ValidationError("long-range forms carry the wrong space tags")
            for f in (self.long_range_r, self.long_range_k):
                if f.grid != self.short_range.grid:
                    raise ValidationError("potential parts live on different grids")

    @property
    def grid(self) -> RadialGrid:
        return self.short_range.grid

    @property
    def full_r(self) -> np.ndarray:
        v = self.short_range.values
        if self.long_range_r is not None:
            v = v + self.long_range_r.values
        return v

    @classmethod
    def zero(cls, grid: RadialGrid, label: str = "zero") -> "PairPotential":
        return cls(RadialFn(grid, np.zeros(grid.n_points)), label=label)

    @classmethod
    def short(cls, fn: RadialFn, label: str = "") -> "PairPotential":
        return cls(fn, label=label)

    def scaled(self, factor: float) -> "PairPotential":
        lr = lk = None
        if self.long_range_r is not None:
            lr = self.long_range_r.with_values(factor * self.long_range_r.values)
            lk = self.long_range_k.with_values(factor * self.long_range_k.values)
        return PairPotential(
            self.short_range.with_values(factor * self.short_range.values),
            lr, lk, self.label,
        )

    def __add__(self, other: "PairPotential") -> "PairPotential":
        if other.grid != self.grid:
            raise ValidationError("cannot add potentials on different grids")
        short = self.short_range.with_values(self.short_range.values + other.short_range.values)
        parts = [p for p in (self, other) if p.long_range_r is not None]
        lr = lk = None
        if parts:
            lr = parts[0].long_range_r.with_values(sum(p.long_range_r.values for p in parts))
            lk = parts[0].long_range_k.with_values(sum(p.long_range_k.values for p in parts))
        label = "+".join(x for x in (self.label, other.label) if x)
        return PairPotential(short, lr, lk, label)


def coulomb_pair_potential(
    grid: RadialGrid,
    coupling: float,
    r_c: float,
    diffraction_length: float | None = None,
    label: str = "coulomb",
) -> PairPotential:
    """``coupling/r`` (optionally times ``1 - exp(-r/lambda)``) with an erf split.

    ``coupling`` is ``beta*q1*q2``.  The long-range part
    ``coupling*erf(r/r_c)/r`` has the analytic transform
    ``4 pi coupling exp(-k^2 r_c^2/4)/k^2``.
    """
    if not r_c > 0:
        raise ValidationError("splitting radius r_c must be positive")
    r, k = grid.r, grid.k
    long_r = coupling * erf(r / r_c) / r
    long_k = 4.0 * np.pi * coupling * np.exp(-0.25 * (k * r_c) ** 2) / k**2
    if diffraction_length is None:
        short = coupling * erfc(r / r_c) / r
    else:
        if not diffraction_length > 0:
            raise ValidationError("diffraction length must be positive")
        short = coupling * (erfc(r / r_c) - np.exp(-r / diffraction_length)) / r
    return PairPotential(
        RadialFn(grid, short),
        RadialFn(grid, long_r),
        RadialFn(grid, long_k, K_SPACE),
        label,
    )


@dataclass(frozen=True)
class SpeciesSpec:
    """One classical fluid component (atomic units)."""

    density: float
    temperature: float = 1.0
    charge: float = 0.0
    mass: float = 1.0
    label: str = ""

    def __post_init__(self):
        if not (np.isfinite(self.density) and self.density > 0):
            raise ValidationError(f"density must be positive, got {self.density}")
        if not (np.isfinite(self.temperature) and self.temperature > 0):
            raise ValidationError(f"temperature must be positive, got {self.temperature}")
        if not self.mass > 0:
            raise ValidationError(f"mass must be positive, got {self.mass}")


@dataclass(frozen=True)
class HncControls:
    mixing: float = 0.5
    tol: float = 1e-8
    max_iter: int = 2000
    ng_acceleration: bool = True
    ng_start: int = 10
    divergence_window: int = 50

    def __post_init__(self):
        if not (0.0 < self.mixing <= 1.0):
            raise ValidationError(f"mixing must lie in (0, 1], got {self.mixing}")
        if not self.tol > 0:
            raise ValidationError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")

    def to_dict(self) -> dict:
        return {
            "mixing": self.mixing, "tol": self.tol, "max_iter": self.max_iter,
            "ng_acceleration": self.ng_acceleration, "ng_start": self.ng_start,
            "divergence_window": self.divergence_window,
        }


@dataclass(frozen=True, eq=False)
class HncState:
    """Converged pair correlations for one species pair.

    ``gamma`` is the short-range indirect correlation (the iteration
    variable) and can seed a later solve.  ``residual`` is the max-norm of
    the last unmixed fixed-point update over all pairs.
    """

    g: RadialFn
    h: RadialFn
    c: RadialFn
    s_k: RadialFn
    bridge: RadialFn
    gamma: RadialFn
    iterations: int
    residual: float
    residual_history: tuple = field(default=(), repr=False)
    densities: tuple = ()
    pair: tuple = (0, 0)


def oz_c_from_h(h: RadialFn, n: float) -> RadialFn:
    """Invert the one-component OZ relation: ``c(k) = h(k)/(1 + n h(k))``."""
    if h.space != R_SPACE:
        raise ValidationError("oz_c_from_h expects an r-space h")
    if not n >= 0:
        raise ValidationError("density must be non-negative")
    H = fourier_forward(h.values, h.grid)
    denom = 1.0 + n * H
    # S(k) = denom; a non-positive S means h is not the h of any stable fluid
    if np.min(denom[:-1]) < 1e-12:
        raise ValidationError("1 + n h(k) is not positive; h is unphysical for this density")
    return RadialFn(h.grid, fourier_inverse(H / denom, h.grid))


def oz_h_from_c(c: RadialFn, n: float) -> RadialFn:
    """Forward OZ relation: ``h(k) = c(k)/(1 - n c(k))``."""
    C = fourier_forward(c.values, c.grid)
    denom = 1.0 - n * C
    if np.min(denom[:-1]) < 1e-12:
        raise ValidationError("1 - n c(k) is not positive")
    return RadialFn(c.grid, fourier_inverse(C / denom, c.grid))


class _OzProblem:
    """Arrays for an m-component solve, shape (m, m, N)."""

    def __init__(self, densities, potentials, bridges):
        self.m = len(densities)
        self.grid = potentials[0][0].grid
        self.n = np.asarray(densities, dtype=float)
        self.sqrt_n = np.sqrt(self.n)
        m, npts = self.m, self.grid.n_points
        self.phi_s = np.zeros((m, m, npts))
        self.phi_lr = np.zeros((m, m, npts))
        self.phi_lk = np.zeros((m, m, npts))
        self.bridge = np.zeros((m, m, npts))
        for i in range(m):
            for j in range(m):
                p = potentials[i][j]
                if p.grid != self.grid:
                    raise ValidationError("all potentials must share one grid")
                self.phi_s[i, j] = p.short_range.values
                if p.long_range_k is not None:
                    self.phi_lr[i, j] = p.long_range_r.values
                    self.phi_lk[i, j] = p.long_range_k.values
                if bridges is not None and bridges[i][j] is not None:
                    b = bridges[i][j]
                    if b.grid != self.grid:
                        raise ValidationError("bridge function is on a different grid")
                    self.bridge[i, j] = b.values
        for a in (self.phi_s, self.phi_lr, self.phi_lk, self.bridge):
            if not np.allclose(a, a.transpose(1, 0, 2), rtol=0, atol=1e-14):
                raise ValidationError("pair potentials and bridges must be symmetric")

    def closure(self, gamma):
        with np.errstate(over="ignore"):
            g = np.exp(-self.phi_s + gamma + self.bridge)
        return g

    def oz(self, cs):
        """Return (H, Cs) in k-space for a short-range direct correlation."""
        Cs = fourier_forward(cs, self.grid)
        C = Cs - self.phi_lk
        # symmetric form: Hhat = (1 - Chat)^-1 Chat with Chat = N^1/2 C N^1/2
        sn = self.sqrt_n
        Chat = np.moveaxis(C * sn[:, None, None] * sn[None, :, None], -1, 0)
        eye = np.eye(self.m)
        Hhat = np.linalg.solve(eye - Chat, Chat)
        Hhat = 0.5 * (Hhat + np.swapaxes(Hhat, 1, 2))
        H = np.moveaxis(Hhat, 0, -1) / (sn[:, None, None] * sn[None, :, None])
        return H, Cs

    def step(self, gamma):
        g = self.closure(gamma)
        cs = g - 1.0 - gamma
        H, Cs = self.oz(cs)
        return fourier_inverse(H - Cs, self.grid), g


def _ng_extrapolate(fs, ds):
    """Ng's three-point combination of the last fixed-point outputs."""
    d0, d1, d2 = ds[-1].ravel(), ds[-2].ravel(), ds[-3].ravel()
    d01 = d0 - d1
    d02 = d0 - d2
    a = np.array([[d01 @ d01, d01 @ d02], [d02 @ d01, d02 @ d02]])
    b = np.array([d0 @ d01, d0 @ d02])
    try:
        c1, c2 = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        return None
    if not (np.isfinite(c1) and np.isfinite(c2)):
        return None
    return (1.0 - c1 - c2) * fs[-1] + c1 * fs[-2] + c2 * fs[-3]


def _iterate(problem: _OzProblem, controls: HncControls, gamma0):
    m, npts = problem.m, problem.grid.n_points
    gamma = np.zeros((m, m, npts)) if gamma0 is None else np.array(gamma0, dtype=float)
    if gamma.shape != (m, m, npts):
        raise ValidationError(f"initial gamma has shape {gamma.shape}")
    history = []
    fs, ds = [], []
    growth = 0
    for it in range(1, controls.max_iter + 1):
        new, g = problem.step(gamma)
        d = new - gamma
        if not (np.all(np.isfinite(new)) and np.all(np.isfinite(g))):
            pair = _worst_pair(np.nan_to_num(np.abs(d), nan=np.inf))
            raise DivergenceError(
                f"HNC iteration became non-finite at iteration {it} (pair {pair})",
                it, history, pair,
            )
        res = float(np.max(np.abs(d)))
        history.append(res)
        log.debug("hnc iteration %d residual %.3e", it, res)
        if res <= controls.tol:
            return gamma, g, it, res, history
        growth = growth + 1 if len(history) > 1 and res > history[-2] else 0
        if growth >= controls.divergence_window:
            pair = _worst_pair(np.abs(d))
            raise DivergenceError(
                f"residual grew for {growth} consecutive iterations (pair {pair})",
                it, history, pair,
            )
        fs.append(new)
        ds.append(d)
        del fs[:-3], ds[:-3]
        nxt = None
        if controls.ng_acceleration and it >= controls.ng_start and len(ds) == 3:
            nxt = _ng_extrapolate(fs, ds)
        gamma = gamma + controls.mixing * d if nxt is None else nxt
    pair = _worst_pair(np.abs(d))
    raise ConvergenceError(
        f"HNC did not converge in {controls.max_iter} iterations "
        f"(residual {history[-1]:.3e}, worst pair {pair})",
        controls.max_iter, history, pair,
    )


def _worst_pair(absd):
    per_pair = absd.max(axis=-1)
    i, j = np.unravel_index(int(np.argmax(per_pair)), per_pair.shape)
    return (int(min(i, j)), int(max(i, j)))


def _build_states(problem, gamma, g, iterations, residual, history):
    grid = problem.grid
    cs = g - 1.0 - gamma
    c = cs - problem.phi_lr
    Hk = fourier_forward(g - 1.0, grid)
    hist = tuple(history)
    dens = tuple(float(x) for x in problem.n)
    states = []
    for i in range(problem.m):
        row = []
        for j in range(problem.m):
            s = float(i == j) + problem.sqrt_n[i] * problem.sqrt_n[j] * Hk[i, j]
            row.append(HncState(
                g=RadialFn(grid, g[i, j]),
                h=RadialFn(grid, g[i, j] - 1.0),
                c=RadialFn(grid, c[i, j]),
                s_k=RadialFn(grid, s, K_SPACE),
                bridge=RadialFn(grid, problem.bridge[i, j]),
                gamma=RadialFn(grid, gamma[i, j]),
                iterations=iterations,
                residual=residual,
                residual_history=hist,
                densities=dens,
                pair=(i, j),
            ))
        states.append(row)
    return states


def solve_hnc(
    potential: PairPotential,
    species: SpeciesSpec,
    bridge: RadialFn | None = None,
    controls: HncControls | None = None,
    initial_gamma: RadialFn | None = None,
) -> HncState:
    """Solve the one-component OZ equation with the (M)HNC closure.

    Parameters
    ----------
    potential : PairPotential
        ``beta*phi`` already divided by the temperature.
    species : SpeciesSpec
        Only the density is used by the solve itself.
    bridge : RadialFn, optional
        Bridge function B(r); ``None`` means HNC.
    controls : HncControls, optional
    initial_gamma : RadialFn, optional
        Starting short-range indirect correlation, e.g. ``state.gamma`` from a
        nearby solve.

    Raises
    ------
    ConvergenceError
        ``max_iter`` exhausted.
    DivergenceError
        Residual grew for ``divergence_window`` consecutive iterations.
    """
    g0 = None if initial_gamma is None else initial_gamma.values[None, None, :]
    states = solve_hnc_multi(
        [species], [[potential]],
        None if bridge is None else [[bridge]],
        controls, g0,
    )
    return states[0][0]


def solve_hnc_multi(
    species: list[SpeciesSpec],
    potentials: list[list[PairPotential]],
    bridges: list[list[RadialFn | None]] | None = None,
    controls: HncControls | None = None,
    initial_gamma: np.ndarray | None = None,
) -> list[list[HncState]]:
    """Solve the matrix OZ equation ``H = C + C N H`` with per-pair HNC closures.

    Returns an m-by-m nested list of HncState; entry ``[i][j]`` describes the
    pair (i, j).  ``initial_gamma`` may be an (m, m, N) array.
    """
    controls = controls or HncControls()
    m = len(species)
    if m < 1:
        raise ValidationError("need at least one species")
    if len(potentials) != m or any(len(row) != m for row in potentials):
        raise ValidationError(f"potential matrix must be {m}x{m}")
    if bridges is not None and (
        len(bridges) != m or any(len(row) != m for row in bridges)
    ):
        raise ValidationError(f"bridge matrix must be {m}x{m}")
    problem = _OzProblem([s.density for s in species], potentials, bridges)
    gamma, g, it, res, hist = _iterate(problem, controls, initial_gamma)
    return _build_states(problem, gamma, g, it, res, hist)


def stacked_gamma(states: list[list[HncState]]) -> np.ndarray:
    """(m, m, N) array of the iteration variable, for warm starts."""
    return np.array([[s.gamma.values for s in row] for row in states])


def s_of_k(state: HncState, n: float) -> RadialFn:
    """One-component structure factor ``S(k) = 1 + n h(k)``."""
    if not n > 0:
        raise ValidationError("density must be positive")
    return RadialFn(state.g.grid, 1.0 + n * fourier_forward(state.h.values, state.g.grid), K_SPACE)


def oz_residual(states: list[list[HncState]], potentials: list[list[PairPotential]]) -> float:
    """Max-norm mismatch of a returned solution against one more OZ pass.

    Rebuilds ``gamma`` from the stored ``c`` through the matrix OZ relation and
    compares it with ``h - c``.  Independent of the iteration bookkeeping.
    """
    m = len(states)
    dens = states[0][0].densities
    problem = _OzProblem(dens, potentials, None)
    c = np.array([[s.c.values for s in row] for row in states])
    h = np.array([[s.h.values for s in row] for row in states])
    cs = c + problem.phi_lr
    H, Cs = problem.oz(cs)
    gamma_oz = fourier_inverse(H - Cs, problem.grid)
    gamma = h - c - problem.phi_lr
    # the r = r_max sample is a sine node and carries no OZ information
    return float(np.max(np.abs(gamma_oz - gamma)[..., :-1])) if m else 0.0


def closure_residual(state: HncState, potential: PairPotential) -> float:
    """Max-norm of ``g - exp(-beta*phi + h - c + B)``."""
    rhs = np.exp(-potential.full_r + state.h.values - state.c.values + state.bridge.values)
    return float(np.max(np.abs(state.g.values - rhs)))
