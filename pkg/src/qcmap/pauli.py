"""Pauli-exclusion potential: the classical pair repulsion that, fed through
the HNC closure, reproduces an ideal-fermion same-spin PDF.

Extraction is the HNC closure solved for the potential::

    beta*P(r) = -ln g0(r) + h(r) - c(r) + B(r),   h = g0 - 1,
    c(k) = h(k) / (1 + n_sigma h(k)).

This is exact algebra on the grid, so a forward HNC solve with ``beta*P``
returns ``g0`` up to the solver tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fermion import (
    JelliumSpec,
    UP,
    check_decaying_tail,
    gr0_finite_t,
)
from .grid import R_SPACE, RadialFn, build_grid, fourier_forward, fourier_inverse
from .hnc import HncControls, HncState, PairPotential, SpeciesSpec, oz_c_from_h, solve_hnc
from .io import fmt, read_table, write_table

G0_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class PauliPotential:
    """Dimensionless ``beta*P(r)`` plus the conventions it was extracted under."""

    beta_p: RadialFn
    r_s_of_extraction: float
    zeta: float
    cap_value: float
    t_over_ef: float = 0.0
    spin: str = UP

    @property
    def grid(self):
        return self.beta_p.grid

    @property
    def r_over_rs(self) -> np.ndarray:
        return self.grid.r / self.r_s_of_extraction

    def rescaled(self, r_s: float) -> "PauliPotential":
        """Same curve in r/r_s, carried onto the grid for another density."""
        if r_s == self.r_s_of_extraction:
            return self
        grid = self.grid.scaled(r_s / self.r_s_of_extraction)
        return PauliPotential(
            RadialFn(grid, self.beta_p.values), r_s, self.zeta,
            self.cap_value, self.t_over_ef, self.spin,
        )

    def as_potential(self) -> PairPotential:
        return PairPotential.short(self.beta_p, label=f"pauli-{self.spin}")


def _indirect(g0: RadialFn, n: float, bridge: RadialFn | None) -> np.ndarray:
    """``h - c + B`` as the forward solver sees it.

    Taken as FT^-1[H - C] rather than ``h - c`` so that the r = r_max sample
    (a sine node, where the inverse transform is always zero) agrees with
    the solver's own fixed point.
    """
    h = g0.with_values(g0.values - 1.0)
    H = fourier_forward(h.values, g0.grid)
    C = fourier_forward(oz_c_from_h(h, n).values, g0.grid)
    gamma = fourier_inverse(H - C, g0.grid)
    return gamma + (0.0 if bridge is None else bridge.values)


def extract_pauli(
    g0: RadialFn,
    n: float,
    r_s: float | None = None,
    zeta: float = 1.0,
    t_over_ef: float = 0.0,
    spin: str = UP,
    bridge: RadialFn | None = None,
    floor: float = G0_FLOOR,
) -> PauliPotential:
    """Invert the HNC closure for the potential that yields ``g0``.

    Parameters
    ----------
    g0 : RadialFn
        Target same-spin PDF, tending to 1 at large r.
    n : float
        Density of the spin species (``n_sigma``).
    r_s : float, optional
        Wigner-Seitz radius of the whole fluid, stored for the r/r_s axis.
        Defaults to the radius of a fully polarized fluid of density ``n``.
    zeta, t_over_ef, spin
        Metadata recorded with the potential.
    bridge : RadialFn, optional
        Must be the same bridge later used for the forward solve.
    floor : float
        Where ``g0 < floor`` the potential is held at the value reached at
        ``g0 = floor`` (the cap), extended flat to the origin.
    """
    if g0.space != R_SPACE:
        raise ValidationError("g0 must be an r-space function")
    if np.any(g0.values < 0):
        raise ValidationError("g0 is negative somewhere")
    if not n > 0:
        raise ValidationError("density must be positive")
    check_decaying_tail(g0, what="g0")
    if r_s is None:
        r_s = (3.0 / (4.0 * np.pi * n)) ** (1.0 / 3.0)

    rest = _indirect(g0, n, bridge)
    low = g0.values < floor
    if np.any(low):
        edge = int(np.nonzero(low)[0].max())
        cap = -np.log(floor) + rest[edge]
    else:
        cap = -np.log(floor) + rest[0]
    with np.errstate(divide="ignore"):
        raw = -np.log(np.where(low, 1.0, g0.values)) + rest
    beta_p = np.where(low, cap, raw)
    return PauliPotential(
        RadialFn(g0.grid, beta_p), float(r_s), float(zeta), float(cap),
        float(t_over_ef), spin,
    )


def closure_identity_error(p: PauliPotential, g0: RadialFn, n: float,
                           bridge: RadialFn | None = None) -> float:
    """Max |exp(-beta*P + gamma + B) - g0| with no forward solve involved."""
    g = np.exp(-p.beta_p.values + _indirect(g0, n, bridge))
    ok = g0.values >= G0_FLOOR
    return float(np.max(np.abs(g - g0.values)[ok]))


@dataclass(frozen=True, eq=False)
class PauliCheck:
    rms_error: float
    state: HncState
    target: RadialFn


def verify_pauli(
    p: PauliPotential,
    spec: JelliumSpec,
    controls: HncControls | None = None,
    bridge: RadialFn | None = None,
) -> PauliCheck:
    """Forward-solve HNC with ``beta*P`` alone and compare with the ideal g0.

    If ``spec.r_s`` differs from the extraction radius, the potential is
    carried over at fixed r/r_s.
    """
    if spec.zeta != p.zeta:
        raise ValidationError(f"zeta mismatch: potential {p.zeta}, spec {spec.zeta}")
    t_over_ef = spec.temperature / spec.fermi_energy(p.spin)
    if abs(t_over_ef - p.t_over_ef) > 1e-12 * max(1.0, p.t_over_ef):
        raise ValidationError(
            f"T/E_F mismatch: potential {p.t_over_ef}, spec {t_over_ef}"
        )
    p = p.rescaled(spec.r_s)
    target = gr0_finite_t(spec, p.grid, p.spin)
    n_sigma = spec.spin_density(p.spin)
    state = solve_hnc(p.as_potential(), SpeciesSpec(n_sigma), bridge, controls)
    rms = float(np.sqrt(np.mean((state.g.values - target.values) ** 2)))
    return PauliCheck(rms, state, target)


def write_pauli(p: PauliPotential, path):
    """Two-column text (r/r_s, beta*P) with metadata lines; re-reads bit-exactly."""
    meta = {
        "kind": "pauli-potential",
        "zeta": fmt(p.zeta),
        "t_over_ef": fmt(p.t_over_ef),
        "cap_value": fmt(p.cap_value),
        "r_s": fmt(p.r_s_of_extraction),
        "n_points": p.grid.n_points,
        "r_max": fmt(p.grid.r_max),
        "spin": p.spin,
    }
    return write_table(path, ["r_over_rs", "beta_p"], [p.r_over_rs, p.beta_p.values],
                       meta, delimiter=" ")


def read_pauli(path) -> PauliPotential:
    meta, names, cols = read_table(path, delimiter=" ")
    if meta.get("kind") != "pauli-potential" or names != ["r_over_rs", "beta_p"]:
        raise ValidationError(f"{path} is not a Pauli potential table")
    grid = build_grid(int(meta["n_points"]), float(meta["r_max"]))
    r_s = float(meta["r_s"])
    if not np.array_equal(cols["r_over_rs"], grid.r / r_s):
        raise ValidationError("r/r_s column does not match the declared grid")
    return PauliPotential(
        RadialFn(grid, cols["beta_p"]), r_s, float(meta["zeta"]),
        float(meta["cap_value"]), float(meta["t_over_ef"]), meta.get("spin", UP),
    )
