"""Ideal (non-interacting) fermion pair-distribution functions.

Conventions
-----------
Hartree atomic units throughout.  The total density is ``n = 3/(4 pi r_s^3)``
and the spin densities are ``n_up = n(1+zeta)/2``, ``n_down = n(1-zeta)/2``.
Each spin species has its own Fermi momentum ``k_F = (6 pi^2 n_sigma)^(1/3)``;
for the unpolarized fluid this is ``1/(alpha r_s)`` with
``alpha = (4/(9 pi))^(1/3) = 0.52106...``.

Every spin-resolved g is normalized to 1 at large r.  The alternative
convention in which the unpolarized spin-resolved functions tend to 1/2 is an
output option only (``normalization="half"``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, quad_vec
from scipy.optimize import brentq
from scipy.special import expit, spherical_jn

from .errors import NumericalError, ValidationError
from .grid import K_SPACE, R_SPACE, RadialFn, RadialGrid, fourier_forward

ALPHA = (4.0 / (9.0 * math.pi)) ** (1.0 / 3.0)
ALPHA_5_DIGITS = 0.52106

UP = "up"
DOWN = "down"
SPINS = (UP, DOWN)

# occupation cut-off: exp(-37) < 1e-16
_OCC_LOG_CUT = 37.0


@dataclass(frozen=True)
class JelliumSpec:
    """Uniform electron fluid: Wigner-Seitz radius, polarization, temperature."""

    r_s: float
    zeta: float = 1.0
    temperature: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.r_s) and self.r_s > 0):
            raise ValidationError(f"r_s must be positive, got {self.r_s}")
        if not (0.0 <= self.zeta <= 1.0):
            raise ValidationError(f"zeta must lie in [0, 1], got {self.zeta}")
        if not (np.isfinite(self.temperature) and self.temperature >= 0):
            raise ValidationError(f"temperature must be >= 0, got {self.temperature}")

    @property
    def density(self) -> float:
        return 3.0 / (4.0 * math.pi * self.r_s**3)

    def spin_density(self, spin: str = UP) -> float:
        sign = _spin_sign(spin)
        return 0.5 * self.density * (1.0 + sign * self.zeta)

    def kf_rs(self, spin: str = UP) -> float:
        """Dimensionless product ``k_F * r_s`` for one spin; depends on zeta only."""
        frac = 1.0 + _spin_sign(spin) * self.zeta
        return frac ** (1.0 / 3.0) / ALPHA

    def fermi_momentum(self, spin: str = UP) -> float:
        return self.kf_rs(spin) / self.r_s

    def fermi_energy(self, spin: str = UP) -> float:
        return 0.5 * self.fermi_momentum(spin) ** 2

    def present_spins(self) -> tuple[str, ...]:
        return tuple(s for s in SPINS if self.spin_density(s) > 0)


def _spin_sign(spin: str) -> int:
    if spin == UP:
        return 1
    if spin == DOWN:
        return -1
    raise ValidationError(f"spin must be 'up' or 'down', got {spin!r}")


def exchange_amplitude(x) -> np.ndarray:
    """``3 j1(x)/x`` with its Taylor series near the origin (equals 1 at x=0)."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-3
    xs = x[small]
    out[small] = 1.0 - xs**2 / 10.0 + xs**4 / 280.0
    xl = x[~small]
    out[~small] = 3.0 * spherical_jn(1, xl) / xl
    return out


def same_spin_g0(x) -> np.ndarray:
    """T=0 same-spin ideal PDF as a function of ``x = r k_F``."""
    return 1.0 - exchange_amplitude(x) ** 2


def _check_spin_present(spec: JelliumSpec, spin: str):
    if spec.spin_density(spin) <= 0:
        raise ValidationError(f"spin {spin!r} is empty at zeta={spec.zeta}")


def _normalize(values, spec, normalization):
    if normalization == "unity":
        return values
    if normalization == "half":
        if spec.zeta != 0:
            raise ValidationError("half normalization is defined for zeta=0 only")
        return 0.5 * values
    raise ValidationError(f"unknown normalization {normalization!r}")


def gr0_t0(
    spec: JelliumSpec, grid: RadialGrid, spin: str = UP, normalization: str = "unity"
) -> RadialFn:
    """Zero-temperature same-spin PDF ``1 - (3 j1(r k_F)/(r k_F))^2``.

    The argument is formed as ``(r/r_s) * (k_F r_s)`` so that curves for
    different ``r_s`` on grids with the same ``r_max/r_s`` coincide.
    """
    if spec.temperature != 0:
        raise ValidationError("gr0_t0 requires temperature == 0")
    _check_spin_present(spec, spin)
    x = (grid.r / spec.r_s) * spec.kf_rs(spin)
    return RadialFn(grid, _normalize(same_spin_g0(x), spec, normalization), R_SPACE)


def opposite_spin_g0(
    spec: JelliumSpec, grid: RadialGrid, normalization: str = "unity"
) -> RadialFn:
    """Unlike spins are uncorrelated in the ideal gas: g = 1 at every r."""
    return RadialFn(grid, _normalize(np.ones(grid.n_points), spec, normalization))


def fermi_occupation(k, mu: float, temperature: float) -> np.ndarray:
    return expit((mu - 0.5 * np.asarray(k) ** 2) / temperature)


def _k_cut(mu: float, temperature: float) -> float:
    return math.sqrt(2.0 * (max(mu, 0.0) + _OCC_LOG_CUT * temperature))


def _edge_panels(mu: float, temperature: float) -> list[float]:
    """Panel edges in k bracketing the Fermi edge at energies mu + m*T.

    Gauss-Kronrod nodes never sit on panel ends, so an edge narrower than the
    panel would otherwise be missed entirely.
    """
    kc = _k_cut(mu, temperature)
    edges = [0.0, kc]
    for m in (-_OCC_LOG_CUT, -12.0, -4.0, -1.0, 0.0, 1.0, 4.0, 12.0):
        e = mu + m * temperature
        if e > 0:
            k = math.sqrt(2.0 * e)
            if 0 < k < kc:
                edges.append(k)
    return sorted(set(edges))


def _density_at(mu: float, temperature: float) -> float:
    edges = _edge_panels(mu, temperature)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = quad(
            lambda k: k * k * fermi_occupation(k, mu, temperature),
            a, b, epsabs=0.0, epsrel=1e-13, limit=500,
        )
        total += val
    return total / (2.0 * math.pi**2)


def fermi_energy_of_density(n_sigma: float) -> float:
    return 0.5 * (6.0 * math.pi**2 * n_sigma) ** (2.0 / 3.0)


def chemical_potential(n_sigma: float, temperature: float) -> float:
    """Chemical potential of one spin species of the ideal Fermi gas.

    Solves ``(1/2 pi^2) int dk k^2 f(k; mu, T) = n_sigma`` by bracketed
    root finding.  The Boltzmann value ``T ln(n_sigma lambda^3)`` is a lower
    bound and ``E_F`` an upper bound for the bracket.
    """
    if not (n_sigma > 0 and np.isfinite(n_sigma)):
        raise ValidationError(f"n_sigma must be positive, got {n_sigma}")
    if not (temperature > 0 and np.isfinite(temperature)):
        raise ValidationError(f"temperature must be positive, got {temperature}")

    ef = fermi_energy_of_density(n_sigma)
    lam3 = (2.0 * math.pi / temperature) ** 1.5
    mu_boltz = temperature * math.log(n_sigma * lam3)

    def f(mu):
        return _density_at(mu, temperature) / n_sigma - 1.0

    lo = min(mu_boltz, ef) - temperature
    hi = max(mu_boltz, ef) + temperature
    for _ in range(60):
        if f(lo) <= 0:
            break
        lo -= 2.0 * (abs(lo) + temperature)
    else:
        raise NumericalError("could not bracket chemical potential from below")
    for _ in range(60):
        if f(hi) >= 0:
            break
        hi += 2.0 * (abs(hi) + temperature)
    else:
        raise NumericalError("could not bracket chemical potential from above")
    return brentq(f, lo, hi, xtol=1e-15 * max(1.0, abs(hi)), rtol=1e-14, maxiter=500)


def exchange_hole_amplitude(r, n_sigma: float, temperature: float, mu: float | None = None):
    """Finite-T analogue of ``3 j1(x)/x``.

    ``F(r) = (1/n) (1/2 pi^2) int dk k^2 f(k) sin(kr)/(kr)``, integrated
    adaptively up to the momentum where the occupation has dropped by 1e-16
    relative to its maximum.  The result is normalized by the quadrature's own
    density so that F(0) = 1 exactly.
    """
    if mu is None:
        mu = chemical_potential(n_sigma, temperature)
    r = np.asarray(r, dtype=float)
    edges = _edge_panels(mu, temperature)
    rr = np.concatenate(([0.0], r))

    def integrand(k):
        return k * k * fermi_occupation(k, mu, temperature) * np.sinc(k * rr / math.pi)

    val, _ = quad_vec(integrand, edges[0], edges[-1],
                      epsabs=1e-14 * n_sigma * 2 * math.pi**2, epsrel=1e-12,
                      points=edges[1:-1], limit=20000)
    if not np.all(np.isfinite(val)):
        raise NumericalError("finite-temperature exchange integral is not finite")
    return val[1:] / val[0]


def gr0_finite_t(
    spec: JelliumSpec, grid: RadialGrid, spin: str = UP, normalization: str = "unity"
) -> RadialFn:
    """Same-spin ideal PDF at the temperature stored in ``spec``.

    ``g(r) = 1 - F(r)^2`` with F the Fourier transform of the Fermi occupation
    normalized to 1 at the origin.  Falls back to the analytic curve at T=0.
    """
    if spec.temperature == 0:
        return gr0_t0(spec, grid, spin, normalization)
    _check_spin_present(spec, spin)
    n_sigma = spec.spin_density(spin)
    amp = exchange_hole_amplitude(grid.r, n_sigma, spec.temperature)
    g = 1.0 - amp**2
    return RadialFn(grid, _normalize(g, spec, normalization), R_SPACE)


def check_decaying_tail(g: RadialFn, atol: float = 1e-3, what: str = "g"):
    """Reject functions whose outer 10% has not settled at 1."""
    tail = g.values[-max(1, g.grid.n_points // 10):]
    dev = float(np.max(np.abs(tail - 1.0)))
    if dev > atol:
        raise ValidationError(
            f"{what} has not decayed to 1 before r_max (max |{what}-1| = {dev:.3g} "
            f"in the outer 10%); enlarge r_max"
        )


def ideal_structure_factor(g0: RadialFn, n: float) -> RadialFn:
    """``S(k) = 1 + n * FT[g0 - 1](k)`` on the conjugate mesh."""
    if g0.space != R_SPACE:
        raise ValidationError("ideal_structure_factor expects an r-space PDF")
    if not n > 0:
        raise ValidationError("density must be positive")
    check_decaying_tail(g0, what="g0")
    s = 1.0 + n * fourier_forward(g0.values - 1.0, g0.grid)
    return RadialFn(g0.grid, s, K_SPACE)
