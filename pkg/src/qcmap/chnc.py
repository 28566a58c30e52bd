"""Classical map of the interacting electron fluid.

Two spin species at an effective classical temperature ``T_cf`` interact
through ``beta*V_ee`` (scaled by a coupling constant lambda) plus, for like
spins only, the Pauli potential extracted from the ideal g0.  The
exchange-correlation energy per electron follows from the coupling-constant
integral::

    E_xc = int_0^1 dlam  (n/2) int d^3r (q^2/r) [gbar_lam(r) - 1]

with ``gbar`` the spin-averaged PDF.  The potential energy integrand is
evaluated at each lambda on a user grid and integrated by the trapezoid rule.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, CouplingSweepError, ValidationError
from .fermion import DOWN, UP, JelliumSpec, gr0_finite_t, opposite_spin_g0
from .grid import RadialGrid, build_grid
from .hnc import (
    HncControls,
    PairPotential,
    SpeciesSpec,
    coulomb_pair_potential,
    solve_hnc_multi,
)
from .io import write_table
from .pauli import PauliPotential, extract_pauli

USER = "user"
QUADRATURE = "quadrature"
BARE = "bare"
DIFFRACTION = "diffraction"

PAIR_KEYS = ("upup", "updown", "downdown")


def default_lambda_grid(points: int = 9) -> tuple[float, ...]:
    return tuple(float(x) for x in np.linspace(0.0, 1.0, points))


@dataclass(frozen=True)
class ClassicalMapConfig:
    """Inputs of a classical-map calculation (atomic units).

    ``t_cf_mode`` is ``"user"`` (``t_cf`` is the classical-fluid temperature)
    or ``"quadrature"`` (``T_cf = sqrt(physical_t**2 + t_q**2)`` with ``t_q``
    supplied explicitly).
    """

    r_s: float
    zeta: float = 0.0
    physical_t: float = 0.0
    t_cf_mode: str = USER
    t_cf: float | None = None
    t_q: float | None = None
    coulomb_model: str = BARE
    lambda_ee: float | None = None
    lambda_grid: tuple = field(default_factory=default_lambda_grid)
    charge: float = 1.0
    grid_n: int = 2048
    rmax_rs: float = 20.0
    split_rs: float = 1.0
    controls: HncControls = field(default_factory=HncControls)

    def __post_init__(self):
        JelliumSpec(self.r_s, self.zeta, self.physical_t)
        object.__setattr__(self, "lambda_grid", tuple(float(x) for x in self.lambda_grid))
        lg = np.asarray(self.lambda_grid)
        if lg.size < 2 or lg[0] != 0.0 or lg[-1] != 1.0 or np.any(np.diff(lg) <= 0):
            raise ValidationError("lambda_grid must rise strictly from 0 to 1")
        if self.t_cf_mode == USER:
            if self.t_cf is None or not self.t_cf > 0:
                raise ValidationError("user mode needs a positive t_cf")
        elif self.t_cf_mode == QUADRATURE:
            if self.t_q is None or self.t_q < 0:
                raise ValidationError("quadrature mode needs t_q >= 0")
            if not self.effective_temperature > 0:
                raise ValidationError("classical-fluid temperature must be positive")
        else:
            raise ValidationError(f"unknown t_cf_mode {self.t_cf_mode!r}")
        if self.coulomb_model not in (BARE, DIFFRACTION):
            raise ValidationError(f"unknown coulomb_model {self.coulomb_model!r}")
        if self.coulomb_model == DIFFRACTION and self.lambda_ee is not None \
                and not self.lambda_ee > 0:
            raise ValidationError("lambda_ee must be positive")
        if not self.split_rs > 0 or not self.rmax_rs > 0:
            raise ValidationError("split_rs and rmax_rs must be positive")
        build_grid(self.grid_n, self.rmax_rs * self.r_s)

    @property
    def effective_temperature(self) -> float:
        if self.t_cf_mode == USER:
            return float(self.t_cf)
        return math.hypot(self.physical_t, self.t_q)

    @property
    def beta(self) -> float:
        return 1.0 / self.effective_temperature

    @property
    def jellium(self) -> JelliumSpec:
        return JelliumSpec(self.r_s, self.zeta, self.physical_t)

    @property
    def grid(self) -> RadialGrid:
        return build_grid(self.grid_n, self.rmax_rs * self.r_s)

    @property
    def diffraction_length(self) -> float | None:
        """Electron-electron thermal length; defaults to ``1/sqrt(T_cf)``
        (reduced mass 1/2)."""
        if self.coulomb_model != DIFFRACTION:
            return None
        if self.lambda_ee is not None:
            return self.lambda_ee
        return 1.0 / math.sqrt(self.effective_temperature)

    def to_dict(self) -> dict:
        return {
            "r_s": self.r_s, "zeta": self.zeta, "physical_t": self.physical_t,
            "t_cf_mode": self.t_cf_mode, "t_cf": self.t_cf, "t_q": self.t_q,
            "effective_temperature": self.effective_temperature,
            "coulomb_model": self.coulomb_model, "lambda_ee": self.diffraction_length,
            "lambda_grid": list(self.lambda_grid), "charge": self.charge,
            "grid": self.grid.to_dict(), "rmax_rs": self.rmax_rs,
            "split_rs": self.split_rs, "controls": self.controls.to_dict(),
        }


def pauli_potentials(config: ClassicalMapConfig) -> dict[str, PauliPotential]:
    """Extract one Pauli potential per occupied spin on the config grid."""
    spec = config.jellium
    grid = config.grid
    out = {}
    for spin in spec.present_spins():
        g0 = gr0_finite_t(spec, grid, spin)
        out[spin] = extract_pauli(
            g0, spec.spin_density(spin), spec.r_s, spec.zeta,
            spec.temperature / spec.fermi_energy(spin), spin,
        )
    return out


def coulomb_pair_potentials(
    config: ClassicalMapConfig,
    coupling: float = 1.0,
    pauli: dict[str, PauliPotential] | None = None,
) -> list[list[PairPotential]]:
    """Pair potentials for the occupied spins, ordered (up, down).

    Like spins get ``beta*P + coupling*beta*V_ee``; unlike spins get the
    Coulomb term only.
    """
    if pauli is None:
        pauli = pauli_potentials(config)
    grid = config.grid
    spins = config.jellium.present_spins()
    strength = coupling * config.beta * config.charge**2
    vee = coulomb_pair_potential(
        grid, strength, config.split_rs * config.r_s,
        config.diffraction_length, label="coulomb",
    )
    mat = []
    for a in spins:
        row = []
        for b in spins:
            row.append(pauli[a].as_potential() + vee if a == b else vee)
        mat.append(row)
    return mat


def _pair_key(a: str, b: str) -> str:
    a, b = sorted((a, b), key=(UP, DOWN).index)
    return a + b


@dataclass(frozen=True, eq=False)
class SpinResolvedResult:
    coupling: float
    spins: tuple
    g: dict
    states: list
    iterations: int
    residual: float

    def gbar(self, spec: JelliumSpec) -> np.ndarray:
        """Spin-averaged PDF ``sum n_a n_b g_ab / n^2``."""
        n = spec.density
        out = 0.0
        for a in self.spins:
            for b in self.spins:
                w = spec.spin_density(a) * spec.spin_density(b) / n**2
                out = out + w * self.g[_pair_key(a, b)].values
        return out

    def contact(self, key: str = "upup") -> float:
        """g at the innermost sample r = dr.

        Extrapolating to r = 0 is unreliable here: inside the Pauli cap and
        the Coulomb core g behaves like exp(-a/r), which no polynomial fits.
        """
        return float(self.g[key].values[0])


def solve_spin_resolved(
    config: ClassicalMapConfig,
    coupling: float,
    pauli: dict[str, PauliPotential] | None = None,
    initial_gamma=None,
) -> SpinResolvedResult:
    """Multi-component HNC solve at coupling ``lambda`` (Pauli term unscaled)."""
    if not 0.0 <= coupling <= 1.0:
        raise ValidationError(f"coupling must lie in [0, 1], got {coupling}")
    spec = config.jellium
    spins = spec.present_spins()
    pots = coulomb_pair_potentials(config, coupling, pauli)
    species = [
        SpeciesSpec(spec.spin_density(s), config.effective_temperature,
                    -config.charge, 1.0, s)
        for s in spins
    ]
    try:
        states = solve_hnc_multi(species, pots, None, config.controls, initial_gamma)
    except ConvergenceError as exc:
        if exc.pair is not None:
            names = _pair_key(spins[exc.pair[0]], spins[exc.pair[1]])
            exc.args = (f"{exc.args[0]} [failing pair: {names}, lambda={coupling}]",)
        raise
    g = {}
    for i, a in enumerate(spins):
        for j, b in enumerate(spins):
            g[_pair_key(a, b)] = states[i][j].g
    s0 = states[0][0]
    return SpinResolvedResult(coupling, spins, g, states, s0.iterations, s0.residual)


def coulomb_energy_integrand(gbar: np.ndarray, grid: RadialGrid, n: float,
                             charge: float = 1.0) -> float:
    """``(n/2) int 4 pi r^2 (q^2/r) (gbar - 1) dr`` per electron."""
    return float(2.0 * np.pi * n * charge**2 * grid.dr * np.sum(grid.r * (gbar - 1.0)))


def exclusion_hole_energy(config: ClassicalMapConfig) -> float:
    """Coulomb energy of the ideal exchange hole, straight from g0."""
    spec = config.jellium
    grid = config.grid
    n = spec.density
    gbar = 0.0
    spins = spec.present_spins()
    for a in spins:
        for b in spins:
            w = spec.spin_density(a) * spec.spin_density(b) / n**2
            g = gr0_finite_t(spec, grid, a) if a == b else opposite_spin_g0(spec, grid)
            gbar = gbar + w * g.values
    return coulomb_energy_integrand(gbar, grid, n, config.charge)


def hole_sum(gbar: np.ndarray, grid: RadialGrid, n: float) -> float:
    return float(4.0 * np.pi * n * grid.dr * np.sum(grid.r**2 * (gbar - 1.0)))


@dataclass(frozen=True)
class ExcResult:
    e_xc: float
    table: list
    quadrature_error: float | None
    config: ClassicalMapConfig

    def to_dict(self) -> dict:
        return {
            "e_xc": self.e_xc,
            "quadrature_error_estimate": self.quadrature_error,
            "table": self.table,
        }


def _trapezoid(x, y) -> float:
    x = np.asarray(x)
    y = np.asarray(y)
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def exc_coupling_integration(
    config: ClassicalMapConfig, workers: int = 1
) -> ExcResult:
    """Exchange-correlation energy per electron by coupling-constant integration.

    Every lambda is solved from a cold start, so results do not depend on
    ``workers``.  The Richardson-style error estimate compares the trapezoid
    on the full lambda grid with the one on every other point.

    Raises
    ------
    CouplingSweepError
        If any lambda fails; ``partial`` holds the rows finished before it.
    """
    lams = config.lambda_grid
    if len(lams) < 5:
        raise ValidationError("coupling integration needs at least 5 lambda points")
    spec = config.jellium
    grid = config.grid
    n = spec.density
    pauli = pauli_potentials(config)

    def one(lam):
        res = solve_spin_resolved(config, lam, pauli)
        gbar = res.gbar(spec)
        row = {
            "lambda": lam,
            "integrand": coulomb_energy_integrand(gbar, grid, n, config.charge),
            "hole_sum": hole_sum(gbar, grid, n),
            "contact_upup": res.contact("upup"),
            "iterations": res.iterations,
            "residual": res.residual,
        }
        return row

    rows = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(one, lam) for lam in lams]
            for lam, fut in zip(lams, futures):
                try:
                    rows.append(fut.result())
                except Exception as exc:
                    raise CouplingSweepError(
                        f"coupling sweep failed at lambda={lam}: {exc}", rows, exc
                    ) from exc
    else:
        for lam in lams:
            try:
                rows.append(one(lam))
            except Exception as exc:
                raise CouplingSweepError(
                    f"coupling sweep failed at lambda={lam}: {exc}", rows, exc
                ) from exc

    y = [r["integrand"] for r in rows]
    e_xc = _trapezoid(lams, y)
    err = None
    if len(lams) % 2 == 1 and len(lams) >= 5:
        coarse = _trapezoid(lams[::2], y[::2])
        err = (e_xc - coarse) / 3.0
    return ExcResult(e_xc, rows, err, config)


def write_spin_resolved_csv(result: SpinResolvedResult, config: ClassicalMapConfig,
                            path, meta=None):
    grid = config.grid
    nan = np.full(grid.n_points, np.nan)
    cols = [grid.r, grid.r / config.r_s]
    for key in PAIR_KEYS:
        cols.append(result.g[key].values if key in result.g else nan)
    return write_table(path, ["r", "r_over_rs", "g_upup", "g_updown", "g_downdown"],
                       cols, meta)
