"""Thermal de Broglie wavelength and a quantum/classical verdict.

``lambda = h / sqrt(3 m k_B T)``: the momentum is the one a particle carries
when its translational kinetic energy is ``3 k_B T / 2``.  ``ke_multiplier``
rescales that kinetic energy for sensitivity checks (e.g. 2 for the
equipartition count of a bonded solid).

This module works in SI, since its inputs are macroscopic bodies; densities
for the degeneracy estimate are in atomic units.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from . import constants as K
from .errors import ValidationError

# Published centre-of-mass wavelength for 1 kg at 300 K, metres.
PUBLISHED_CAT_WAVELENGTH = 9.45e-23

QUANTUM = "quantum"
CLASSICAL = "classical"


def thermal_wavelength(mass_kg: float, temperature_k: float,
                       ke_multiplier: float = 1.0) -> float:
    """De Broglie wavelength in metres at the thermal momentum ``sqrt(3 m k_B T)``.

    Returns ``inf`` at T = 0: with no thermal motion the wavelength is
    unbounded and the body is quantum on every length scale.
    """
    if not (mass_kg > 0 and math.isfinite(mass_kg)):
        raise ValidationError(f"mass must be positive, got {mass_kg}")
    if not (temperature_k >= 0 and math.isfinite(temperature_k)):
        raise ValidationError(f"temperature must be non-negative, got {temperature_k}")
    if not ke_multiplier > 0:
        raise ValidationError("ke_multiplier must be positive")
    if temperature_k == 0:
        return math.inf
    return K.PLANCK / math.sqrt(3.0 * ke_multiplier * mass_kg * K.BOLTZMANN * temperature_k)


def wavelength_constant() -> float:
    """``h/sqrt(3 k_B)``: lambda * sqrt(m T) for every m and T (SI)."""
    return K.PLANCK / math.sqrt(3.0 * K.BOLTZMANN)


@dataclass(frozen=True)
class Degeneracy:
    e_f: float
    t_q: float


def degeneracy_temperature(density: float, mass: float = 1.0, zeta: float = 0.0) -> Degeneracy:
    """Fermi energy and the temperature ``T_q = 2 E_F/5`` (Hartree).

    ``density`` in bohr^-3 and ``mass`` in electron masses.  Each spin has
    ``k_F = (6 pi^2 n_sigma)^(1/3)``; ``E_F`` is the density-weighted mean of
    the spin Fermi energies, so that ``3 E_F/5`` is the ideal kinetic energy
    per particle for any polarization.
    """
    if not (density > 0 and math.isfinite(density)):
        raise ValidationError(f"density must be positive, got {density}")
    if not mass > 0:
        raise ValidationError("mass must be positive")
    if not 0.0 <= zeta <= 1.0:
        raise ValidationError(f"zeta must lie in [0, 1], got {zeta}")
    e_f = 0.0
    for sign in (1.0, -1.0):
        frac = 0.5 * (1.0 + sign * zeta)
        if frac > 0:
            kf = (6.0 * math.pi**2 * frac * density) ** (1.0 / 3.0)
            e_f += frac * kf**2 / (2.0 * mass)
    return Degeneracy(e_f, 0.4 * e_f)


@dataclass(frozen=True)
class ClassicalityReport:
    mass_kg: float
    mass_me: float
    temperature_k: float
    temperature_hartree: float
    effective_temperature_k: float
    wavelength_m: float
    comparison_length_m: float
    verdict: str
    ke_multiplier: float = 1.0
    e_f_hartree: float | None = None
    t_q_hartree: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["wavelength_bohr"] = K.m_to_bohr(self.wavelength_m)
        d["constants"] = K.as_dict()
        return d


def classify(
    mass_kg: float,
    temperature_k: float,
    length_m: float,
    density: float | None = None,
    zeta: float = 0.0,
    ke_multiplier: float = 1.0,
) -> ClassicalityReport:
    """Quantum if the thermal wavelength reaches the comparison length.

    With a density (bohr^-3) the degeneracy temperature is folded in: the
    wavelength is taken at ``max(T, T_q)``, so a degenerate system keeps
    its zero-point motion.
    """
    if not (length_m > 0 and math.isfinite(length_m)):
        raise ValidationError(f"comparison length must be positive, got {length_m}")
    t_eff = temperature_k
    e_f = t_q = None
    if density is not None:
        deg = degeneracy_temperature(density, K.kg_to_me(mass_kg), zeta)
        e_f, t_q = deg.e_f, deg.t_q
        t_eff = max(temperature_k, K.hartree_to_kelvin(t_q))
    lam = thermal_wavelength(mass_kg, t_eff, ke_multiplier)
    verdict = QUANTUM if lam >= length_m else CLASSICAL
    return ClassicalityReport(
        mass_kg=mass_kg,
        mass_me=K.kg_to_me(mass_kg),
        temperature_k=temperature_k,
        temperature_hartree=K.kelvin_to_hartree(temperature_k),
        effective_temperature_k=t_eff,
        wavelength_m=lam,
        comparison_length_m=length_m,
        verdict=verdict,
        ke_multiplier=ke_multiplier,
        e_f_hartree=e_f,
        t_q_hartree=t_q,
    )


def classify_atomic(mass_me: float, temperature_hartree: float, length_bohr: float,
                    density: float | None = None, zeta: float = 0.0,
                    ke_multiplier: float = 1.0) -> ClassicalityReport:
    """:func:`classify` with inputs in electron masses, Hartree and bohr."""
    return classify(
        K.me_to_kg(mass_me), K.hartree_to_kelvin(temperature_hartree),
        K.bohr_to_m(length_bohr), density, zeta, ke_multiplier,
    )


def cat_comparison(mass_kg: float = 1.0, temperature_k: float = 300.0) -> dict:
    """SI wavelength next to the published 1 kg / 300 K figure.

    The published number equals ``hbar/sqrt(3 m k_B T)`` expressed in
    centimetres, hence the ratio of ``100/(2 pi)``.
    """
    lam = thermal_wavelength(mass_kg, temperature_k)
    hbar_cm = 100.0 * lam / (2.0 * math.pi)
    return {
        "wavelength_si_m": lam,
        "published_m": PUBLISHED_CAT_WAVELENGTH,
        "ratio_published_over_si": PUBLISHED_CAT_WAVELENGTH / lam,
        "factor_100_over_2pi": 100.0 / (2.0 * math.pi),
        "hbar_form_in_cm": hbar_cm,
    }
