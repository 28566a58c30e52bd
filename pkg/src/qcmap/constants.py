"""CODATA 2018 constants (SI) and atomic-unit conversions."""

# exact by SI definition
PLANCK = 6.62607015e-34  # J s
BOLTZMANN = 1.380649e-23  # J/K
ELEMENTARY_CHARGE = 1.602176634e-19  # C

ELECTRON_MASS = 9.1093837015e-31  # kg
BOHR_RADIUS = 5.29177210903e-11  # m
HARTREE = 4.3597447222071e-18  # J
PROTON_MASS = 1.67262192369e-27  # kg

HBAR = PLANCK / (2.0 * 3.141592653589793)
HARTREE_IN_KELVIN = HARTREE / BOLTZMANN

PROTON_RADIUS = 0.88e-15  # m, rounded charge radius


def kelvin_to_hartree(t_k: float) -> float:
    return t_k / HARTREE_IN_KELVIN


def hartree_to_kelvin(t_h: float) -> float:
    return t_h * HARTREE_IN_KELVIN


def kg_to_me(m_kg: float) -> float:
    return m_kg / ELECTRON_MASS


def me_to_kg(m_me: float) -> float:
    return m_me * ELECTRON_MASS


def bohr_to_m(x: float) -> float:
    return x * BOHR_RADIUS


def m_to_bohr(x: float) -> float:
    return x / BOHR_RADIUS


def as_dict() -> dict:
    return {
        "planck_J_s": PLANCK,
        "boltzmann_J_per_K": BOLTZMANN,
        "electron_mass_kg": ELECTRON_MASS,
        "bohr_radius_m": BOHR_RADIUS,
        "hartree_J": HARTREE,
        "codata": "2018",
    }
