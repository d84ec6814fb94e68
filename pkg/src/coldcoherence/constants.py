"""Physical constants (CODATA 2018) and unit helpers.

h and k_B are exact in the 2019 SI; hbar is the published ten-digit
value.  Everything else in the package works in SI; conversions happen
once, at the configuration boundary.
"""

import math

hbar = 1.054571817e-34  # J s
h = 6.62607015e-34  # J s
k_B = 1.380649e-23  # J / K
atomic_mass = 1.66053906660e-27  # kg
bohr = 5.29177210903e-11  # m
nm = 1e-9  # m

# Atomic masses in u (AME2016 values as tabulated by NIST).
SPECIES_MASS_U = {
    "He-3": 3.0160293201,
    "He-4": 4.00260325413,
}

LENGTH_UNITS = {"m": 1.0, "nm": nm, "bohr": bohr, "a0": bohr}
MASS_UNITS = {"kg": 1.0, "u": atomic_mass, "amu": atomic_mass}
ENERGY_UNITS = {"J": 1.0, "K": k_B, "Hz": h, "MHz": 1e6 * h, "GHz": 1e9 * h}


def species_mass(name):
    """Mass in kg of a preset buffer-gas species ("He-3" or "He-4")."""
    try:
        return SPECIES_MASS_U[name] * atomic_mass
    except KeyError:
        raise KeyError(f"unknown species {name!r}; known: {sorted(SPECIES_MASS_U)}") from None


def convert(value, unit, table, power=1):
    """Multiply ``value`` by ``table[unit] ** power``."""
    if unit not in table:
        raise KeyError(f"unknown unit {unit!r}; known: {sorted(table)}")
    return value * table[unit] ** power


def thermal_momentum(m, T):
    """sqrt(2 m k_B T), the momentum scale of a thermal gas particle."""
    return math.sqrt(2.0 * m * k_B * T)
