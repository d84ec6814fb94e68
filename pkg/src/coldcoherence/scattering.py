"""Internal channels, s-wave amplitudes and cross sections.

A channel carries the low-momentum expansion of its elastic s-wave
amplitude,

    f(p) = -a + (b_red / hbar) p + (c_red / hbar**2) p**2,

with the complex scattering length a = alpha - i beta.  The reduced
coefficients b_red = hbar b [m^2] and c_red = hbar^2 c [m^3] are stored
instead of b and c so that no hbar bookkeeping leaks into the formulas
that use them.  The expansion is always truncated at p**2.
"""

from dataclasses import dataclass
import cmath
import math

import numpy as np

from .constants import hbar, k_B
from .errors import DomainError, ValidationError

__all__ = [
    "Channel",
    "BathSpec",
    "ChannelPair",
    "CrossSections",
    "amplitude",
    "cross_sections",
    "negative_cross_section_momentum",
    "amp_diff_sq_coeffs",
]


def _finite(z):
    return cmath.isfinite(complex(z))


@dataclass(frozen=True)
class Channel:
    """One internal state: energy [J] and amplitude coefficients (SI)."""

    label: str
    energy: float
    a: complex
    b_red: complex = 0j
    c_red: complex = 0j

    def __post_init__(self):
        for name in ("a", "b_red", "c_red"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        object.__setattr__(self, "energy", float(self.energy))
        for name in ("energy", "a", "b_red", "c_red"):
            if not _finite(getattr(self, name)):
                raise ValidationError(f"channel {self.label!r}: {name} must be finite")
        if self.beta < 0:
            raise ValidationError(
                f"channel {self.label!r}: beta = {self.beta:g} m violates beta >= 0 "
                "(imaginary part of the scattering length a = alpha - i beta)"
            )

    @property
    def alpha(self):
        return self.a.real

    @property
    def beta(self):
        return -self.a.imag

    @classmethod
    def from_parts(cls, label, energy, alpha, beta, b_red=0j, c_red=0j):
        return cls(label, energy, complex(alpha, -beta), b_red, c_red)


@dataclass(frozen=True)
class BathSpec:
    """Buffer gas of mass m at density n_gas and temperature T; tracer mass M."""

    m: float
    M: float
    n_gas: float
    T: float

    def __post_init__(self):
        for name in ("m", "M", "n_gas", "T"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0:
                raise ValidationError(f"bath: {name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def r(self):
        """Mass ratio m / M."""
        return self.m / self.M

    @property
    def m_star(self):
        """Reduced mass of a bath particle and the tracer."""
        return self.m * self.M / (self.m + self.M)

    def theta(self, length=1e-9, T=None):
        """Dimensionless temperature 2 m k_B T l^2 / hbar^2 (diagnostic only)."""
        T = self.T if T is None else T
        return 2.0 * self.m * k_B * T * length**2 / hbar**2

    def tau_per_second(self, length=1e-9):
        """Scaled time per second of laboratory time, hbar n l / m."""
        return hbar * self.n_gas * length / self.m


@dataclass(frozen=True)
class ChannelPair:
    """Ordered pair (nu, nu') with the initial internal density-matrix data."""

    nu: Channel
    nu_prime: Channel
    rho0: complex
    rho0_diag_nu: float
    rho0_diag_nup: float

    def __post_init__(self):
        object.__setattr__(self, "rho0", complex(self.rho0))
        for name in ("rho0_diag_nu", "rho0_diag_nup"):
            p = float(getattr(self, name))
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"pair: population {name} = {p!r} outside [0, 1]")
            object.__setattr__(self, name, p)
        bound = self.rho0_diag_nu * self.rho0_diag_nup
        if abs(self.rho0) ** 2 > bound * (1 + 1e-12) + 1e-300:
            raise ValidationError(
                "pair: |rho0|^2 exceeds the product of populations "
                f"({abs(self.rho0) ** 2:g} > {bound:g})"
            )

    @property
    def eta0(self):
        """Initial relative coherence |rho0| / sqrt(p_nu p_nu')."""
        bound = self.rho0_diag_nu * self.rho0_diag_nup
        if bound <= 0:
            raise DomainError("relative coherence undefined for an empty population")
        return min(abs(self.rho0) / math.sqrt(bound), 1.0)

    def element(self, which):
        """Initial value of one of the four matrix elements touched by the pair.

        ``which`` is one of "nu_nup", "nup_nu", "nu_nu", "nup_nup".
        """
        if which == "nu_nup":
            return self.rho0
        if which == "nup_nu":
            return self.rho0.conjugate()
        if which == "nu_nu":
            return complex(self.rho0_diag_nu)
        if which == "nup_nup":
            return complex(self.rho0_diag_nup)
        raise DomainError(f"unknown matrix element {which!r}")

    def channels(self, which):
        """(row channel, column channel) of a matrix element."""
        return {
            "nu_nup": (self.nu, self.nu_prime),
            "nup_nu": (self.nu_prime, self.nu),
            "nu_nu": (self.nu, self.nu),
            "nup_nup": (self.nu_prime, self.nu_prime),
        }[which]

    @classmethod
    def pure(cls, nu, nu_prime, p_nu=0.5, phase=0.0):
        """Pure superposition with population p_nu in nu."""
        p_nup = 1.0 - p_nu
        rho0 = math.sqrt(p_nu * p_nup) * cmath.exp(1j * phase)
        return cls(nu, nu_prime, rho0, p_nu, p_nup)


def _check_momentum(p, strict):
    p = np.asarray(p, dtype=float)
    bad = (p <= 0) if strict else (p < 0)
    if np.any(bad) or not np.all(np.isfinite(p)):
        op = ">" if strict else ">="
        raise DomainError(f"momentum must be finite and {op} 0")
    return p


def amplitude(ch, p):
    """Truncated s-wave amplitude f(p) in metres; p in kg m/s (scalar or array)."""
    k = _check_momentum(p, strict=False) / hbar
    out = -ch.a + ch.b_red * k + ch.c_red * k**2
    return out if np.ndim(out) else complex(out)


@dataclass(frozen=True)
class CrossSections:
    total: np.ndarray
    elastic: np.ndarray
    inelastic: np.ndarray
    valid: np.ndarray  # True where all three truncated values are >= 0


def cross_sections(ch, p):
    """Total, elastic and inelastic cross sections [m^2] at momentum p > 0.

    Each is the truncated low-momentum expansion; negative values are
    returned as they are and marked in ``valid`` rather than clamped.
    """
    k = _check_momentum(p, strict=True) / hbar
    total = 4.0 * np.pi / k * (ch.beta + ch.b_red.imag * k + ch.c_red.imag * k**2)
    elastic = 4.0 * np.pi * (abs(ch.a) ** 2 - 2.0 * (ch.a * ch.b_red.conjugate()).real * k)
    inelastic = total - elastic
    valid = (total >= 0) & (elastic >= 0) & (inelastic >= 0)
    if np.ndim(k) == 0:
        return CrossSections(float(total), float(elastic), float(inelastic), bool(valid))
    return CrossSections(total, elastic, inelastic, valid)


def _first_negative(coeffs):
    """Smallest x > 0 where the ascending-order polynomial goes negative."""
    poly = np.polynomial.Polynomial(coeffs).trim()
    if poly(1e-300) < 0 or (poly.coef[0] == 0 and poly.deriv()(0.0) < 0):
        return 0.0
    if poly.degree() < 1:
        return math.inf
    roots = sorted(z.real for z in poly.roots() if abs(z.imag) <= 1e-12 * abs(z) and z.real > 0)
    for x in roots:
        if poly(x * (1 + 1e-9)) < 0:
            return x
    return math.inf


def negative_cross_section_momentum(ch):
    """Smallest momentum p > 0 at which a truncated cross section turns negative.

    Returns ``math.inf`` when all three stay nonnegative for every p > 0.
    """
    bi, ci = ch.b_red.imag, ch.c_red.imag
    e0 = abs(ch.a) ** 2
    e1 = -2.0 * (ch.a * ch.b_red.conjugate()).real
    # in k = p / hbar: k sigma_tot / 4 pi, sigma_el / 4 pi, k sigma_in / 4 pi
    polys = ([ch.beta, bi, ci], [e0, e1], [ch.beta, bi - e0, ci - e1])
    return min(_first_negative(c) for c in polys) * hbar


def amp_diff_sq_coeffs(ch1, ch2):
    """Coefficients (d0, d1, d2) of |f1(p) - f2(p)|^2 = d0 + d1 p + d2 p^2 + O(p^3).

    Units: d0 [m^2], d1 [m^2 / (kg m/s)], d2 [m^2 / (kg m/s)^2].
    """
    da = ch1.a - ch2.a
    db = (ch1.b_red - ch2.b_red) / hbar
    dc = (ch1.c_red - ch2.c_red) / hbar**2
    d0 = abs(da) ** 2
    d1 = -2.0 * (da * db.conjugate()).real
    d2 = abs(db) ** 2 - 2.0 * (da * dc.conjugate()).real
    return d0, d1, d2
