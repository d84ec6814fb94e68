"""Low-temperature rate coefficients and time series of the two coherence measures.

For each ordered pair of channels (x, y) the off-diagonal element evolves as

    rho_xy(t) = e^{z0 t} rho_xy(0) [1 + T^{1/2} z1 t + T (z21 t + z22 t^2/2) + ...]

and the observable measures |rho| and eta follow from the real parts of the
z's and from symmetric combinations over the four elements (nu nu'),
(nu' nu), (nu nu), (nu' nu').  Everything is in SI units; T in kelvin.
"""

from dataclasses import dataclass, field
from enum import IntEnum
import math

import numpy as np

from .appendix import mass_factor
from .constants import hbar, k_B
from .errors import DomainError

__all__ = [
    "ELEMENTS",
    "ZCoefficients",
    "RateCoefficientSet",
    "TruncationOrder",
    "CoherenceTrace",
    "z_coefficients",
    "rate_coefficients",
    "xi_closed_forms",
    "xi_combinations",
    "coherence_series",
    "complex_series",
    "decoherence_rates",
]

ELEMENTS = ("nu_nup", "nup_nu", "nu_nu", "nup_nup")


@dataclass(frozen=True)
class ZCoefficients:
    """Complex coefficients of one matrix element: z0 [1/s], z1 [1/(s K^1/2)],
    z21 [1/(s K)], z22 [1/(s^2 K)]."""

    z0: complex
    z1: complex
    z21: complex
    z22: complex


@dataclass(frozen=True)
class RateCoefficientSet:
    z0: complex
    z1: complex
    z21: complex
    z22: complex
    zeta0: float
    zeta1: float
    zeta21: float
    zeta22: float
    xi1: float
    xi21: float
    xi22: float
    elements: dict = field(default_factory=dict, compare=False, repr=False)

    def as_rows(self):
        """(name, value, unit) rows, complex values split into re/im."""
        rows = []
        units = {"z0": "1/s", "z1": "1/(s K^1/2)", "z21": "1/(s K)", "z22": "1/(s^2 K)"}
        for name, unit in units.items():
            z = getattr(self, name)
            rows.append((f"Re_{name}", z.real, unit))
            rows.append((f"Im_{name}", z.imag, unit))
        for name, unit in (("zeta0", "1/s"), ("zeta1", "1/(s K^1/2)"), ("zeta21", "1/(s K)"),
                           ("zeta22", "1/(s^2 K)"), ("xi1", "1/(s K^1/2)"), ("xi21", "1/(s K)"),
                           ("xi22", "1/(s^2 K)")):
            rows.append((name, getattr(self, name), unit))
        return rows


class TruncationOrder(IntEnum):
    """How many powers of T^{1/2} the series keeps."""

    T0 = 0
    T_HALF = 1
    T1 = 2


@dataclass(frozen=True)
class CoherenceTrace:
    times: np.ndarray
    abs_rho: np.ndarray
    eta: np.ndarray
    truncation_order: TruncationOrder


def z_coefficients(bath, ch_x, ch_y):
    """z0, z1, z21, z22 of the element rho_xy with row channel x, column channel y."""
    n, ms, m = bath.n_gas, bath.m_star, bath.m
    a, ap = ch_x.a, ch_y.a
    z0 = 1j * (ch_y.energy - ch_x.energy) / hbar - 2j * math.pi * (a - ap.conjugate()) * hbar * n / ms
    u = 1j * (ch_x.b_red - ch_y.b_red.conjugate()) + 2.0 * a * ap.conjugate()
    z1 = 2**2.5 * math.sqrt(math.pi * k_B / ms) * n * u
    v = 1j * (ch_x.c_red - ch_y.c_red.conjugate()) - 2.0 * (a * ch_y.b_red.conjugate() + ch_x.b_red * ap.conjugate())
    z21 = 6.0 * math.pi * n * k_B / hbar * v
    z22 = 8.0 * math.pi * k_B * n**2 / m * mass_factor(bath.r) * u * u
    return ZCoefficients(complex(z0), complex(z1), complex(z21), complex(z22))


def _sym(zs, name):
    """(x^{nu nu'} + x^{nu' nu} - x^{nu nu} - x^{nu' nu'}) / 2, real part."""
    f = (lambda z: getattr(z, name)) if isinstance(name, str) else name
    v = (f(zs["nu_nup"]) + f(zs["nup_nu"]) - f(zs["nu_nu"]) - f(zs["nup_nup"])) / 2
    return complex(v).real


def rate_coefficients(bath, pair):
    """Complex z's of the (nu, nu') element, the real zeta's and the xi combinations."""
    zs = {w: z_coefficients(bath, *pair.channels(w)) for w in ELEMENTS}
    z = zs["nu_nup"]
    # xi1 from the sign-definite closed form: the combination carries rounding
    # noise of either sign when da ~ 0.  The two agree to ~1e-13 relative.
    xi1 = _xi1_closed(bath, pair)
    _, xi21, xi22 = xi_combinations(zs)
    return RateCoefficientSet(
        z0=z.z0, z1=z.z1, z21=z.z21, z22=z.z22,
        zeta0=-z.z0.real,
        zeta1=z.z1.real,
        zeta21=z.z21.real,
        zeta22=z.z22.real + z.z1.imag**2,
        xi1=xi1, xi21=xi21, xi22=xi22,
        elements=zs,
    )


def xi_combinations(zs):
    """xi1, xi21, xi22 from the symmetric combination of the four elements' z's."""
    xi1 = _sym(zs, "z1")
    xi21 = _sym(zs, "z21")
    xi22 = _sym(zs, "z22") - _sym(zs, lambda c: c.z1 * c.z1) + xi1 * xi1
    return xi1, xi21, xi22


def _xi1_closed(bath, pair):
    da2 = abs(pair.nu.a - pair.nu_prime.a) ** 2
    return -(2**2.5) * math.sqrt(math.pi) * bath.n_gas * math.sqrt(k_B / bath.m_star) * da2


def xi_closed_forms(bath, pair):
    """Closed-form xi1, xi21, xi22 written in the scattering-length differences.

    Independent of the symmetric combination used by rate_coefficients;
    the two must agree.
    """
    n, ms, m = bath.n_gas, bath.m_star, bath.m
    nu, nup = pair.nu, pair.nu_prime
    da = nu.a - nup.a
    db = nu.b_red - nup.b_red
    da2 = abs(da) ** 2
    xi1 = _xi1_closed(bath, pair)
    xi21 = 12.0 * math.pi * n * k_B / hbar * (da * db.conjugate()).real
    brace = (abs(db) ** 2
             - 4.0 * ((nu.b_red * nu.a - nup.b_red * nup.a) * da.conjugate()).imag
             + 2.0 * da2 * abs(nu.a + nup.a) ** 2)
    xi22 = (-8.0 * math.pi * k_B * n**2 / m * (mass_factor(bath.r) - 4.0 * (1.0 + bath.r)) * brace
            + 32.0 * math.pi * n**2 * k_B / ms * da2**2)
    return xi1, xi21, xi22


def _check_tT(times, T):
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(~np.isfinite(t)) or np.any(t < 0):
        raise DomainError("times must be finite and >= 0")
    T = float(T)
    if not (T >= 0 and math.isfinite(T)):
        raise DomainError(f"temperature must be finite and >= 0, got {T!r}")
    return t, T


def _bracket(c1, c21, c22, t, T, order):
    out = np.ones_like(t)
    if order >= TruncationOrder.T_HALF:
        out = out + c1 * math.sqrt(T) * t
    if order >= TruncationOrder.T1:
        out = out + T * (c21 * t + c22 * t * t / 2.0)
    return out


def coherence_series(coeffs, pair, T, times, order=TruncationOrder.T1):
    """|rho_el|(t) and eta(t) from the truncated T^{1/2} series."""
    t, T = _check_tT(times, T)
    order = TruncationOrder(order)
    abs_rho = abs(pair.rho0) * np.exp(-coeffs.zeta0 * t) * _bracket(
        coeffs.zeta1, coeffs.zeta21, coeffs.zeta22, t, T, order)
    eta = pair.eta0 * _bracket(coeffs.xi1, coeffs.xi21, coeffs.xi22, t, T, order)
    return CoherenceTrace(t, abs_rho, eta, order)


def complex_series(coeffs, pair, T, times, which="nu_nup", order=TruncationOrder.T1):
    """Complex rho_el(t) of one element, including the level-splitting phase (debugging aid)."""
    t, T = _check_tT(times, T)
    z = coeffs.elements[which]
    return pair.element(which) * np.exp(z.z0 * t) * _bracket(z.z1, z.z21, z.z22, t.astype(complex), T,
                                                            TruncationOrder(order))


def decoherence_rates(coeffs, pair, T, t, order=TruncationOrder.T1):
    """Time derivatives of |rho_el| and eta at time(s) t, from the truncated series."""
    t, T = _check_tT(t, T)
    order = TruncationOrder(order)
    z0 = coeffs.zeta0
    s = math.sqrt(T)
    brace = -z0 * np.ones_like(t)
    deta = np.zeros_like(t)
    if order >= TruncationOrder.T_HALF:
        brace = brace + coeffs.zeta1 * (1.0 - z0 * t) * s
        deta = deta + s * coeffs.xi1
    if order >= TruncationOrder.T1:
        brace = brace + T * (coeffs.zeta21 * (1.0 - z0 * t) + coeffs.zeta22 * (t - z0 * t * t / 2.0))
        deta = deta + T * (coeffs.xi21 + t * coeffs.xi22)
    d_abs = abs(pair.rho0) * np.exp(-z0 * t) * brace
    d_eta = pair.eta0 * deta
    return {"d_abs_rho_dt": d_abs, "d_eta_dt": d_eta}
