"""Light buffer gas (small mass ratio r) limit.

To first order in r the off-diagonal element decays exponentially with the
thermal averages w_k of the forward and two-body amplitudes,

    w_k = int d^3q e^{-q^2}/pi^{3/2} (4 - 2 q^2)^k
          { 2 pi i [f(q) - f'(q)*]/l + 4 pi q theta^{1/2} f(q) f'(q)*/l^2 },

where f(q) = f(hbar theta^{1/2} q / l) is the s-wave amplitude.  The
relative coherence decays with omega_k = (w^{nu nu'} + w^{nu' nu} - w^{nu nu}
- w^{nu' nu'})/2, which only involves |f_nu - f_nu'|^2.  The reference
length l cancels from every rate returned here.
"""

from dataclasses import dataclass
import math

import numpy as np

from .constants import hbar, k_B
from .errors import DomainError, NoRealSolutionError
from .scattering import Channel, amp_diff_sq_coeffs

__all__ = [
    "SmallRCoefficients",
    "w_integral",
    "omega",
    "lambda_1",
    "lambda_2",
    "lambda_2_quadrature",
    "small_r_coefficients",
    "ValidityReport",
    "validity_conditions",
    "InversionResult",
    "invert_alpha",
]

_QMAX = 9.0
_NODES = 96


@dataclass(frozen=True)
class SmallRCoefficients:
    w0: complex
    w1: complex
    omega0: float
    omega1: float
    lambda1: float
    lambda2: float


def _radial_rule(n=_NODES):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * _QMAX * (x + 1.0), 0.5 * _QMAX * w


def _scaled(ch, length):
    return ch.a / length, ch.b_red / length**2, ch.c_red / length**3


def _check_theta(theta):
    theta = float(theta)
    if not (theta >= 0 and math.isfinite(theta)):
        raise DomainError(f"theta must be finite and >= 0, got {theta!r}")
    return theta


def _w_expansion(k, ch_x, ch_y, theta, length):
    A, B, C = _scaled(ch_x, length)
    Ap, Bp, Cp = _scaled(ch_y, length)
    lead = -2j * math.pi * (A - Ap.conjugate())
    cterm = 3.0 * math.pi * (1j * (C - Cp.conjugate()) - 2.0 * (A * Bp.conjugate() + B * Ap.conjugate()))
    if k == 0:
        half = 4.0 * math.sqrt(math.pi) * (1j * (B - Bp.conjugate()) + 2.0 * A * Ap.conjugate())
        return complex(lead + math.sqrt(theta) * half + theta * cterm)
    return complex(lead - theta * cterm)


def _w_quadrature(k, ch_x, ch_y, theta, length, nodes):
    A, B, C = _scaled(ch_x, length)
    Ap, Bp, Cp = _scaled(ch_y, length)
    q, wq = _radial_rule(nodes)
    s = math.sqrt(theta)
    f = -A + B * s * q + C * theta * q * q
    fp = -Ap + Bp * s * q + Cp * theta * q * q
    brace = 2j * math.pi * (f - fp.conjugate()) + 4.0 * math.pi * q * s * f * fp.conjugate()
    weight = 4.0 / math.sqrt(math.pi) * wq * q * q * np.exp(-q * q) * (4.0 - 2.0 * q * q) ** k
    return complex(np.sum(weight * brace))


def w_integral(k, bath, pair, theta, mode="quadrature", length=1e-9, which="nu_nup", nodes=_NODES):
    """w_k of one matrix element, dimensionless (rate per unit scaled time).

    ``mode="expansion"`` returns the low-theta series through order theta;
    ``mode="quadrature"`` integrates the truncated amplitude exactly on a
    radial Gauss-Legendre grid.  ``bath`` is accepted for interface symmetry;
    w_k does not depend on the masses beyond theta.
    """
    if k not in (0, 1):
        raise DomainError(f"w_integral is defined for k in {{0, 1}}, got {k!r}")
    theta = _check_theta(theta)
    ch_x, ch_y = pair.channels(which)
    if mode == "expansion":
        return _w_expansion(k, ch_x, ch_y, theta, length)
    if mode == "quadrature":
        return _w_quadrature(k, ch_x, ch_y, theta, length, nodes)
    raise DomainError(f"unknown mode {mode!r}")


def omega(k, pair, theta, length=1e-9, nodes=_NODES):
    """omega_k = -8 pi^{1/2} theta^{1/2} int q^3 (4-2q^2)^k e^{-q^2} |f - f'|^2/l^2 dq."""
    if k not in (0, 1):
        raise DomainError(f"omega is defined for k in {{0, 1}}, got {k!r}")
    theta = _check_theta(theta)
    A, B, C = _scaled(pair.nu, length)
    Ap, Bp, Cp = _scaled(pair.nu_prime, length)
    q, wq = _radial_rule(nodes)
    s = math.sqrt(theta)
    df = -(A - Ap) + (B - Bp) * s * q + (C - Cp) * theta * q * q
    integrand = q**3 * (4.0 - 2.0 * q * q) ** k * np.exp(-q * q) * np.abs(df) ** 2
    return float(-8.0 * math.sqrt(math.pi) * s * np.sum(wq * integrand))


def lambda_1(bath, pair):
    """Leading decay constant of |rho_el| for a light bath [1/s]."""
    return bath.n_gas * 2.0 * math.pi * hbar * (pair.nu.beta + pair.nu_prime.beta) / bath.m


def lambda_2(bath, pair, T, order=1):
    """Decay constant of eta for a light bath [1/s], kept to ``order`` powers of (2 m k_B T)^{1/2}."""
    T = float(T)
    if not (T >= 0 and math.isfinite(T)):
        raise DomainError(f"temperature must be finite and >= 0, got {T!r}")
    if order not in (0, 1, 2, 3):
        raise DomainError(f"order must be 0..3, got {order!r}")
    d0, d1, d2 = amp_diff_sq_coeffs(pair.nu, pair.nu_prime)
    P = math.sqrt(2.0 * bath.m * k_B * T)
    # d1 = -2 Re[da db*] and d2 in momentum units, so each term is P^j times a length^2
    terms = (4.0 * math.sqrt(math.pi) * P * d0,
             3.0 * math.pi * P**2 * d1,
             8.0 * math.sqrt(math.pi) * P**3 * d2)
    return bath.n_gas / bath.m * math.fsum(terms[:order])


def lambda_2_quadrature(bath, pair, T, length=1e-9, nodes=_NODES):
    """-(hbar n l / m) omega_0 with omega_0 by quadrature: the full r^0 decay constant."""
    theta = bath.theta(length, T)
    return -hbar * bath.n_gas * length / bath.m * omega(0, pair, theta, length, nodes)


def small_r_coefficients(bath, pair, T, length=1e-9, order=1):
    theta = bath.theta(length, T)
    return SmallRCoefficients(
        w0=w_integral(0, bath, pair, theta, length=length),
        w1=w_integral(1, bath, pair, theta, length=length),
        omega0=omega(0, pair, theta, length),
        omega1=omega(1, pair, theta, length),
        lambda1=lambda_1(bath, pair),
        lambda2=lambda_2(bath, pair, T, order),
    )


@dataclass(frozen=True)
class ValidityReport:
    """Bounds and flags for the zeroth-order-in-r approximations.

    ``ratio_*`` bound r; ``T_bound_*`` bound T^{1/2} [K^{1/2}].  A bound is
    nan when its defining denominator vanishes; the matching flag is then
    ``None`` (indeterminate) rather than a boolean.
    """

    r: float
    sqrtT: float
    margin: float
    ratio_abs: float
    T_bound_abs: float
    ratio_eta: float
    T_bound_eta: float
    r_ok_abs: object
    T_ok_abs: object
    r_ok_eta: object
    T_ok_eta: object

    @property
    def indeterminate(self):
        return [name for name in ("r_ok_abs", "T_ok_abs", "r_ok_eta", "T_ok_eta")
                if getattr(self, name) is None]

    @property
    def all_ok(self):
        flags = (self.r_ok_abs, self.T_ok_abs, self.r_ok_eta, self.T_ok_eta)
        return all(f is True for f in flags)


def _flag(value, bound, margin):
    if not math.isfinite(bound):
        return None
    return bool(value < margin * bound)


def _safe_div(num, den):
    return num / den if den != 0 else math.nan


def validity_conditions(bath, pair, T, margin=0.1):
    """Small-T expansions of |Re w0/Re w1| and |omega0/omega1| and the T bounds.

    For |rho|: ratio = 1 + e1 T^{1/2} + e2 T, and T^{1/2} << 1/|e1|.
    For eta:   ratio = 2 D0 / (3 pi^{1/2} P R) - 1 + 16 D0 D2 / (9 pi R^2)
    with P = (2 m k_B T)^{1/2}, D0 = |da|^2, R = Re[da db*], D2 = |db|^2 - 2 Re[da dc*];
    the first term dominates when P << (2 D0 / (3 pi^{1/2} |R|)) / |1 - 16 D0 D2/(9 pi R^2)|.
    """
    T = float(T)
    if not (T >= 0 and math.isfinite(T)):
        raise DomainError(f"temperature must be finite and >= 0, got {T!r}")
    nu, nup, m = pair.nu, pair.nu_prime, bath.m
    sqrtT = math.sqrt(T)
    bsum = nu.beta + nup.beta
    num1 = (nu.b_red.imag + nup.b_red.imag) - 2.0 * (nu.alpha * nup.alpha + nu.beta * nup.beta)
    num2 = (nu.c_red.imag + nup.c_red.imag) + 2.0 * (nu.a * nup.b_red.conjugate() + nu.b_red * nup.a.conjugate()).real
    e1 = _safe_div(2**1.5 * math.sqrt(m * k_B) * num1, math.sqrt(math.pi) * hbar * bsum)
    e2 = _safe_div(6.0 * m * k_B * num2, hbar**2 * bsum)
    ratio_abs = abs(1.0 + e1 * sqrtT + e2 * T) if math.isfinite(e1) else math.nan
    T_bound_abs = _safe_div(1.0, abs(e1)) if math.isfinite(e1) else math.nan

    da = nu.a - nup.a
    db = (nu.b_red - nup.b_red) / hbar
    dc = (nu.c_red - nup.c_red) / hbar**2
    D0 = abs(da) ** 2
    R = (da * db.conjugate()).real
    D2 = abs(db) ** 2 - 2.0 * (da * dc.conjugate()).real
    P = math.sqrt(2.0 * m * k_B * T)
    lead = _safe_div(2.0 * D0, 3.0 * math.sqrt(math.pi) * R)
    const = _safe_div(16.0 * D0 * D2, 9.0 * math.pi * R * R)
    if D0 == 0 or not math.isfinite(lead):
        ratio_eta = math.nan
        T_bound_eta = math.nan
    else:
        ratio_eta = abs(_safe_div(lead, P) - 1.0 + const) if P > 0 else math.inf
        T_bound_eta = _safe_div(abs(lead), abs(1.0 - const) * math.sqrt(2.0 * m * k_B))
    r = bath.r
    return ValidityReport(
        r=r, sqrtT=sqrtT, margin=margin,
        ratio_abs=ratio_abs, T_bound_abs=T_bound_abs,
        ratio_eta=ratio_eta, T_bound_eta=T_bound_eta,
        r_ok_abs=_flag(r, ratio_abs, margin), T_ok_abs=_flag(sqrtT, T_bound_abs, margin),
        r_ok_eta=_flag(r, ratio_eta, margin), T_ok_eta=_flag(sqrtT, T_bound_eta, margin),
    )


@dataclass(frozen=True)
class InversionResult:
    alpha_prime_candidates: tuple  # [m], ranked: prior-matching root first when a prior is given
    preferred: object  # index of the root matching the prior sign, or None
    delta_a_sq: float  # fitted |a_nu - a_nu'|^2 [m^2]
    slope: float  # fitted K in lambda2 = K T^{1/2} [1/(s K^1/2)]
    fit_residual: float  # weighted rms residual [1/s]


def invert_alpha(bath, known, beta_prime, lambda2_measured, order=1, sigma=None, prior_sign=None):
    """Recover alpha_nu' from measured eta decay constants at several temperatures.

    ``lambda2_measured`` is a sequence of (T [K], rate [1/s]) pairs.  The
    leading-order law lambda2 = (n/m)(2 m k_B T)^{1/2} 4 pi^{1/2} |da|^2 is
    fitted by weighted least squares in T^{1/2} (weights 1/sigma^2).  Both
    roots alpha_nu' = alpha_nu -/+ sqrt(|da|^2 - (beta_nu - beta_nu')^2) are
    returned.  ``prior_sign`` is the expected sign of alpha_nu - alpha_nu'.
    """
    if order != 1:
        raise DomainError("only the leading-order inversion is supported (order = 1)")
    data = np.asarray(lambda2_measured, dtype=float).reshape(-1, 2) if len(lambda2_measured) else np.empty((0, 2))
    if data.shape[0] == 0:
        raise DomainError("no measurements to invert")
    T, lam = data[:, 0], data[:, 1]
    if np.any(T < 0) or not np.all(np.isfinite(data)):
        raise DomainError("measurement temperatures must be finite and >= 0")
    w = np.ones_like(T) if sigma is None else 1.0 / np.asarray(sigma, dtype=float) ** 2
    x = np.sqrt(T)
    den = math.fsum(w * T)
    if den == 0:
        raise DomainError("all measurement temperatures are zero")
    K = math.fsum(w * lam * x) / den
    resid = lam - K * x
    fit_residual = math.sqrt(math.fsum(w * resid**2) / math.fsum(w))
    coef = bath.n_gas / bath.m * math.sqrt(2.0 * bath.m * k_B) * 4.0 * math.sqrt(math.pi)
    da2 = K / coef
    dbeta = known.beta - float(beta_prime)
    dalpha_sq = da2 - dbeta**2
    if dalpha_sq < 0:
        if dalpha_sq > -1e-12 * max(da2, dbeta**2):
            dalpha_sq = 0.0
        else:
            raise NoRealSolutionError(
                f"fitted |da|^2 = {da2:.6g} m^2 is below (dbeta)^2 = {dbeta**2:.6g} m^2; "
                "no real alpha_nu' reproduces the data"
            )
    root = math.sqrt(dalpha_sq)
    cands = (known.alpha - root, known.alpha + root)  # alpha - alpha' = +root, -root
    preferred = None
    if prior_sign is not None and root > 0:
        if prior_sign < 0:
            cands = cands[::-1]
        preferred = 0
    return InversionResult(cands, preferred, da2, K, fit_residual)
