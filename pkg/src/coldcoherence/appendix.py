"""The mass factor of the iterated collision integral and its verification.

The bracket

    mass_factor(r) = 3 sqrt(2r + 1) + (1 + 2r + 3r^2) / r * asin(r / (r + 1))

multiplies the second-order term of the coherence series.  It comes from
the nine-dimensional Gaussian integral

    A(r) = int d^3Q exp(-Q^2/r) [ int d^3q |q| exp(-(Q + q)^2) ]^2
         = r^{3/2} pi^{7/2} mass_factor(r),

which is reduced to one variable through the chain A2 -> A1 -> A below.
Two quadrature routes that do not use the chain are included for
verification.
"""

import math

import numpy as np
from scipy import special, stats

from .errors import DomainError

__all__ = [
    "SERIES_THRESHOLD",
    "mass_factor",
    "A2",
    "A2_second_derivative",
    "A1",
    "appendix_A",
    "mass_factor_from_A",
    "A_nested_quadrature",
    "A_quasi_monte_carlo",
]

SERIES_THRESHOLD = 1e-4
# Taylor coefficients of the bracket about r = 0.
_SERIES = (4.0, 4.0, 2.0 / 3.0, -2.0 / 3.0)


def _check_r(r):
    r = float(r)
    if not (r > 0 and math.isfinite(r)):
        raise DomainError(f"mass ratio must be positive and finite, got {r!r}")
    return r


def mass_factor(r):
    """Bracket 3(2r+1)^{1/2} + ((1+2r+3r^2)/r) asin(r/(r+1)); 4 at r -> 0+."""
    r = _check_r(r)
    if r < SERIES_THRESHOLD:
        return ((_SERIES[3] * r + _SERIES[2]) * r + _SERIES[1]) * r + _SERIES[0]
    return 3.0 * math.sqrt(2.0 * r + 1.0) + (1.0 + 2.0 * r + 3.0 * r * r) / r * math.asin(r / (r + 1.0))


def A2(s):
    """A2(s) = asin(s) / sqrt(1 - s^2), 0 <= s < 1."""
    return math.asin(s) / math.sqrt(1.0 - s * s)


def A2_second_derivative(s):
    """d^2 A2 / ds^2 = 3s/(1-s^2)^2 + (1+2s^2) asin(s)/(1-s^2)^{5/2}."""
    u = 1.0 - s * s
    return 3.0 * s / u**2 + (1.0 + 2.0 * s * s) * math.asin(s) / u**2.5


def A1(s):
    """A1(s) = (pi^2/s) A2''(s): the six-dimensional integral over x and y."""
    if not 0 < s < 1:
        raise DomainError(f"A1 needs 0 < s < 1, got {s!r}")
    return math.pi**2 / s * A2_second_derivative(s)


def appendix_A(r):
    """A(r) from A1 at s = r/(r+1) after integrating out Q."""
    r = _check_r(r)
    s = r / (r + 1.0)
    return r**1.5 * math.pi**1.5 * (2.0 * r + 1.0) ** 2.5 / (r + 1.0) ** 4 * A1(s)


def mass_factor_from_A(A, r):
    """Invert A(r) = r^{3/2} pi^{7/2} mass_factor(r)."""
    return A / (r**1.5 * math.pi**3.5)


def A_nested_quadrature(r, n_outer=160, n_inner=160):
    """A(r) by nested Gauss-Legendre quadrature of its definition.

    The inner integral I(Q) = int d^3q |q| exp(-(Q+q)^2) is done on a
    radial grid in q with the angle between q and Q integrated in closed
    form; the outer one radially in Q.
    """
    r = _check_r(r)
    x_o, w_o = np.polynomial.legendre.leggauss(n_outer)
    x_i, w_i = np.polynomial.legendre.leggauss(n_inner)
    q_out_max = 9.0 * math.sqrt(r)
    Q = 0.5 * q_out_max * (x_o + 1.0)
    wQ = 0.5 * q_out_max * w_o
    q_in_max = Q[:, None] + 9.0
    q = 0.5 * q_in_max * (x_i[None, :] + 1.0)
    wq = 0.5 * q_in_max * w_i[None, :]
    two_Qq = 2.0 * Q[:, None] * q
    # int_{-1}^{1} exp(-(Q^2 + q^2 + 2 Q q x)) dx, written without overflow
    angular = np.exp(-((q - Q[:, None]) ** 2)) * -np.expm1(-2.0 * two_Qq) / two_Qq
    inner = 2.0 * math.pi * np.sum(wq * q**3 * angular, axis=1)
    return 4.0 * math.pi * float(np.sum(wQ * Q**2 * np.exp(-(Q**2) / r) * inner**2))


def A_quasi_monte_carlo(r, m=20, n_scrambles=8, seed=12345, chunk=2**18):
    """A(r) by randomized quasi-Monte-Carlo in all nine dimensions.

    With u = Q + q and u' = Q + q' the integrand weight is a normalised
    Gaussian times pi^{9/2} r^{3/2}, so A = pi^{9/2} r^{3/2} E[|u-Q| |u'-Q|]
    with Q ~ N(0, r/2), u, u' ~ N(0, 1/2).  Returns (estimate, standard
    error) from ``n_scrambles`` independently scrambled Sobol sequences of
    2**m points each.
    """
    r = _check_r(r)
    rng = np.random.default_rng(seed)
    means = []
    for _ in range(n_scrambles):
        sob = stats.qmc.Sobol(d=9, scramble=True, seed=rng)
        n_total = 2**m
        acc = 0.0
        done = 0
        while done < n_total:
            n = min(chunk, n_total - done)
            x = sob.random(n)
            z = special.ndtri(np.clip(x, 1e-300, 1.0 - 1e-16))
            Q = z[:, 0:3] * math.sqrt(r / 2.0)
            u = z[:, 3:6] * math.sqrt(0.5)
            up = z[:, 6:9] * math.sqrt(0.5)
            vals = np.linalg.norm(u - Q, axis=1) * np.linalg.norm(up - Q, axis=1)
            acc += math.fsum(vals)
            done += n
        means.append(acc / n_total)
    means = np.array(means)
    scale = math.pi**4.5 * r**1.5
    est = scale * means.mean()
    err = scale * means.std(ddof=1) / math.sqrt(len(means))
    return est, err
