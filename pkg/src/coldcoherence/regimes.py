"""Validity-region boundaries in the (t, T^{1/2}) plane.

For |rho_el| the temperature-independent decay dominates while
|zeta1 (1 - zeta0 t)| T^{1/2} << zeta0; for eta the T^{1/2} term dominates
while T^{1/2} |xi21 + t xi22| << |xi1|.  Each condition is drawn as three
curves: the exact boundary (solid), its t = 0 value (dashed) and the
long-time asymptote (dotted).  "<<" is read as "< margin x".
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DegenerateRegimeError, DomainError

__all__ = [
    "RegionCurves",
    "fig1_solid",
    "fig1_dashed",
    "fig1_dotted",
    "fig2_solid",
    "fig2_dashed",
    "fig2_dotted",
    "fig1_curves",
    "fig2_curves",
]


@dataclass(frozen=True)
class RegionCurves:
    """Sampled curves as (N, 2) arrays of (t [s], sqrtT [K^1/2]).

    ``flags`` records omitted asymptotes and excluded pole neighbourhoods;
    ``poles`` lists t values where the solid curve diverges.
    """

    solid: np.ndarray
    dashed: np.ndarray
    dotted: np.ndarray
    margin: float
    poles: tuple = ()
    flags: dict = field(default_factory=dict)


def _t(t):
    return np.asarray(t, dtype=float)


def fig1_solid(c, t, margin=0.1):
    """sqrtT = margin zeta0 / (|zeta1| |1 - zeta0 t|); inf at t = 1/zeta0."""
    den = abs(c.zeta1) * np.abs(1.0 - c.zeta0 * _t(t))
    with np.errstate(divide="ignore"):
        return np.where(den > 0, margin * c.zeta0 / np.where(den > 0, den, 1.0), np.inf)


def fig1_dashed(c, t, margin=0.1):
    return np.full_like(_t(t), margin * c.zeta0 / abs(c.zeta1))


def fig1_dotted(c, t, margin=0.1):
    t = _t(t)
    with np.errstate(divide="ignore"):
        return margin / (abs(c.zeta1) * t)


def fig2_solid(c, t, margin=0.1):
    """sqrtT = margin |xi1| / |xi21 + t xi22|; inf where the bracket vanishes."""
    den = np.abs(c.xi21 + _t(t) * c.xi22)
    with np.errstate(divide="ignore"):
        return np.where(den > 0, margin * abs(c.xi1) / np.where(den > 0, den, 1.0), np.inf)


def fig2_dashed(c, t, margin=0.1):
    with np.errstate(divide="ignore"):
        return np.full_like(_t(t), margin * abs(c.xi1) / abs(c.xi21) if c.xi21 else np.inf)


def fig2_dotted(c, t, margin=0.1):
    t = _t(t)
    with np.errstate(divide="ignore"):
        return margin * abs(c.xi1) / (abs(c.xi22) * t)


def _times(t_range):
    t0, t1, n = t_range
    if not (0 <= t0 < t1) or n < 2:
        raise DomainError("t_range must be (t0, t1, n) with 0 <= t0 < t1 and n >= 2")
    return np.linspace(t0, t1, int(n))


def _pairs(t, y):
    keep = np.isfinite(y) & (y >= 0)
    return np.column_stack([t[keep], y[keep]])


def _drop_pole(t, pole, width):
    if pole is None or not (t[0] <= pole <= t[-1]):
        return t, False
    keep = np.abs(t - pole) > width
    return t[keep], bool(np.any(~keep))


def _check_margin(margin):
    if not (margin > 0 and math.isfinite(margin)):
        raise DomainError(f"margin must be positive, got {margin!r}")


def fig1_curves(coeffs, margin=0.1, t_range=None, pole_exclusion=1e-3):
    """Boundary curves for the temperature-independent decay of |rho_el|.

    ``t_range`` = (t0, t1, n) in seconds, default (0, 3/zeta0, 301).
    Points within ``pole_exclusion`` x (t1 - t0) of t = 1/zeta0 are dropped.
    """
    _check_margin(margin)
    if not coeffs.zeta0 > 0:
        raise DegenerateRegimeError("zeta0 = 0: no temperature-independent decay to compare against")
    if coeffs.zeta1 == 0:
        raise DegenerateRegimeError("zeta1 = 0: the T^{1/2} term vanishes identically")
    pole = 1.0 / coeffs.zeta0
    t = _times(t_range or (0.0, 3.0 * pole, 301))
    ts, excluded = _drop_pole(t, pole, pole_exclusion * (t[-1] - t[0]))
    td = t[t > 0]
    return RegionCurves(
        solid=_pairs(ts, fig1_solid(coeffs, ts, margin)),
        dashed=_pairs(t, fig1_dashed(coeffs, t, margin)),
        dotted=_pairs(td, fig1_dotted(coeffs, td, margin)),
        margin=margin,
        poles=(pole,),
        flags={"pole_excluded": excluded},
    )


def fig2_curves(coeffs, margin=0.1, t_range=None, pole_exclusion=1e-3):
    """Boundary curves for the T^{1/2}-dominated decay of eta.

    When xi21 and xi22 have opposite signs the solid curve has a pole at
    t = -xi21/xi22; its neighbourhood is excluded and flagged.  A vanishing
    xi21 (xi22) removes the dashed (dotted) asymptote, with a flag.
    """
    _check_margin(margin)
    if coeffs.xi1 == 0:
        raise DegenerateRegimeError("xi1 = 0: the T^{1/2} term of eta vanishes (equal scattering lengths)")
    x21, x22 = coeffs.xi21, coeffs.xi22
    if t_range is None:
        scale = abs(x21 / x22) if x21 and x22 else 1.0 / abs(coeffs.xi1)
        t_range = (0.0, 5.0 * scale, 301)
    t = _times(t_range)
    flags = {"dashed_omitted": x21 == 0, "dotted_omitted": x22 == 0,
             "same_sign": bool(x21 * x22 > 0), "pole_excluded": False}
    poles = ()
    pole = -x21 / x22 if x22 else None
    if pole is not None and pole > 0:
        poles = (pole,)
    ts, flags["pole_excluded"] = _drop_pole(t, pole if poles else None, pole_exclusion * (t[-1] - t[0]))
    td = t[t > 0]
    empty = np.empty((0, 2))
    return RegionCurves(
        solid=_pairs(ts, fig2_solid(coeffs, ts, margin)),
        dashed=empty if x21 == 0 else _pairs(t, fig2_dashed(coeffs, t, margin)),
        dotted=empty if x22 == 0 else _pairs(td, fig2_dotted(coeffs, td, margin)),
        margin=margin,
        poles=poles,
        flags=flags,
    )
