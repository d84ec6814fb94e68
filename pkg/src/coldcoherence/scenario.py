"""Config-driven runs: every stage writes flat CSV files into one directory."""

from contextlib import contextmanager
import json
import math
import os

import numpy as np

from . import kinetics, lightbath, regimes
from .csvio import read_csv, write_csv
from .errors import DegenerateRegimeError, DomainError, NumericalError, ValidationError
from .oracle import ELEMENTS, MasterEquationOracle

__all__ = ["ScenarioResult", "run_scenario", "write_rates", "write_coherence", "write_regimes",
           "write_oracle", "write_sweep", "invert_cli", "default_t_max"]

_ERRORS = (DomainError, ValidationError, NumericalError)


@contextmanager
def _stage(module):
    """Re-raise package errors with the originating module in the message."""
    try:
        yield
    except _ERRORS as exc:
        raise type(exc)(f"{module}: {exc}") from exc


def _series_order(order):
    # --order 3 only changes lambda2; the |rho|/eta series stop at T^1.
    return kinetics.TruncationOrder(min(int(order), 2))


def default_t_max(coeffs, T):
    """5/zeta0, else the time at which the T^{1/2} term reaches unity, else 1 s."""
    if coeffs.zeta0 > 0:
        return 5.0 / coeffs.zeta0
    rate = abs(coeffs.zeta1) * math.sqrt(T)
    return 1.0 / rate if rate > 0 else 1.0


def _times(cfg, coeffs, n=None):
    t_max = cfg.run.t_max or default_t_max(coeffs, cfg.bath.T)
    return np.linspace(0.0, t_max, n or cfg.run.n_points)


def _out(out_dir, name):
    return os.path.join(out_dir, name)


def write_coherence(cfg, coeffs, out_dir, order):
    t = _times(cfg, coeffs)
    cols, data = [("t", "s")], [t]
    with _stage("kinetics"):
        for k in range(int(_series_order(order)) + 1):
            tr = kinetics.coherence_series(coeffs, cfg.pair, cfg.bath.T, t, order=k)
            cols += [(f"abs_rho_o{k}", "1"), (f"eta_o{k}", "1")]
            data += [tr.abs_rho, tr.eta]
    path = _out(out_dir, "coherence_trace.csv")
    write_csv(path, cols, zip(*data))
    return path


def _rate_rows(cfg, coeffs, order, margin):
    bath, pair, T, L = cfg.bath, cfg.pair, cfg.bath.T, cfg.run.length
    rows = list(coeffs.as_rows())
    with _stage("lightbath"):
        theta = bath.theta(L, T)
        rows.append(("theta", theta, "1"))
        rows.append(("r", bath.r, "1"))
        rows.append(("lambda1", lightbath.lambda_1(bath, pair), "1/s"))
        rows.append(("lambda2", lightbath.lambda_2(bath, pair, T, order=max(1, min(int(order), 3))), "1/s"))
        rows.append(("lambda2_quadrature", lightbath.lambda_2_quadrature(bath, pair, T, length=L), "1/s"))
        rows.append(("omega0", lightbath.omega(0, pair, theta, length=L), "1"))
        rows.append(("omega1", lightbath.omega(1, pair, theta, length=L), "1"))
        v = lightbath.validity_conditions(bath, pair, T, margin=margin)
    rows += [
        ("ratio_abs", v.ratio_abs, "1"),
        ("T_bound_abs", v.T_bound_abs, "K^1/2"),
        ("ratio_eta", v.ratio_eta, "1"),
        ("T_bound_eta", v.T_bound_eta, "K^1/2"),
    ]
    for name in ("r_ok_abs", "T_ok_abs", "r_ok_eta", "T_ok_eta"):
        flag = getattr(v, name)
        rows.append((name, math.nan if flag is None else float(flag), "flag"))
    return rows


def write_regimes(cfg, coeffs, out_dir, margin):
    """Curve samples; also returns availability flags for the rates table."""
    rows, avail = [], {}
    for fig, build in (("fig1", regimes.fig1_curves), ("fig2", regimes.fig2_curves)):
        try:
            with _stage("regimes"):
                rc = build(coeffs, margin=margin)
        except DegenerateRegimeError:
            avail[fig] = 0.0
            continue
        avail[fig] = 1.0
        for curve in ("solid", "dashed", "dotted"):
            for t, s in getattr(rc, curve):
                rows.append((fig, curve, t, s))
    path = _out(out_dir, "regimes.csv")
    write_csv(path, [("figure", "-"), ("curve", "-"), ("t", "s"), ("sqrtT", "K^1/2")], rows)
    return path, avail


def write_rates(cfg, coeffs, out_dir, order, margin, extra=()):
    rows = _rate_rows(cfg, coeffs, order, margin) + list(extra)
    path = _out(out_dir, "rates.csv")
    write_csv(path, [("name", "-"), ("value", "SI"), ("unit", "-")], rows)
    return path


def write_oracle(cfg, coeffs, out_dir, order):
    """oracle_trace.csv and comparison.csv; returns the max residual."""
    o = cfg.run.oracle
    t = _times(cfg, coeffs, o.n_points)
    with _stage("oracle"):
        orc = MasterEquationOracle(cfg.bath, cfg.pair, T=cfg.bath.T, length=cfg.run.length,
                                   n_nodes=o.n_nodes, q_max=o.q_max, tol=o.tol)
        traj = orc.trajectory(t * orc.tau_per_second, ELEMENTS)
    write_csv(_out(out_dir, "oracle_trace.csv"),
              [("t", "s"), ("abs_rho", "1"), ("eta", "1")], zip(t, traj.abs_rho, traj.eta))
    with _stage("kinetics"):
        tr = kinetics.coherence_series(coeffs, cfg.pair, cfg.bath.T, t, order=_series_order(order))
    scale = abs(cfg.pair.rho0) or 1.0
    res_abs = np.abs(tr.abs_rho - traj.abs_rho) / scale
    res_eta = np.abs(tr.eta - traj.eta)
    write_csv(_out(out_dir, "comparison.csv"),
              [("t", "s"), ("abs_rho_series", "1"), ("abs_rho_oracle", "1"), ("residual_abs_rho", "1"),
               ("eta_series", "1"), ("eta_oracle", "1"), ("residual_eta", "1")],
              zip(t, tr.abs_rho, traj.abs_rho, res_abs, tr.eta, traj.eta, res_eta))
    return float(max(res_abs.max(), res_eta.max()))


def write_sweep(cfg, out_dir, order):
    bath, pair, L = cfg.bath, cfg.pair, cfg.run.length
    rows = []
    with _stage("lightbath"):
        for T in cfg.T_sweep:
            rows.append((T, lightbath.lambda_2(bath, pair, T, order=max(1, min(int(order), 3))),
                         lightbath.lambda_2_quadrature(bath, pair, T, length=L)))
    path = _out(out_dir, "lambda_sweep.csv")
    write_csv(path, [("T", "K"), ("lambda2", "1/s"), ("lambda2_quadrature", "1/s")], rows)
    return path


class ScenarioResult(dict):
    """Artifact name -> path, plus ``max_residual`` when the oracle ran."""

    max_residual = None


def run_scenario(cfg, out_dir, order=None, margin=None, stages=("coherence", "rates", "regimes", "oracle", "sweep")):
    """Run the requested stages of ``cfg`` and write their CSVs into ``out_dir``."""
    order = cfg.run.order if order is None else int(order)
    margin = cfg.run.margin if margin is None else float(margin)
    if order not in (0, 1, 2, 3):
        raise DomainError(f"order must be 0..3, got {order}")
    os.makedirs(out_dir, exist_ok=True)
    with _stage("kinetics"):
        coeffs = kinetics.rate_coefficients(cfg.bath, cfg.pair)
    res = ScenarioResult()
    if "coherence" in stages:
        res["coherence_trace.csv"] = write_coherence(cfg, coeffs, out_dir, order)
    extra = []
    if "regimes" in stages or "rates" in stages:
        path, avail = write_regimes(cfg, coeffs, out_dir, margin)
        if "regimes" in stages:
            res["regimes.csv"] = path
        extra += [("fig1_available", avail["fig1"], "flag"), ("fig2_available", avail["fig2"], "flag")]
    if "oracle" in stages and cfg.run.oracle.enabled:
        res.max_residual = write_oracle(cfg, coeffs, out_dir, order)
        res["oracle_trace.csv"] = _out(out_dir, "oracle_trace.csv")
        res["comparison.csv"] = _out(out_dir, "comparison.csv")
        extra += [("oracle_max_residual", res.max_residual, "1"),
                  ("oracle_within_tolerance", float(res.max_residual < cfg.run.oracle.tolerance), "flag")]
    if "rates" in stages:
        res["rates.csv"] = write_rates(cfg, coeffs, out_dir, order, margin, extra)
    if "sweep" in stages and cfg.T_sweep:
        res["lambda_sweep.csv"] = write_sweep(cfg, out_dir, order)
    return res


def _measurements(path):
    names, units, cols = read_csv(path)
    if "T" not in cols or "lambda2" not in cols:
        raise ValidationError(f"{path}: need columns 'T [K]' and 'lambda2 [1/s]', got {names}")
    T, lam = cols["T"], cols["lambda2"]
    if isinstance(T, list) or isinstance(lam, list):
        raise ValidationError(f"{path}: non-numeric entries in T or lambda2")
    if len(T) == 0:
        raise DomainError(f"{path}: no measurements")
    sigma = cols.get("sigma")
    if sigma is not None and (isinstance(sigma, list) or np.any(sigma <= 0)):
        raise ValidationError(f"{path}: sigma must be positive numbers")
    return T, lam, sigma


def invert_cli(measurements, cfg, out_dir, prior_sign=None, margin=None):
    """Fit alpha_nu' from a lambda2(T) table; writes inversion_report.json.

    Channel nu and beta_nu' come from the config; the config's alpha_nu'
    is ignored except for evaluating validity flags at each candidate.
    """
    margin = cfg.run.margin if margin is None else float(margin)
    T, lam, sigma = _measurements(measurements)
    # NoRealSolutionError is surfaced verbatim.
    inv = lightbath.invert_alpha(cfg.bath, cfg.pair.nu, cfg.pair.nu_prime.beta,
                                 list(zip(T, lam)), sigma=sigma, prior_sign=prior_sign)
    pick = inv.alpha_prime_candidates[inv.preferred if inv.preferred is not None else 0]
    nup = cfg.pair.nu_prime
    fitted = type(cfg.pair)(cfg.pair.nu, type(nup).from_parts(nup.label, nup.energy, pick, nup.beta,
                                                              nup.b_red, nup.c_red),
                            cfg.pair.rho0, cfg.pair.rho0_diag_nu, cfg.pair.rho0_diag_nup)
    per_T = []
    for Ti in T:
        v = lightbath.validity_conditions(cfg.bath, fitted, float(Ti), margin=margin)
        per_T.append({"T": float(Ti), "all_ok": v.all_ok,
                      **{k: getattr(v, k) for k in ("r_ok_abs", "T_ok_abs", "r_ok_eta", "T_ok_eta")}})
    report = {
        "alpha_prime_candidates_m": list(inv.alpha_prime_candidates),
        "preferred": inv.preferred,
        "delta_a_sq_m2": inv.delta_a_sq,
        "slope_per_s_sqrtK": inv.slope,
        "fit_residual_per_s": inv.fit_residual,
        "n_measurements": int(len(T)),
        "warning": not all(p["all_ok"] for p in per_T),
        "validity": per_T,
    }
    os.makedirs(out_dir, exist_ok=True)
    path = _out(out_dir, "inversion_report.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, allow_nan=True)
        fh.write("\n")
    return report, path

