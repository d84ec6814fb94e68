"""Command-line entry point ``coldcoherence``.

Exit codes: 0 success, 2 validation/domain error, 3 numerical failure.
"""

import argparse
import dataclasses
import sys

from . import appendix
from .config import load_config
from .errors import DomainError, NumericalError, ValidationError
from .scenario import invert_cli, run_scenario

_STAGES = {
    "rates": ("rates",),
    "coherence": ("coherence",),
    "regimes": ("regimes",),
    "oracle": ("oracle",),
    "run": ("coherence", "rates", "regimes", "oracle", "sweep"),
}


def _common(p, config_required=True):
    p.add_argument("--config", required=config_required, metavar="PATH", help="scenario TOML file")
    p.add_argument("--out", default=".", metavar="DIR", help="output directory (default: .)")
    p.add_argument("--margin", type=float, default=None, metavar="X",
                   help="factor reading '<<' as '< X times' (default: config value, 0.1)")
    p.add_argument("--order", type=int, choices=(0, 1, 2, 3), default=None,
                   help="truncation order: powers of T^1/2 kept (series stop at 2; lambda2 uses up to 3)")
    p.add_argument("--strict", action=argparse.BooleanOptionalAction, default=True,
                   help="reject unknown config keys (default) or only warn")


def build_parser():
    ap = argparse.ArgumentParser(prog="coldcoherence",
                                 description="Coherence decay of a trapped molecule in an ultracold buffer gas.")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "rates": "write rates.csv (rate coefficients, lambda1/lambda2, validity bounds)",
        "coherence": "write coherence_trace.csv (|rho| and eta per truncation order)",
        "regimes": "write regimes.csv (validity-region boundary curves)",
        "oracle": "run the radial-grid oracle: oracle_trace.csv and comparison.csv",
        "run": "all of the above plus lambda_sweep.csv when a T sweep is configured",
    }
    for name, text in helps.items():
        _common(sub.add_parser(name, help=text))
    inv = sub.add_parser("invert", help="recover alpha_nu' from a lambda2(T) table")
    _common(inv)
    inv.add_argument("--measurements", required=True, metavar="CSV",
                     help="columns 'T [K]', 'lambda2 [1/s]', optional 'sigma [1/s]'")
    inv.add_argument("--prior-sign", type=int, choices=(-1, 1), default=None,
                     help="expected sign of alpha_nu - alpha_nu'")
    chk = sub.add_parser("appendix-check", help="print the mass-factor verification table")
    chk.add_argument("--r", type=float, nargs="+", default=[0.1, 0.5, 1.0])
    chk.add_argument("--qmc-m", type=int, default=16, help="log2 of Sobol points per scramble (default 16)")
    return ap


def _appendix_table(rs, m):
    print(f"{'r':>10} {'mass_factor':>22} {'from A (closed)':>22} {'nested quad':>22} {'QMC':>22} {'QMC err':>9}")
    for r in rs:
        mf = appendix.mass_factor(r)
        closed = appendix.mass_factor_from_A(appendix.appendix_A(r), r)
        nested = appendix.mass_factor_from_A(appendix.A_nested_quadrature(r), r)
        est, err = appendix.A_quasi_monte_carlo(r, m=m, n_scrambles=4)
        qmc = appendix.mass_factor_from_A(est, r)
        print(f"{r:10.4g} {mf:22.16g} {closed:22.16g} {nested:22.16g} {qmc:22.16g} {abs(qmc / mf - 1):9.2e}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "appendix-check":
            if any(not r > 0 for r in args.r):
                raise DomainError("r must be positive")
            _appendix_table(args.r, args.qmc_m)
            return 0
        cfg = load_config(args.config, strict=args.strict)
        if args.command == "invert":
            report, path = invert_cli(args.measurements, cfg, args.out, args.prior_sign, args.margin)
            c = report["alpha_prime_candidates_m"]
            print(f"alpha_nu' candidates [m]: {c[0]!r}, {c[1]!r}; preferred: {report['preferred']}")
            if report["warning"]:
                print("warning: some measurements lie outside the validity region", file=sys.stderr)
            print(path)
            return 0
        if args.command == "oracle" and not cfg.run.oracle.enabled:
            run = dataclasses.replace(cfg.run, oracle=dataclasses.replace(cfg.run.oracle, enabled=True))
            cfg = dataclasses.replace(cfg, run=run)
        res = run_scenario(cfg, args.out, order=args.order, margin=args.margin, stages=_STAGES[args.command])
        for path in res.values():
            print(path)
        if res.max_residual is not None:
            ok = res.max_residual < cfg.run.oracle.tolerance
            print(f"max series-oracle residual {res.max_residual:.3e} "
                  f"({'within' if ok else 'above'} tolerance {cfg.run.oracle.tolerance:g})")
        return 0
    except (ValidationError, DomainError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
