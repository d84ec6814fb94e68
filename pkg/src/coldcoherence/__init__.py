"""Decoherence of internal-state superpositions of a molecule in an ultracold buffer gas."""

from .errors import (ContractError, DegenerateRegimeError, DomainError, NoRealSolutionError,
                     NumericalError, ValidationError)
from .scattering import BathSpec, Channel, ChannelPair, amplitude, cross_sections
from .appendix import appendix_A, mass_factor
from .kinetics import TruncationOrder, coherence_series, decoherence_rates, rate_coefficients
from .lightbath import invert_alpha, lambda_1, lambda_2, omega, validity_conditions
from .oracle import MasterEquationOracle, apply_G, evolve, init_gamma
from .regimes import fig1_curves, fig2_curves
from .config import load_config, loads_config, serialize
from .scenario import invert_cli, run_scenario

__version__ = "0.1.0"
