"""Energy-optimal power allocation for decode-and-forward relaying over
correlated Nakagami-m fading.

The layers build on one another:

* :mod:`dfrelay.special` and :mod:`dfrelay.integrals`: hypergeometric
  functions and closed-form trigonometric integrals
* :mod:`dfrelay.link` and :mod:`dfrelay.ser`: link budget and symbol
  error rates (exact, asymptotic, quadrature)
* :mod:`dfrelay.simulate`: Monte Carlo cross-check
* :mod:`dfrelay.energy` and :mod:`dfrelay.optimize`: energy per bit and
  the constrained power allocation
* :mod:`dfrelay.experiments` and :mod:`dfrelay.cli`: experiment runners
"""
__version__ = "0.1.0"

from .errors import AccuracyError, DfRelayError, DomainError, InfeasibleError
from .special import SeriesAccuracy, appell_f1, gauss_2f1
from .integrals import (IntegralBounds, integral_I, integral_J, integral_K,
                        integral_sin_power, quadrature_oracle)
from .modulation import Modulation
from .link import FadingParams, Geometry, LinkBudget, noise_power, path_loss, snr_scalars
from .ser import (SerResult, ser_coop_asymptotic, ser_coop_exact, ser_coop_quadrature,
                  ser_direct_exact, rho_from_targets)
from .simulate import McConfig, McEstimate, simulate_df_link
from .energy import EnergyProfile, cooperation_gain, energy_coop, energy_direct, min_energy_direct
from .optimize import OpaProblem, OpaResult, convexity_probe, kkt_check, solve_opa

__all__ = [
    "AccuracyError", "DfRelayError", "DomainError", "InfeasibleError",
    "SeriesAccuracy", "appell_f1", "gauss_2f1",
    "IntegralBounds", "integral_I", "integral_J", "integral_K", "integral_sin_power",
    "quadrature_oracle", "Modulation",
    "FadingParams", "Geometry", "LinkBudget", "noise_power", "path_loss", "snr_scalars",
    "SerResult", "ser_coop_asymptotic", "ser_coop_exact", "ser_coop_quadrature",
    "ser_direct_exact", "rho_from_targets",
    "McConfig", "McEstimate", "simulate_df_link",
    "EnergyProfile", "cooperation_gain", "energy_coop", "energy_direct", "min_energy_direct",
    "OpaProblem", "OpaResult", "convexity_probe", "kkt_check", "solve_opa",
]
