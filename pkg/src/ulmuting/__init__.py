"""Uplink interference-aware muting in two-tier Poisson cellular networks.

Analytic framework (activity, serving distance, transmit power, interference
Laplace transform and moments, SINR coverage, AMC rate) together with a
ground-truth Monte Carlo simulator for cross-validation.
"""

__version__ = "0.1.0"

from .config import (NetworkConfig, TierConfig, RegimeLabel, ConfigError,
                     classify_regime, validate, noise_power, table3_config,
                     load_config, db_to_linear, linear_to_db, dbm_to_watts,
                     watts_to_dbm)
from .specfun import (QuadSpec, QuadratureError, SpecfunDomainError,
                      gauss_2f1, upper_incomplete_gamma, integrate)
from .gca import GcaContext
from .spla import SplaContext
from .amc import (AmcTable, default_table, se_from_sinr, load_pmf,
                  mean_inverse_load, mean_se, mean_br)
from .mc import (SimOptions, Realization, DropStats, MetricSet,
                 sample_network, associate, schedule, measure, run_campaign)

__all__ = [
    "NetworkConfig", "TierConfig", "RegimeLabel", "ConfigError",
    "classify_regime", "validate", "noise_power", "table3_config",
    "load_config", "db_to_linear", "linear_to_db", "dbm_to_watts",
    "watts_to_dbm",
    "QuadSpec", "QuadratureError", "SpecfunDomainError", "gauss_2f1",
    "upper_incomplete_gamma", "integrate",
    "GcaContext", "SplaContext",
    "AmcTable", "default_table", "se_from_sinr", "load_pmf",
    "mean_inverse_load", "mean_se", "mean_br",
    "SimOptions", "Realization", "DropStats", "MetricSet",
    "sample_network", "associate", "schedule", "measure", "run_campaign",
]
