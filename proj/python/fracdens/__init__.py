"""Stationary-density estimation for additive fractional SDEs.

Core operations live in the compiled extension; the study drivers accept and
return plain dictionaries here, converting to JSON text at the boundary.
"""

import json as _json

from ._core import (
    ConfigError,
    Model,
    PreconditionError,
    adaptive_target,
    estimate_density,
    fgn_autocovariance,
    gamma_exponent,
    generate_fgn,
    make_fou,
    make_linear,
    make_tanh,
    oracle_bandwidth,
    rate_exponents,
    sample_stationary,
    select_bandwidth,
    stationary_covariance,
    stationary_pdf,
)
from ._core import (
    run_concentration_study_json as _run_concentration_study_json,
)
from ._core import (
    run_rate_study_json as _run_rate_study_json,
)
from ._core import (
    run_risk_study_json as _run_risk_study_json,
)

__all__ = [
    "ConfigError",
    "Model",
    "PreconditionError",
    "adaptive_target",
    "concentration_study",
    "estimate_density",
    "fgn_autocovariance",
    "gamma_exponent",
    "generate_fgn",
    "make_fou",
    "make_linear",
    "make_tanh",
    "oracle_bandwidth",
    "rate_exponents",
    "rate_study",
    "risk_study",
    "sample_stationary",
    "select_bandwidth",
    "stationary_covariance",
    "stationary_pdf",
]

__version__ = "0.1.0"


def risk_study(config: dict) -> dict:
    """Monte Carlo pointwise risk study; see the README for the config schema."""
    return _json.loads(_run_risk_study_json(_json.dumps(config)))


def rate_study(config: dict) -> dict:
    """Risk ladder over n*delta with a log-log slope read-off."""
    return _json.loads(_run_rate_study_json(_json.dumps(config)))


def concentration_study(config: dict) -> dict:
    """Empirical tail curves against the sub-Gaussian bound."""
    return _json.loads(_run_concentration_study_json(_json.dumps(config)))
