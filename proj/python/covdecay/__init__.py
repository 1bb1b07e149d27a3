"""Covariance decay of copula-based time series."""

import csv
import io
import json

import numpy as np

from ._core import (
    CovdecayError,
    DomainError,
    IngestionError,
    Marginal,
    ValidityError,
    copula_cdf,
    estimate,
    fgm_density,
    fgm_min_kappa,
    git_blob_hash,
    hoeffding_cov,
    k_constants,
    lag_estimates,
    schedule_values,
)
from ._core import mc_table as _mc_table
from ._core import simulate as _simulate

__all__ = [
    "CovdecayError",
    "DomainError",
    "IngestionError",
    "Marginal",
    "ValidityError",
    "copula_cdf",
    "estimate",
    "fgm_density",
    "fgm_min_kappa",
    "git_blob_hash",
    "hoeffding_cov",
    "k_constants",
    "lag_estimates",
    "mc_table",
    "schedule_values",
    "simulate",
]


def simulate(schedule, marginal, n, seed=1, method="auto"):
    """Simulated path as a float64 array."""
    return np.asarray(_simulate(schedule, marginal, n, seed, method), dtype=np.float64)


def mc_table(config):
    """Run a Monte Carlo experiment; returns (rows, replications) as lists of dicts."""
    table, records = _mc_table(json.dumps(config))
    return list(csv.DictReader(io.StringIO(table))), list(csv.DictReader(io.StringIO(records)))
