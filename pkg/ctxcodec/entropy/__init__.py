"""
Entropy modelling: discretized Laplace model, factorized hyper prior and prior fusion.
"""

from ctxcodec.entropy.factorized import FactorizedPrior, factorized_mass
from ctxcodec.entropy.laplace import (
    SIGMA_MIN,
    EntropyParams,
    ProbabilityTable,
    estimate_rate,
    laplace_mass,
    laplace_table,
    rate_bits,
)
from ctxcodec.entropy.model import (
    EntropyModel,
    EntropyOutput,
    fuse_priors,
    hyper_decode,
    hyper_encode,
    spatial_prior,
    temporal_prior_encode,
)

__all__ = [
    "SIGMA_MIN",
    "EntropyModel",
    "EntropyOutput",
    "EntropyParams",
    "FactorizedPrior",
    "ProbabilityTable",
    "estimate_rate",
    "factorized_mass",
    "fuse_priors",
    "hyper_decode",
    "hyper_encode",
    "laplace_mass",
    "laplace_table",
    "rate_bits",
    "spatial_prior",
    "temporal_prior_encode",
]
