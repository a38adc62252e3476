"""Concrete augmented models with their exact conditional samplers."""

from .lasso import ElasticNetModel, LassoModel, elastic_net_da_step, lasso_da_step, standardize_design
from .logistic import LogisticModel, pg_logistic_da_step
from .probit import ProbitGlmmModel, probit_glmm_da_step, probit_haar_pxda_step
from .quantreg import (
    QuantRegModel,
    quantile_tau2,
    quantile_theta,
    quantreg_two_block_pxda_step,
    quantreg_two_block_step,
)
from .robit import RobitModel, robit_da_step

__all__ = [
    "LassoModel",
    "ElasticNetModel",
    "LogisticModel",
    "ProbitGlmmModel",
    "RobitModel",
    "QuantRegModel",
    "standardize_design",
    "lasso_da_step",
    "elastic_net_da_step",
    "pg_logistic_da_step",
    "probit_glmm_da_step",
    "probit_haar_pxda_step",
    "robit_da_step",
    "quantreg_two_block_step",
    "quantreg_two_block_pxda_step",
    "quantile_theta",
    "quantile_tau2",
]
