"""Statistical battery relating acoustic descriptors to embedding space."""

from .age import age_report, ridge_fit
from .glm import (
    LinearModel,
    OlsFit,
    gendered_compare,
    greedy_select,
    lr_chisq_pvalue,
    ols_fit,
    pearson_r,
)
from .gmm import GmmModel, ashman_d, bimodality_score, gmm_fit, relabel_by_cluster
from .mlp import MlpConfig, MlpRegressor, mlp_eval_cv, mlp_train

__all__ = [
    "LinearModel", "OlsFit", "ols_fit", "lr_chisq_pvalue", "greedy_select", "gendered_compare",
    "pearson_r", "GmmModel", "gmm_fit", "relabel_by_cluster", "bimodality_score", "ashman_d",
    "MlpRegressor", "MlpConfig", "mlp_train", "mlp_eval_cv", "age_report", "ridge_fit",
]
