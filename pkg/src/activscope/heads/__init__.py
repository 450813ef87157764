"""Classical classifier heads that replace the fully connected layers."""

from .evaluate import accuracy, predict
from .features import FeatureMatrix, load_features, save_features
from .forest import (
    ForestConfig,
    ForestModel,
    fit_forest,
    gini,
    importance,
    top_k_features,
)
from .linear import (
    LinearSvmModel,
    LogisticConfig,
    LogisticModel,
    SvmConfig,
    fit_logistic,
    fit_svm,
    hinge_objective,
    logistic_loss_grad,
)
from .persist import load_head, save_head

__all__ = [
    "FeatureMatrix",
    "ForestConfig",
    "ForestModel",
    "LinearSvmModel",
    "LogisticConfig",
    "LogisticModel",
    "SvmConfig",
    "accuracy",
    "fit_forest",
    "fit_logistic",
    "fit_svm",
    "gini",
    "hinge_objective",
    "importance",
    "load_features",
    "load_head",
    "logistic_loss_grad",
    "predict",
    "save_features",
    "save_head",
    "top_k_features",
]
