"""From-scratch CNN engine: layers, presets, SGD training, taps, surgery."""

from .extract import extract_features, extract_features_multi, tap_provenance
from .gradcheck import GradCheckReport, grad_check
from .layers import LayerSpec, conv2d_forward
from .model import (
    Activations,
    ModelSpec,
    PRESETS,
    alexnet,
    batch_loss,
    build_model,
    forward,
    load_model,
    minialex,
    save_model,
    swap_pooling,
)
from .train import TrainConfig, evaluate, patches_to_batch, train_sgd

__all__ = [
    "Activations",
    "GradCheckReport",
    "LayerSpec",
    "ModelSpec",
    "PRESETS",
    "TrainConfig",
    "alexnet",
    "batch_loss",
    "build_model",
    "conv2d_forward",
    "evaluate",
    "extract_features",
    "extract_features_multi",
    "forward",
    "grad_check",
    "load_model",
    "minialex",
    "patches_to_batch",
    "save_model",
    "swap_pooling",
    "tap_provenance",
    "train_sgd",
]
