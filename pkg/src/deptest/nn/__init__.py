"""A small numpy network engine for the three classifier architectures."""
from .layers import KINDS, LayerSpec
from .model import (
    Architecture,
    NetworkModel,
    bce,
    build_architecture,
    build_custom,
    forward,
    load_model,
    loss_and_grads,
    model_hash,
    model_inputs,
    predict,
    save_model,
)
from .train import (
    Adam,
    Metrics,
    PlateauSchedule,
    TrainConfig,
    TrainHistory,
    auc_score,
    classification_metrics,
    evaluate,
    train,
)

__all__ = [
    "Adam",
    "Architecture",
    "KINDS",
    "LayerSpec",
    "Metrics",
    "NetworkModel",
    "PlateauSchedule",
    "TrainConfig",
    "TrainHistory",
    "auc_score",
    "bce",
    "build_architecture",
    "build_custom",
    "classification_metrics",
    "evaluate",
    "forward",
    "load_model",
    "loss_and_grads",
    "model_hash",
    "model_inputs",
    "predict",
    "save_model",
    "train",
]
