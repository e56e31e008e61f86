"""Small-CNN layers, training loop, and checkpointing."""

from .checkpoint import load_checkpoint, save_checkpoint
from .layers import Conv2D, Dense, Flatten, Layer, MaxPool2x2, ReLU, Sigmoid
from .network import (
    LossOutput,
    Network,
    NetworkArchitecture,
    accuracy,
    bce_loss,
    build_network,
    build_toy_network,
    predict_proba,
    predict_scores,
)
from .training import (
    EpochRecord,
    IterationRecord,
    RunMetrics,
    evaluate,
    init_param_states,
    run_training,
    train_step,
)

__all__ = [
    "load_checkpoint",
    "save_checkpoint",
    "Conv2D",
    "Dense",
    "Flatten",
    "Layer",
    "MaxPool2x2",
    "ReLU",
    "Sigmoid",
    "LossOutput",
    "Network",
    "NetworkArchitecture",
    "accuracy",
    "bce_loss",
    "build_network",
    "build_toy_network",
    "predict_proba",
    "predict_scores",
    "EpochRecord",
    "IterationRecord",
    "RunMetrics",
    "evaluate",
    "init_param_states",
    "run_training",
    "train_step",
]
