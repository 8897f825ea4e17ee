"""Sequence model: embedding, causal dilated convolution stack, training,
evaluation, sampling, and the model file format."""

from .config import ModelConfig
from .network import (
    ForwardResult,
    backward,
    forward,
    forward_batch,
    init_parameters,
    loss,
    loss_and_grad,
)
from .sampling import sample_measure
from .serialize import load_model, save_model, LoadedModel
from .training import (
    Calibration,
    EvalReport,
    TrainResult,
    calibrate,
    perplexity,
    train,
)

__all__ = [
    "ModelConfig",
    "ForwardResult",
    "backward",
    "forward",
    "forward_batch",
    "init_parameters",
    "loss",
    "loss_and_grad",
    "sample_measure",
    "load_model",
    "save_model",
    "LoadedModel",
    "Calibration",
    "EvalReport",
    "TrainResult",
    "calibrate",
    "perplexity",
    "train",
]
