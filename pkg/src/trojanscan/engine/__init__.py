"""Differentiable model engine: fixed layer vocabulary, input/parameter
gradients, Adam, and bit-exact model serialization."""

from .backend import backend_name
from .layers import Conv2d, Dense, Flatten, MaxPool2d, ReLU, ShapeError
from .losses import (BinaryCrossEntropy, SoftmaxCrossEntropy, sigmoid,
                     softmax)
from .model import (ModelGraph, NonFiniteError, backward, forward,
                    forward_trace, grad_input, grad_params, input_jacobian,
                    predict, value_and_grads)
from .optim import AdamState, adam_step
from .serialize import (ChecksumError, ModelFormatError, TruncatedError,
                        VersionError, load_bundle, load_model, save_bundle,
                        save_model)

__all__ = [
    "backend_name",
    "Conv2d", "Dense", "Flatten", "MaxPool2d", "ReLU", "ShapeError",
    "BinaryCrossEntropy", "SoftmaxCrossEntropy", "sigmoid", "softmax",
    "ModelGraph", "NonFiniteError", "backward", "forward", "forward_trace",
    "grad_input", "grad_params", "input_jacobian", "predict", "value_and_grads",
    "AdamState", "adam_step",
    "ChecksumError", "ModelFormatError", "TruncatedError", "VersionError",
    "load_bundle", "load_model", "save_bundle", "save_model",
]
