from .layers import (
    AvgPool2x2,
    BatchNorm,
    Conv2D,
    Dense,
    Dropout,
    Flatten,
    Mode,
    ReLU,
    init_weights,
    softmax,
    softmax_mse_loss,
)
from .model import AFIB_CLASS, NOT_AFIB_CLASS, ConvNet, ConvNetConfig, TrainConfig, one_hot
from .optim import Adam
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "AvgPool2x2", "BatchNorm", "Conv2D", "Dense", "Dropout", "Flatten",
    "Mode", "ReLU", "init_weights", "softmax", "softmax_mse_loss",
    "AFIB_CLASS", "NOT_AFIB_CLASS", "ConvNet", "ConvNetConfig", "TrainConfig",
    "one_hot", "Adam", "load_checkpoint", "save_checkpoint",
]
