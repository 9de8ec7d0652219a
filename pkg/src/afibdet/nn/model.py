"""The spectrogram classifier: conv-BN-ReLU-pool x2, two FC layers with
dropout, two output nodes. Class index 0 is NOT_AFIB, 1 is AFIB."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeMismatch
from .layers import (
    AvgPool2x2,
    BatchNorm,
    Conv2D,
    Dense,
    Dropout,
    Flatten,
    Layer,
    Mode,
    ReLU,
    softmax,
    softmax_mse_loss,
)

NOT_AFIB_CLASS = 0
AFIB_CLASS = 1


@dataclass(frozen=True)
class ConvNetConfig:
    conv_filters: tuple[int, int] = (8, 16)
    fc_widths: tuple[int, int] = (256, 64)
    input_hw: tuple[int, int] = (64, 128)
    kernel_size: int = 5
    dropout_keep: float = 0.5


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    dropout_keep: float = 0.5
    batch_size: int = 64
    epochs: int = 100
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.dropout_keep <= 1:
            raise ValueError("dropout_keep must be in (0, 1]")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must be in [0, 1)")


class ConvNet:
    def __init__(self, config: ConvNetConfig = ConvNetConfig(), seed: int = 0):
        self.config = config
        self.rng = np.random.default_rng(seed)
        c1, c2 = config.conv_filters
        f1, f2 = config.fc_widths
        h, w = config.input_hw
        k = config.kernel_size
        shrink = k - 1
        h, w = h - shrink, w - shrink
        h, w = h // 2, w // 2
        h, w = h - shrink, w - shrink
        h, w = h // 2, w // 2
        self.flat_dim = c2 * h * w

        keep = config.dropout_keep
        self.named_layers: list[tuple[str, Layer]] = [
            ("conv1", Conv2D(1, c1, self.rng, k)),
            ("bn1", BatchNorm(c1)),
            ("relu1", ReLU()),
            ("pool1", AvgPool2x2()),
            ("conv2", Conv2D(c1, c2, self.rng, k)),
            ("bn2", BatchNorm(c2)),
            ("relu2", ReLU()),
            ("pool2", AvgPool2x2()),
            ("flatten", Flatten()),
            ("fc1", Dense(self.flat_dim, f1, self.rng)),
            ("bn3", BatchNorm(f1)),
            ("relu3", ReLU()),
            ("drop1", Dropout(keep, self.rng)),
            ("fc2", Dense(f1, f2, self.rng)),
            ("bn4", BatchNorm(f2)),
            ("relu4", ReLU()),
            ("drop2", Dropout(keep, self.rng)),
            ("out", Dense(f2, 2, self.rng)),
        ]

    def forward(self, images: np.ndarray, mode: Mode) -> np.ndarray:
        """(N, 1, H, W) pixel batch in [0,1] -> (N, 2) logits."""
        x = np.asarray(images, dtype=np.float64)
        if x.ndim != 4 or x.shape[1] != 1 or x.shape[2:] != self.config.input_hw:
            raise ShapeMismatch(
                f"expected (N,1,{self.config.input_hw[0]},{self.config.input_hw[1]}), got {x.shape}"
            )
        for _, layer in self.named_layers:
            x = layer.forward(x, mode)
        return x

    def loss_and_backward(self, images: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
        """TRAIN-mode forward, MSE+softmax loss, full backward. Gradients are
        left in the layers; returns (loss, logits)."""
        logits = self.forward(images, Mode.TRAIN)
        loss, dz = softmax_mse_loss(logits, targets)
        for _, layer in reversed(self.named_layers):
            dz = layer.backward(dz)
        return loss, logits

    def parameters(self) -> dict[str, np.ndarray]:
        return {
            f"{name}.{pname}": tensor
            for name, layer in self.named_layers
            for pname, tensor in layer.params.items()
        }

    def gradients(self) -> dict[str, np.ndarray]:
        return {
            f"{name}.{pname}": tensor
            for name, layer in self.named_layers
            for pname, tensor in layer.grads.items()
        }

    def state_tensors(self) -> dict[str, np.ndarray]:
        return {
            f"{name}.{sname}": tensor
            for name, layer in self.named_layers
            for sname, tensor in layer.state_tensors().items()
        }

    def set_state_tensor(self, key: str, value: np.ndarray) -> None:
        name, sname = key.split(".", 1)
        layer = dict(self.named_layers)[name]
        setattr(layer, sname, value)

    def predict(self, images: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """INFER-mode labels and class probabilities; ties go to NOT_AFIB."""
        logits = self.forward(images, Mode.INFER)
        probs = softmax(logits)
        labels = (probs[:, AFIB_CLASS] > probs[:, NOT_AFIB_CLASS]).astype(int)
        return labels, probs


def one_hot(labels: np.ndarray, n_classes: int = 2) -> np.ndarray:
    out = np.zeros((len(labels), n_classes))
    out[np.arange(len(labels)), labels] = 1.0
    return out
