"""From-scratch layer kernels with exact analytic backward passes.

Everything runs in double precision numpy so finite-difference gradient
checks are meaningful. Layers cache whatever the backward pass needs on
forward and expose parameter/gradient dicts for the optimizer.
"""

from __future__ import annotations

import enum

import numpy as np

from ..errors import BatchTooSmall, OddSpatialDim, ShapeMismatch


class Mode(enum.Enum):
    TRAIN = "train"
    INFER = "infer"


def init_weights(shape: tuple[int, ...], n_inputs: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform init on [-1/sqrt(n_inputs), +1/sqrt(n_inputs)]."""
    bound = 1.0 / np.sqrt(n_inputs)
    return rng.uniform(-bound, bound, size=shape)


class Layer:
    """Base layer: parameter-free by default."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def forward(self, x: np.ndarray, mode: Mode) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def state_tensors(self) -> dict[str, np.ndarray]:
        """Non-trainable state that checkpoints must carry (BN running stats)."""
        return {}


def _im2col(x: np.ndarray, k: int) -> np.ndarray:
    """(N,C,H,W) -> (N*OH*OW, C*k*k) patches for valid stride-1 convolution."""
    windows = np.lib.stride_tricks.sliding_window_view(x, (k, k), axis=(2, 3))
    n, c, oh, ow, _, _ = windows.shape
    return windows.transpose(0, 2, 3, 1, 4, 5).reshape(n * oh * ow, c * k * k)


def _col2im(cols: np.ndarray, x_shape: tuple[int, ...], k: int) -> np.ndarray:
    """Scatter-add column gradients back to the input layout."""
    n, c, h, w = x_shape
    oh, ow = h - k + 1, w - k + 1
    patches = cols.reshape(n, oh, ow, c, k, k)
    dx = np.zeros(x_shape)
    for i in range(k):
        for j in range(k):
            dx[:, :, i : i + oh, j : j + ow] += patches[:, :, :, :, i, j].transpose(0, 3, 1, 2)
    return dx


class Conv2D(Layer):
    """Valid (no padding) stride-1 cross-correlation with 5x5 kernels."""

    def __init__(self, in_channels: int, out_channels: int, rng: np.random.Generator,
                 kernel_size: int = 5):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.k = kernel_size
        n_inputs = in_channels * kernel_size * kernel_size
        self.params = {
            "W": init_weights((out_channels, in_channels, kernel_size, kernel_size),
                              n_inputs, rng),
            "b": np.zeros(out_channels),
        }
        self._cache = None

    def forward(self, x, mode):
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise ShapeMismatch(f"conv expects (N,{self.in_channels},H,W), got {x.shape}")
        if x.shape[2] < self.k or x.shape[3] < self.k:
            raise ShapeMismatch(f"spatial dims {x.shape[2:]} smaller than kernel {self.k}")
        n, _, h, w = x.shape
        oh, ow = h - self.k + 1, w - self.k + 1
        cols = _im2col(x, self.k)
        w_mat = self.params["W"].reshape(self.out_channels, -1)
        out = cols @ w_mat.T + self.params["b"]
        self._cache = (x.shape, cols)
        return out.reshape(n, oh, ow, self.out_channels).transpose(0, 3, 1, 2)

    def backward(self, dy):
        x_shape, cols = self._cache
        n, _, h, w = x_shape
        oh, ow = h - self.k + 1, w - self.k + 1
        dy_mat = dy.transpose(0, 2, 3, 1).reshape(n * oh * ow, self.out_channels)
        self.grads["W"] = (dy_mat.T @ cols).reshape(self.params["W"].shape)
        self.grads["b"] = dy_mat.sum(axis=0)
        dcols = dy_mat @ self.params["W"].reshape(self.out_channels, -1)
        return _col2im(dcols, x_shape, self.k)


class AvgPool2x2(Layer):
    def forward(self, x, mode):
        n, c, h, w = x.shape
        if h % 2 or w % 2:
            raise OddSpatialDim(f"avg pool needs even spatial dims, got {h}x{w}")
        self._in_shape = x.shape
        return x.reshape(n, c, h // 2, 2, w // 2, 2).mean(axis=(3, 5))

    def backward(self, dy):
        return np.repeat(np.repeat(dy, 2, axis=2), 2, axis=3) / 4.0


class BatchNorm(Layer):
    """Per-feature batch normalization (per channel for 4-D inputs).

    TRAIN normalizes over the batch (and spatial dims for conv activations)
    and updates running statistics; INFER uses the running statistics.
    """

    def __init__(self, num_features: int, momentum: float = 0.9, eps: float = 1e-5):
        super().__init__()
        self.num_features = num_features
        self.momentum = momentum
        self.eps = eps
        self.params = {
            "gamma": np.ones(num_features),
            "beta": np.zeros(num_features),
        }
        self.running_mean = np.zeros(num_features)
        self.running_var = np.ones(num_features)
        self._cache = None

    def state_tensors(self):
        return {"running_mean": self.running_mean, "running_var": self.running_var}

    def _flatten(self, x):
        # (N,C,H,W) -> (N*H*W, C); (N,D) stays as is
        if x.ndim == 4:
            return x.transpose(0, 2, 3, 1).reshape(-1, x.shape[1])
        return x

    def _unflatten(self, flat, shape):
        if len(shape) == 4:
            n, c, h, w = shape
            return flat.reshape(n, h, w, c).transpose(0, 3, 1, 2)
        return flat

    def forward(self, x, mode):
        if x.shape[1] != self.num_features:
            raise ShapeMismatch(f"BN expects {self.num_features} features, got {x.shape}")
        flat = self._flatten(x)
        if mode is Mode.TRAIN:
            if x.shape[0] < 2:
                raise BatchTooSmall("batch norm training needs batch size >= 2")
            mean = flat.mean(axis=0)
            var = flat.var(axis=0)
            self.running_mean = self.momentum * self.running_mean + (1 - self.momentum) * mean
            self.running_var = self.momentum * self.running_var + (1 - self.momentum) * var
        else:
            mean, var = self.running_mean, self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (flat - mean) * inv_std
        out = xhat * self.params["gamma"] + self.params["beta"]
        self._cache = (x.shape, xhat, inv_std, mode)
        return self._unflatten(out, x.shape)

    def backward(self, dy):
        shape, xhat, inv_std, mode = self._cache
        dflat = self._flatten(dy)
        m = dflat.shape[0]
        self.grads["gamma"] = (dflat * xhat).sum(axis=0)
        self.grads["beta"] = dflat.sum(axis=0)
        dxhat = dflat * self.params["gamma"]
        if mode is Mode.TRAIN:
            # full gradient through the batch mean and variance
            dx = (inv_std / m) * (
                m * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0)
            )
        else:
            dx = dxhat * inv_std
        return self._unflatten(dx, shape)


class ReLU(Layer):
    def forward(self, x, mode):
        self._mask = x > 0
        return x * self._mask

    def backward(self, dy):
        return dy * self._mask


class Dropout(Layer):
    """Inverted dropout: train-time masking with 1/keep rescale, inference identity."""

    def __init__(self, keep: float, rng: np.random.Generator):
        super().__init__()
        if not 0 < keep <= 1:
            raise ValueError(f"keep probability must be in (0, 1], got {keep}")
        self.keep = keep
        self.rng = rng
        self._mask = None

    def forward(self, x, mode):
        if mode is Mode.INFER or self.keep == 1.0:
            self._mask = None
            return x
        self._mask = (self.rng.random(x.shape) < self.keep) / self.keep
        return x * self._mask

    def backward(self, dy):
        if self._mask is None:
            return dy
        return dy * self._mask


class Flatten(Layer):
    def forward(self, x, mode):
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._in_shape)


class Dense(Layer):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        super().__init__()
        self.in_features = in_features
        self.params = {
            "W": init_weights((in_features, out_features), in_features, rng),
            "b": np.zeros(out_features),
        }

    def forward(self, x, mode):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ShapeMismatch(f"dense expects (N,{self.in_features}), got {x.shape}")
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dy):
        self.grads["W"] = self._x.T @ dy
        self.grads["b"] = dy.sum(axis=0)
        return dy @ self.params["W"].T


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax."""
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_mse_loss(logits: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """MSE between softmax probabilities and one-hot targets.

    Returns (loss, dloss/dlogits); loss averages over batch and classes.
    """
    if logits.shape != targets.shape:
        raise ShapeMismatch(f"logits {logits.shape} vs targets {targets.shape}")
    p = softmax(logits)
    diff = p - targets
    loss = float(np.mean(diff**2))
    dp = 2.0 * diff / diff.size
    # softmax jacobian: dz_j = p_j * (g_j - sum_k g_k p_k)
    dz = p * (dp - (dp * p).sum(axis=1, keepdims=True))
    return loss, dz
