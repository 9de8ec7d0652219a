"""Binary checkpoint format.

Layout, all little-endian:
  magic "AFCN" | version u32 | conv1 conv2 fc1 fc2 in_h in_w u32 x6
  dropout_keep lr beta1 beta2 epsilon f64 x5 | step counter u64
  then tensors, each as rank u32, dims u32 x rank, raw f64 data:
  trainable parameters, BN running stats, Adam first moments, Adam
  second moments, all in the model's fixed layer order.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import IoFailure
from .model import ConvNet, ConvNetConfig
from .optim import Adam

MAGIC = b"AFCN"
VERSION = 1


def _write_tensor(f, arr: np.ndarray) -> None:
    f.write(struct.pack("<I", arr.ndim))
    f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
    f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _read_tensor(f) -> np.ndarray:
    rank = struct.unpack("<I", _read_exact(f, 4))[0]
    dims = struct.unpack(f"<{rank}I", _read_exact(f, 4 * rank))
    count = int(np.prod(dims)) if rank else 1
    data = np.frombuffer(_read_exact(f, 8 * count), dtype="<f8")
    return data.reshape(dims).copy()


def _read_exact(f, n: int) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise IoFailure(f"checkpoint truncated: wanted {n} bytes, got {len(data)}")
    return data


def save_checkpoint(path: str, model: ConvNet, optimizer: Adam) -> None:
    cfg = model.config
    try:
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<I", VERSION))
            f.write(struct.pack("<6I", *cfg.conv_filters, *cfg.fc_widths, *cfg.input_hw))
            f.write(struct.pack("<5d", cfg.dropout_keep, optimizer.learning_rate,
                                optimizer.beta1, optimizer.beta2, optimizer.epsilon))
            f.write(struct.pack("<Q", optimizer.t))
            params = model.parameters()
            for name in params:
                _write_tensor(f, params[name])
            for _, tensor in model.state_tensors().items():
                _write_tensor(f, tensor)
            for name in params:
                _write_tensor(f, optimizer.m[name])
            for name in params:
                _write_tensor(f, optimizer.v[name])
    except OSError as exc:
        raise IoFailure(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path: str) -> tuple[ConvNet, Adam]:
    try:
        f = open(path, "rb")
    except OSError as exc:
        raise IoFailure(f"cannot read checkpoint {path}: {exc}") from exc
    with f:
        if _read_exact(f, 4) != MAGIC:
            raise IoFailure(f"{path}: bad checkpoint magic")
        version = struct.unpack("<I", _read_exact(f, 4))[0]
        if version != VERSION:
            raise IoFailure(f"{path}: unsupported checkpoint version {version}")
        c1, c2, f1, f2, in_h, in_w = struct.unpack("<6I", _read_exact(f, 24))
        keep, lr, b1, b2, eps = struct.unpack("<5d", _read_exact(f, 40))
        t = struct.unpack("<Q", _read_exact(f, 8))[0]

        config = ConvNetConfig(conv_filters=(c1, c2), fc_widths=(f1, f2),
                               input_hw=(in_h, in_w), dropout_keep=keep)
        model = ConvNet(config, seed=0)
        params = model.parameters()
        for name in params:
            params[name][...] = _read_tensor(f)
        for key in model.state_tensors():
            model.set_state_tensor(key, _read_tensor(f))
        optimizer = Adam({k: v.shape for k, v in params.items()},
                         learning_rate=lr, beta1=b1, beta2=b2, epsilon=eps)
        optimizer.t = t
        for name in params:
            optimizer.m[name] = _read_tensor(f)
        for name in params:
            optimizer.v[name] = _read_tensor(f)
    return model, optimizer
