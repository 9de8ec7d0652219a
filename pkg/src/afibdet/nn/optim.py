"""Adam optimizer over named parameter tensors."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch


class Adam:
    def __init__(self, param_shapes: dict[str, tuple[int, ...]],
                 learning_rate: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, epsilon: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.t = 0
        self.m = {k: np.zeros(s) for k, s in param_shapes.items()}
        self.v = {k: np.zeros(s) for k, s in param_shapes.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        """In-place parameter update from one gradient evaluation."""
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for name, g in grads.items():
            p = params[name]
            if g.shape != p.shape:
                raise ShapeMismatch(f"{name}: gradient {g.shape} vs parameter {p.shape}")
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g**2
            m_hat = self.m[name] / (1 - b1**self.t)
            v_hat = self.v[name] / (1 - b2**self.t)
            p -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)
