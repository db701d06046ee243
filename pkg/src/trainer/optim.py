"""
Optimizers over a ParameterStore. Moment buffers are keyed by parameter name,
so position distributions registered after construction are picked up lazily.
"""

from typing import Dict, Tuple

import numpy as np

from src.models.params import ParameterStore
from src.schemas import ConfigError


class SGD:
    def __init__(self, store: ParameterStore, lr: float = 0.01):
        self.store = store
        self.lr = lr

    def step(self) -> None:
        for _, tensor in self.store.items():
            tensor.data -= self.lr * tensor.grad

    def zero_grad(self) -> None:
        self.store.zero_grad()


class Adam:
    def __init__(self, store: ParameterStore, lr: float = 0.001,
                 betas: Tuple[float, float] = (0.9, 0.999), eps: float = 1e-8):
        self.store = store
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}
        self.t = 0

    def step(self) -> None:
        self.t += 1
        b1, b2 = self.betas
        for name, tensor in self.store.items():
            g = tensor.grad
            m = self.m.setdefault(name, np.zeros_like(tensor.data))
            v = self.v.setdefault(name, np.zeros_like(tensor.data))
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            m_hat = m / (1 - b1 ** self.t)
            v_hat = v / (1 - b2 ** self.t)
            tensor.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self) -> None:
        self.store.zero_grad()


def make_optimizer(kind: str, store: ParameterStore, lr: float):
    if kind == "adam":
        return Adam(store, lr)
    if kind == "sgd":
        return SGD(store, lr)
    raise ConfigError(f"unknown optimizer {kind!r}")
