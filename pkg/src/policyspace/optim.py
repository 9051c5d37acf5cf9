"""Optimizers: Adam (default) and plain SGD, plus global-norm gradient clipping.

A step first validates every gradient; a non-finite gradient rejects the
whole step before any parameter is touched. A step that would produce a
non-finite parameter is likewise an error.
"""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor
from .errors import NumericError


def clip_grad_norm(params: list[Tensor], max_norm: float) -> float:
    """Scale all gradients so their global L2 norm is at most `max_norm`."""
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += float((p.grad * p.grad).sum())
    total = np.sqrt(total)
    if total > max_norm and total > 0.0:
        scale = max_norm / total
        for p in params:
            if p.grad is not None:
                p.grad *= scale
    return float(total)


class Adam:
    """Standard first/second-moment update; moments persist across steps."""

    def __init__(self, params: list[Tensor], lr: float = 3e-4,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        grads = []
        for i, p in enumerate(self.params):
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            if not np.isfinite(g).all():
                raise NumericError(f"non-finite gradient in parameter {i}; step rejected")
            grads.append(g)

        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for i, (p, g) in enumerate(zip(self.params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g
            m_hat = self.m[i] / bc1
            v_hat = self.v[i] / bc2
            p.data = p.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
            if not np.isfinite(p.data).all():
                raise NumericError(f"non-finite parameter {i} after update")

    # -- checkpoint support ------------------------------------------------

    def state_arrays(self) -> list[np.ndarray]:
        return list(self.m) + list(self.v)

    def load_state(self, arrays: list[np.ndarray], t: int):
        n = len(self.params)
        if len(arrays) != 2 * n:
            raise NumericError(f"expected {2 * n} moment arrays, got {len(arrays)}")
        self.m = [a.reshape(p.data.shape).astype(np.float64).copy()
                  for a, p in zip(arrays[:n], self.params)]
        self.v = [a.reshape(p.data.shape).astype(np.float64).copy()
                  for a, p in zip(arrays[n:], self.params)]
        self.t = t


class SGD:
    """Plain gradient descent, available behind config for comparisons."""

    def __init__(self, params: list[Tensor], lr: float = 3e-4):
        self.params = list(params)
        self.lr = lr
        self.t = 0

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        for i, p in enumerate(self.params):
            g = p.grad if p.grad is not None else None
            if g is None:
                continue
            if not np.isfinite(g).all():
                raise NumericError(f"non-finite gradient in parameter {i}; step rejected")
            p.data = p.data - self.lr * g
            if not np.isfinite(p.data).all():
                raise NumericError(f"non-finite parameter {i} after update")
        self.t += 1

    def state_arrays(self) -> list[np.ndarray]:
        return []

    def load_state(self, arrays: list[np.ndarray], t: int):
        self.t = t
