"""Action distributions produced by the policy generator.

Both kinds wrap autodiff Tensors so losses stay differentiable;
sampling reads the raw arrays. Rows may be batched: a Categorical of
shape (batch, A) holds one distribution per row.
"""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor, constant
from .errors import ConfigError


class Categorical:
    """Distribution over discrete action ids 0..A-1."""

    kind = "categorical"

    def __init__(self, probs):
        self.probs = probs if isinstance(probs, Tensor) else constant(np.asarray(probs, dtype=np.float64))
        p = self.probs.data
        if np.any(p < -1e-12):
            raise ConfigError("categorical probabilities must be non-negative")
        if not np.allclose(p.sum(axis=-1), 1.0, atol=1e-9):
            raise ConfigError("categorical probabilities must sum to 1")

    @classmethod
    def from_logits(cls, logits: Tensor) -> "Categorical":
        return cls(logits.softmax(axis=-1))

    @property
    def num_actions(self) -> int:
        return self.probs.data.shape[-1]

    def sample(self, rng: np.random.Generator):
        """Inverse-CDF sampling; returns an int for a single row, else an array."""
        p = self.probs.data
        if p.ndim == 1:
            return int(np.searchsorted(np.cumsum(p), rng.random() * p.sum()))
        cdf = np.cumsum(p, axis=-1)
        u = rng.random(p.shape[:-1] + (1,)) * cdf[..., -1:]
        return (cdf < u).sum(axis=-1)

    def log_prob(self, actions) -> Tensor:
        logp = self.probs.log()
        if self.probs.data.ndim == 1:
            return logp.take(np.asarray([actions]), axis=0).sum()
        return logp.gather(np.asarray(actions))

    def entropy(self) -> Tensor:
        p = self.probs
        return -(p * p.log()).sum(axis=-1)


class Gaussian:
    """Diagonal Gaussian over continuous actions."""

    kind = "gaussian"

    def __init__(self, mu, sigma):
        self.mu = mu if isinstance(mu, Tensor) else constant(np.asarray(mu, dtype=np.float64))
        self.sigma = sigma if isinstance(sigma, Tensor) else constant(np.asarray(sigma, dtype=np.float64))
        if np.any(self.sigma.data <= 0.0):
            raise ConfigError("gaussian sigma must be positive")

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.mu.data + self.sigma.data * rng.standard_normal(self.mu.data.shape)

    def entropy(self) -> Tensor:
        # 0.5 * log(2*pi*e*sigma^2) per dimension
        return (self.sigma.log() + 0.5 * np.log(2.0 * np.pi * np.e)).sum(axis=-1)
