"""RBF kernel: values, Gram matrices, and spatial gradients.

Operations accept any kernel object exposing ``value``, ``matrix`` and
``grad_z`` so other differentiable kernels can plug in; only the RBF
kernel ships.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

__all__ = ["RbfKernel", "rbf", "kernel_matrix", "rbf_grad_z"]


@dataclass(frozen=True)
class RbfKernel:
    """K(x, z) = exp(-||x - z||^2 / (2 sigma^2))."""

    sigma: float

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")

    @property
    def gamma(self) -> float:
        """LibSVM parameterization: gamma = 1 / (2 sigma^2)."""
        return 1.0 / (2.0 * self.sigma**2)

    @classmethod
    def from_gamma(cls, gamma: float) -> "RbfKernel":
        if gamma <= 0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        return cls(sigma=1.0 / np.sqrt(2.0 * gamma))

    def value(self, x: np.ndarray, z: np.ndarray) -> float:
        x, z = _check_pair(x, z)
        d = x - z
        return float(np.exp(-(d @ d) / (2.0 * self.sigma**2)))

    def matrix(self, X: np.ndarray, Z: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
        if X.shape[1] != Z.shape[1]:
            raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Z.shape[1]}")
        sq = cdist(X, Z, "sqeuclidean")
        return np.exp(-sq / (2.0 * self.sigma**2))

    def grad_z(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Gradient of K(x, .) at z: K(x, z) (x - z) / sigma^2."""
        x, z = _check_pair(x, z)
        return self.value(x, z) * (x - z) / self.sigma**2


def _check_pair(x, z):
    x = np.asarray(x, dtype=np.float64).ravel()
    z = np.asarray(z, dtype=np.float64).ravel()
    if x.shape != z.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {z.shape}")
    return x, z


def rbf(x, z, p: RbfKernel) -> float:
    return p.value(x, z)


def kernel_matrix(X, Z, p: RbfKernel) -> np.ndarray:
    return p.matrix(X, Z)


def rbf_grad_z(x, z, p: RbfKernel) -> np.ndarray:
    return p.grad_z(x, z)
