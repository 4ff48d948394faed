"""Desk-scale tabular benchmark generators.

The sandbox has no dataset downloads (and downloading clients are out of
scope), so these deterministic generators produce two-class, 10-feature
tabular problems whose train/test shapes mirror the public Pageblocks
(4379/1094) and MAGIC telescope (15216/3804) splits. Both have smooth
nonlinear decision surfaces so an RBF SVM is an appropriate model.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset

__all__ = ["make_benchmark", "BENCHMARKS"]

BENCHMARKS = {
    "blocks": (4379, 1094, 10, 101),
    "telescope": (15216, 3804, 10, 202),
}


def make_benchmark(name: str, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Return (train, test) for a named benchmark, deterministic per seed."""
    try:
        n_train, n_test, d, offset = BENCHMARKS[name]
    except KeyError:
        raise ValueError(f"unknown benchmark {name!r}; have {sorted(BENCHMARKS)}")
    rng = np.random.default_rng(seed + offset)
    n = n_train + n_test
    X = rng.standard_normal((n, d))
    if name == "blocks":
        # imbalanced classes split by a shifted quadratic surface
        score = X[:, 0] ** 2 + 0.8 * X[:, 1] ** 2 - 1.2 * X[:, 2] - 2.2
    else:
        # balanced classes along a smooth multiplicative interaction
        score = X[:, 0] * X[:, 1] + 0.7 * np.sin(1.5 * X[:, 2]) + 0.5 * X[:, 3]
    y = np.where(score > 0, 1, -1)
    train = Dataset(X[:n_train], y[:n_train])
    test = Dataset(X[n_train:], y[n_train:])
    return train, test
