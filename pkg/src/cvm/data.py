"""Dataset ingestion, synthetic benchmark generation, splitting, standardization.

Datasets are stored dense: features as an (n, d) float64 array and labels
as an (n,) int array. Sparse LibSVM text input is densified on load.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError

__all__ = [
    "Dataset",
    "SplitSpec",
    "parse_libsvm",
    "write_libsvm",
    "split",
    "generate_circle_synthetic",
    "standardize",
]


@dataclass(frozen=True)
class Dataset:
    """Labeled feature vectors.

    Attributes
    ----------
    X : (n, d) float64 array of feature values.
    y : (n,) int array of class labels.
    """

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2:
            raise DataFormatError("feature matrix must be 2-d")
        if y.shape != (X.shape[0],):
            raise DataFormatError("label vector length must match sample count")
        if not np.all(np.isfinite(X)):
            raise DataFormatError("features contain NaN or Inf")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def classes(self) -> np.ndarray:
        """Sorted distinct labels present in the dataset."""
        return np.unique(self.y)

    def subset(self, idx) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.X.shape == other.X.shape
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )


@dataclass(frozen=True)
class SplitSpec:
    """Validation-split parameters: fraction held out and RNG seed."""

    validation_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in (0, 1)")


def parse_libsvm(text: str, dim: int | None = None) -> Dataset:
    """Parse LibSVM sparse text into a dense Dataset.

    Each nonempty line is ``<label> <idx>:<val> ...`` with 1-based strictly
    increasing indices. Lines starting with ``#`` are ignored. ``dim``
    overrides the inferred dimension (max index seen).
    """
    rows = []
    labels = []
    max_idx = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        try:
            label = int(float(tokens[0]))
        except ValueError:
            raise DataFormatError(f"line {lineno}: bad label {tokens[0]!r}") from None
        pairs = []
        prev = 0
        for tok in tokens[1:]:
            try:
                idx_s, val_s = tok.split(":", 1)
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise DataFormatError(f"line {lineno}: bad pair {tok!r}") from None
            if idx <= prev:
                raise DataFormatError(
                    f"line {lineno}: indices must be 1-based strictly increasing"
                )
            prev = idx
            pairs.append((idx, val))
        max_idx = max(max_idx, prev)
        rows.append(pairs)
        labels.append(label)
    if not rows:
        raise DataFormatError("empty input")
    d = dim if dim is not None else max_idx
    if max_idx > d:
        raise DataFormatError(f"feature index {max_idx} exceeds declared dim {d}")
    X = np.zeros((len(rows), d))
    for i, pairs in enumerate(rows):
        for idx, val in pairs:
            X[i, idx - 1] = val
    return Dataset(X, np.asarray(labels))


def write_libsvm(ds: Dataset) -> str:
    """Serialize a Dataset to LibSVM sparse text. Exact zeros are omitted."""
    lines = []
    for xi, yi in zip(ds.X, ds.y):
        parts = [str(int(yi))]
        for j in np.nonzero(xi)[0]:
            parts.append(f"{j + 1}:{float(xi[j])!r}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Deterministically split into (train, validation).

    Validation size is round(validation_fraction * n); both parts must be
    nonempty.
    """
    n = ds.n
    n_val = int(round(spec.validation_fraction * n))
    if n_val == 0 or n_val == n:
        raise ValueError(f"validation fraction {spec.validation_fraction} "
                         f"rounds to an empty part for n={n}")
    perm = np.random.default_rng(spec.seed).permutation(n)
    val_idx = np.sort(perm[:n_val])
    train_idx = np.sort(perm[n_val:])
    return ds.subset(train_idx), ds.subset(val_idx)


def generate_circle_synthetic(n: int, seed: int) -> Dataset:
    """Two-class 2-d benchmark: a Gaussian blob ringed by a noisy circle.

    n/2 inner-class points (label +1) are drawn from an isotropic standard
    Gaussian; n/2 outer-class points (label -1) sit at radius 4 with radial
    Gaussian noise of std 0.3 and uniform angle. Deterministic per (n, seed).
    """
    if n < 2 or n % 2 != 0:
        raise ValueError("n must be even and >= 2")
    rng = np.random.default_rng(seed)
    half = n // 2
    inner = rng.standard_normal((half, 2))
    theta = rng.uniform(0.0, 2.0 * np.pi, half)
    radius = 4.0 + 0.3 * rng.standard_normal(half)
    outer = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    X = np.vstack([inner, outer])
    y = np.concatenate([np.full(half, 1), np.full(half, -1)])
    return Dataset(X, y)


def standardize(
    train: Dataset, others: list[Dataset] = ()
) -> tuple[Dataset, list[Dataset], np.ndarray, np.ndarray]:
    """Center/scale features to zero mean, unit std on the training set.

    Features with zero std are centered only (std recorded as the sentinel 1).
    The same affine map is applied to every dataset in ``others``.
    """
    if train.n == 0:
        raise ValueError("empty training set")
    mean = train.X.mean(axis=0)
    std = train.X.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    mapped = [Dataset((ds.X - mean) / std, ds.y) for ds in (train, *others)]
    return mapped[0], mapped[1:], mean, std
