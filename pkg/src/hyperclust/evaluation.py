"""Clustering quality metrics and feature corruption generators."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, InvalidInputError, InvalidParameterError

NOISE_LEVELS = tuple(round(0.2 * i, 1) for i in range(1, 11))
ZEROING_RATIOS = (0.2, 0.4, 0.6)
CORRUPTION_KINDS = ("noise", "zeroing")


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray  # truth clusters x predicted clusters

    @classmethod
    def from_labels(cls, predicted, truth) -> "ContingencyTable":
        predicted = np.asarray(predicted)
        truth = np.asarray(truth)
        if predicted.shape != truth.shape or predicted.ndim != 1:
            raise InvalidInputError(f"label vectors differ in shape: {predicted.shape} vs {truth.shape}")
        if predicted.size == 0:
            raise InvalidInputError("empty labelings")
        _, t = np.unique(truth, return_inverse=True)
        _, p = np.unique(predicted, return_inverse=True)
        counts = np.zeros((t.max() + 1, p.max() + 1), dtype=np.int64)
        np.add.at(counts, (t, p), 1)
        return cls(counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def nmi(predicted, truth) -> float:
    """Mutual information over the geometric mean of the two entropies.

    When an entropy vanishes the score is 1 if both labelings are a single
    cluster and 0 otherwise.
    """
    table = ContingencyTable.from_labels(predicted, truth)
    m = table.total
    pt = table.row_sums / m
    pp = table.col_sums / m
    h_t, h_p = _entropy(pt), _entropy(pp)
    if h_t == 0 or h_p == 0:
        return 1.0 if (h_t == 0 and h_p == 0) else 0.0
    nonzero = table.counts > 0
    if np.all(nonzero.sum(axis=0) == 1) and np.all(nonzero.sum(axis=1) == 1):
        return 1.0  # same partition up to relabeling; skip the rounding in the ratio
    q = table.counts / m
    nz = q > 0
    mi = float((q[nz] * np.log(q[nz] / np.outer(pt, pp)[nz])).sum())
    return float(min(1.0, max(0.0, mi / np.sqrt(h_t * h_p))))


def accuracy(predicted, truth) -> float:
    """Share of samples carrying their predicted cluster's plurality truth label."""
    table = ContingencyTable.from_labels(predicted, truth)
    return float(table.counts.max(axis=0).sum() / table.total)


@dataclass(frozen=True)
class CorruptionSpec:
    kind: str
    level: float
    seed: int = 0
    scale: str = "std"  # noise: "std" (per-feature std multiplier) or "absolute"
    granularity: str = "element"  # zeroing: "element" or "sample"

    def __post_init__(self):
        if self.kind not in CORRUPTION_KINDS:
            raise InvalidParameterError(f"corruption kind must be one of {CORRUPTION_KINDS}")
        hi = 2.0 if self.kind == "noise" else 1.0
        if not 0.0 <= self.level <= hi:
            raise InvalidParameterError(f"{self.kind} level {self.level} outside [0, {hi}]")
        if self.scale not in ("std", "absolute"):
            raise InvalidParameterError(f"unknown noise scale {self.scale!r}")
        if self.granularity not in ("element", "sample"):
            raise InvalidParameterError(f"unknown zeroing granularity {self.granularity!r}")


def corrupt(dataset: Dataset, spec: CorruptionSpec) -> Dataset:
    """Additive Gaussian noise or random zeroing of feature entries; labels untouched."""
    if spec.level == 0:
        return dataset
    X = dataset.features
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "noise":
        g = rng.standard_normal(X.shape)
        s = X.std(axis=0) if spec.scale == "std" else np.ones(X.shape[1])
        Y = X + spec.level * s[None, :] * g
    else:
        if spec.granularity == "element":
            mask = rng.random(X.shape) < spec.level
        else:
            mask = np.repeat(rng.random((X.shape[0], 1)) < spec.level, X.shape[1], axis=1)
        Y = np.where(mask, 0.0, X)
    return dataset.with_features(Y)
