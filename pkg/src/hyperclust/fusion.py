"""Weighted combination of the pairwise, kNN and over-clustering similarities."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvalidInputError, InvalidParameterError, check_symmetric, check_weights, symmetrize

# (alpha, beta) tuning grid; the over-clustering weight is 1 - alpha - beta
WEIGHT_GRID = (
    (0.2, 0.2),
    (0.2, 0.4),
    (0.2, 0.6),
    (0.4, 0.2),
    (0.4, 0.4),
    (0.6, 0.2),
    (0.6, 0.4),
    (0.2, 0.0),
    (0.0, 0.2),
)
DEFAULT_WEIGHTS = (0.4, 0.4)
ABLATIONS = ("PKO", "PK", "PO", "P")


@dataclass(frozen=True)
class FusionWeights:
    alpha: float
    beta: float

    def __post_init__(self):
        check_weights(self.alpha, self.beta)

    @property
    def gamma(self) -> float:
        return max(0.0, 1.0 - self.alpha - self.beta)


def fuse(A, B, C, w: FusionWeights) -> np.ndarray:
    """``alpha A + beta B + (1 - alpha - beta) C``."""
    A = check_symmetric(A, "A")
    B = check_symmetric(B, "B")
    C = check_symmetric(C, "C")
    if not A.shape == B.shape == C.shape:
        raise InvalidInputError(f"shape mismatch: {A.shape}, {B.shape}, {C.shape}")
    S = w.alpha * A
    if w.beta:
        S = S + w.beta * B
    if w.gamma:
        S = S + w.gamma * C
    return symmetrize(S)


def ablation_config(name: str, alpha: float = DEFAULT_WEIGHTS[0], beta: float = DEFAULT_WEIGHTS[1]) -> FusionWeights:
    """Weights for a named hypergraph combination.

    ``PKO`` keeps ``(alpha, beta)``; ``PK`` drops the over-clustering term by
    giving kNN the remainder ``1 - alpha``; ``PO`` drops kNN (``beta = 0``);
    ``P`` is the pairwise kernel alone.
    """
    key = name.upper()
    if key == "PKO":
        return FusionWeights(alpha, beta)
    if key == "PK":
        return FusionWeights(alpha, 1.0 - alpha)
    if key == "PO":
        return FusionWeights(alpha, 0.0)
    if key == "P":
        return FusionWeights(1.0, 0.0)
    raise InvalidParameterError(f"unknown ablation {name!r}; expected one of {ABLATIONS}")
