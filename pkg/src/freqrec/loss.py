"""Training objective: cross-entropy plus a spectral consistency term.

Cross-entropy treats next-item prediction as classification over the
item vocabulary (padding excluded), scoring by similarity against the
embedding table. The spectral term transforms prediction and target
representations along the temporal axis and penalizes the distance
between their real parts and between their imaginary parts; the two are
blended as (1-beta)*frequency + beta*cross_entropy.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, ShapeError
from .spectral import rdft
from .tensor import Tensor

DISTANCE_KINDS = ("l1", "l2", "mix")


def cross_entropy(
    hidden: Tensor,
    item_table: Tensor,
    targets: np.ndarray,
    valid_mask: np.ndarray,
) -> Tensor:
    """Mean negative log-likelihood of the target items at valid positions.

    Logits are hidden @ table[1:].T, so class k scores item id k+1 and the
    padding row never enters the softmax.
    """
    targets = np.asarray(targets, dtype=np.int64)
    valid = np.asarray(valid_mask, dtype=bool)
    if targets.shape != hidden.shape[:-1] or valid.shape != targets.shape:
        raise ShapeError(
            f"targets {targets.shape} and mask {valid.shape} must match "
            f"hidden leading shape {hidden.shape[:-1]}"
        )
    count = int(valid.sum())
    if count == 0:
        raise ValueError("cross_entropy: no valid positions in batch")
    if (targets[valid] < 1).any() or (targets[valid] > item_table.shape[0] - 1).any():
        raise IndexError("cross_entropy: target id outside [1, item_count] at a valid position")
    logits = hidden @ item_table.slice0(1).transpose()
    log_probs = logits.log_softmax(axis=-1)
    # padding targets would index class -1; point them at class 0 and mask out
    class_ids = np.where(valid, targets - 1, 0)
    picked = log_probs.gather_last(class_ids)
    return -(picked * valid.astype(np.float64)).sum() * (1.0 / count)


def distance(p: Tensor, t: Tensor, kind: str = "mix") -> Tensor:
    """Elementwise-mean L1 / L2 / their average between two tensors."""
    if p.shape != t.shape:
        raise ShapeError(f"distance operands must share a shape, got {p.shape} vs {t.shape}")
    if kind not in DISTANCE_KINDS:
        raise ConfigError(f"distance kind must be one of {DISTANCE_KINDS}, got {kind!r}")
    diff = p - t
    if kind == "l1":
        return diff.abs().mean()
    if kind == "l2":
        return (diff * diff).mean()
    return (diff.abs().mean() + (diff * diff).mean()) * 0.5


def frequency_loss(prediction: Tensor, target: Tensor, kind: str = "mix") -> Tensor:
    """Distance between spectra of prediction and target along the time axis.

    Both inputs are (batch, length, dim); each is transformed along the
    temporal axis and the chosen distance is applied separately to the
    real and the imaginary coefficients, then summed.
    """
    if prediction.shape != target.shape:
        raise ShapeError(
            f"frequency_loss operands must share a shape, got {prediction.shape} vs {target.shape}"
        )
    spec_p = rdft(prediction, axis=1)
    spec_t = rdft(target, axis=1)
    return distance(spec_p.real, spec_t.real, kind) + distance(spec_p.imag, spec_t.imag, kind)


def total_loss(ce: Tensor, lf: Tensor, beta: float) -> Tensor:
    """(1 - beta) * frequency term + beta * cross-entropy term."""
    if not 0.0 <= beta <= 1.0:
        raise ConfigError(f"beta must lie in [0, 1], got {beta}")
    return lf * (1.0 - beta) + ce * beta
