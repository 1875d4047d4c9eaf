"""Weighted random sampling with replacement for class-imbalanced training.

Segments are split into two classes, relevant (carries at least one
requirement link) and irrelevant. Each class gets the normalized inverse of
its frequency as sampling weight, so an epoch of draws is balanced in
expectation regardless of the raw imbalance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateClassError, InvalidInput


@dataclass(frozen=True)
class SampleWeights:
    weights: np.ndarray  # one positive weight per training segment
    pos_fraction: float


def compute_weights(labels) -> SampleWeights:
    """Per-segment weights from binary has-any-requirement flags.

    Class weight = (1/f_c) / sum over classes of (1/f_c'), with f_c the
    class fraction of the training set. Expected positive draw fraction is
    exactly 0.5.
    """
    flags = np.asarray(labels, dtype=bool)
    if flags.size == 0:
        raise InvalidInput("empty label list")
    n_pos = int(flags.sum())
    n_neg = flags.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateClassError("both classes must be present for weighted sampling")
    f_pos = n_pos / flags.size
    f_neg = n_neg / flags.size
    z = 1.0 / f_pos + 1.0 / f_neg
    w_pos = (1.0 / f_pos) / z
    w_neg = (1.0 / f_neg) / z
    weights = np.where(flags, w_pos, w_neg)
    return SampleWeights(weights=weights, pos_fraction=f_pos)


def sample_epoch(weights: SampleWeights, epoch_size: int, rng_seed: int) -> np.ndarray:
    """Draw ``epoch_size`` segment indices i.i.d. with replacement,
    P(i) proportional to weights[i]; deterministic for a fixed seed."""
    if epoch_size < 1:
        raise InvalidInput("epoch_size must be >= 1")
    w = weights.weights
    p = w / w.sum()
    rng = np.random.default_rng(rng_seed)
    return rng.choice(w.size, size=epoch_size, replace=True, p=p)
