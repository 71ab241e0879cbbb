"""Determinant-weighted and uniform combination of local estimates.

Weights arrive in the log domain (log-determinants of the local matrices)
because the determinants themselves overflow or underflow long before the
weighted mean becomes ill defined.  All combiners normalize by the largest
log-weight before exponentiating, so ratios are computed exactly even when
log-weights sit at +-40000; adding a constant to every log-weight leaves
the result unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, EmptyBatch

Value = Union[float, np.ndarray]


@dataclass(frozen=True)
class LocalEstimate:
    """One machine's contribution: a value and the log of its weight."""

    value: Value
    log_weight: float


def _as_array(value: Value) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    return arr


def _restore(arr: np.ndarray, scalar: bool) -> Value:
    return float(arr) if scalar else arr


def combine_determinantal(estimates: Sequence[LocalEstimate]) -> Value:
    """Weighted mean sum_t w_t v_t / sum_t w_t with w_t = exp(log_weight_t).

    Parameters
    ----------
    estimates : sequence of LocalEstimate
        Values of a common shape with finite log-weights.

    Raises
    ------
    EmptyBatch
        If no estimates are given.
    DimensionMismatch
        If value shapes disagree.
    """
    if len(estimates) == 0:
        raise EmptyBatch("no estimates to combine")
    values = [_as_array(e.value) for e in estimates]
    shape = values[0].shape
    for v in values[1:]:
        if v.shape != shape:
            raise DimensionMismatch(f"value shapes differ: {shape} vs {v.shape}")
    logs = np.array([e.log_weight for e in estimates], dtype=float)
    # shift by the max so the largest weight is exactly 1
    w = np.exp(logs - logs.max())
    stacked = np.stack(values)
    total = np.tensordot(w, stacked, axes=(0, 0)) / w.sum()
    return _restore(total, np.isscalar(estimates[0].value) or values[0].ndim == 0)


def combine_uniform(estimates: Sequence[LocalEstimate]) -> Value:
    """Plain mean of the values; log-weights are ignored."""
    if len(estimates) == 0:
        raise EmptyBatch("no estimates to combine")
    values = [_as_array(e.value) for e in estimates]
    shape = values[0].shape
    for v in values[1:]:
        if v.shape != shape:
            raise DimensionMismatch(f"value shapes differ: {shape} vs {v.shape}")
    total = np.stack(values).mean(axis=0)
    return _restore(total, np.isscalar(estimates[0].value) or values[0].ndim == 0)


class WeightedAccumulator:
    """Streaming form of :func:`combine_determinantal`.

    Maintains the running weighted sum and weight total relative to the
    largest log-weight seen so far, rescaling whenever a new maximum
    arrives.  Accumulators can be merged, and merging is associative up to
    rounding, so a batch can be reduced in any tree order.
    """

    def __init__(self):
        self._shift = -np.inf
        self._weight_total = 0.0
        self._value_total: np.ndarray | None = None
        self._scalar = False
        self._count = 0

    @property
    def count(self) -> int:
        return self._count

    def push(self, estimate: LocalEstimate) -> None:
        """Fold one estimate into the running totals."""
        value = _as_array(estimate.value)
        if self._value_total is None:
            self._scalar = np.isscalar(estimate.value) or value.ndim == 0
            self._value_total = np.zeros_like(value)
        elif value.shape != self._value_total.shape:
            raise DimensionMismatch(
                f"value shapes differ: {self._value_total.shape} vs {value.shape}"
            )
        self._fold(estimate.log_weight, value, 1)

    def merge(self, other: "WeightedAccumulator") -> None:
        """Fold another accumulator's totals into this one."""
        if other._value_total is None:
            return
        if self._value_total is None:
            self._shift = other._shift
            self._weight_total = other._weight_total
            self._value_total = other._value_total.copy()
            self._scalar = other._scalar
            self._count = other._count
            return
        if other._value_total.shape != self._value_total.shape:
            raise DimensionMismatch(
                f"value shapes differ: {self._value_total.shape} vs {other._value_total.shape}"
            )
        self._fold(other._shift, other._value_total, other._count, weight=other._weight_total)

    def _fold(self, log_w: float, weighted_value: np.ndarray, count: int,
              weight: float = 1.0) -> None:
        # incoming totals are relative to log_w: a single pushed estimate is
        # (1, v), a merged accumulator brings its own (S, V) pair
        if log_w > self._shift:
            # rescale existing totals so the new log-weight becomes the shift
            factor = np.exp(self._shift - log_w) if np.isfinite(self._shift) else 0.0
            self._weight_total *= factor
            self._value_total *= factor
            self._shift = log_w
            scale = 1.0
        else:
            scale = np.exp(log_w - self._shift)
        self._weight_total += scale * weight
        self._value_total = self._value_total + scale * weighted_value
        self._count += count

    def finalize(self) -> Value:
        """Weighted mean of everything pushed so far.  Non-destructive."""
        if self._value_total is None or self._count == 0:
            raise EmptyBatch("no estimates pushed")
        return _restore(self._value_total / self._weight_total, self._scalar)


def streaming_push(acc: WeightedAccumulator, estimate: LocalEstimate) -> WeightedAccumulator:
    """Functional wrapper around :meth:`WeightedAccumulator.push`."""
    acc.push(estimate)
    return acc


def reduce_estimates(estimates: Iterable[LocalEstimate]) -> WeightedAccumulator:
    acc = WeightedAccumulator()
    for e in estimates:
        acc.push(e)
    return acc
