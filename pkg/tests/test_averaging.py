"""Weighted combination: ratios in the log domain, streaming, merging."""

import numpy as np
import pytest

from detavg.averaging import (
    LocalEstimate,
    WeightedAccumulator,
    combine_determinantal,
    combine_uniform,
    streaming_push,
)
from detavg.errors import DimensionMismatch, EmptyBatch


def test_two_scalar_hand_instance():
    batch = [LocalEstimate(1.0, np.log(1.0)), LocalEstimate(3.0, np.log(3.0))]
    # (1*1 + 3*3) / (1 + 3)
    assert combine_determinantal(batch) == pytest.approx(2.5, rel=1e-14)
    assert combine_uniform(batch) == pytest.approx(2.0, rel=1e-14)


@pytest.mark.parametrize("shift", [40000.0, -40000.0])
def test_extreme_log_weights(shift):
    # exp(shift) overflows or underflows; ratios must still be exact
    batch = [
        LocalEstimate(1.0, shift + np.log(1.0)),
        LocalEstimate(3.0, shift + np.log(3.0)),
    ]
    assert combine_determinantal(batch) == pytest.approx(2.5, rel=1e-12)


def test_weight_scale_invariance():
    rng = np.random.default_rng(61)
    values = [rng.standard_normal((3, 3)) for _ in range(20)]
    logs = rng.uniform(-5, 5, size=20)
    base = combine_determinantal(
        [LocalEstimate(v, l) for v, l in zip(values, logs)]
    )
    for c in (137.5, 40000.0, -40000.0):
        shifted = combine_determinantal(
            [LocalEstimate(v, l + c) for v, l in zip(values, logs)]
        )
        assert np.abs(shifted - base).max() <= 1e-12 * max(1.0, np.abs(base).max())


def test_equal_weights_reduce_to_uniform():
    rng = np.random.default_rng(67)
    values = [rng.standard_normal(4) for _ in range(9)]
    batch = [LocalEstimate(v, 12.34) for v in values]
    det = combine_determinantal(batch)
    uni = combine_uniform(batch)
    assert np.allclose(det, uni, rtol=1e-13, atol=1e-13)


def test_scalar_output_stays_in_convex_hull():
    rng = np.random.default_rng(71)
    for _ in range(50):
        n = int(rng.integers(1, 12))
        vals = rng.standard_normal(n)
        logs = rng.uniform(-30, 30, size=n)
        out = combine_determinantal([LocalEstimate(float(v), float(l)) for v, l in zip(vals, logs)])
        assert vals.min() - 1e-12 <= out <= vals.max() + 1e-12


def test_single_estimate_passes_through_exactly():
    v = np.array([0.1, -2.7, 3.9])
    out = combine_determinantal([LocalEstimate(v, -123.4)])
    assert np.array_equal(out, v)


def test_empty_and_mismatched_batches():
    with pytest.raises(EmptyBatch):
        combine_determinantal([])
    with pytest.raises(EmptyBatch):
        combine_uniform([])
    bad = [LocalEstimate(np.zeros(2), 0.0), LocalEstimate(np.zeros(3), 0.0)]
    with pytest.raises(DimensionMismatch):
        combine_determinantal(bad)
    with pytest.raises(DimensionMismatch):
        combine_uniform(bad)


def test_streaming_matches_batch():
    rng = np.random.default_rng(73)
    batch = [
        LocalEstimate(rng.standard_normal((2, 2)), float(rng.uniform(-40000, 40000)))
        for _ in range(30)
    ]
    acc = WeightedAccumulator()
    for e in batch:
        streaming_push(acc, e)
    expected = combine_determinantal(batch)
    got = acc.finalize()
    assert np.abs(got - expected).max() <= 1e-12 * max(1.0, np.abs(expected).max())
    assert acc.count == 30


def test_streaming_is_order_independent():
    rng = np.random.default_rng(79)
    batch = [
        LocalEstimate(rng.standard_normal(5), float(rng.uniform(-100, 100)))
        for _ in range(25)
    ]
    acc_fwd = WeightedAccumulator()
    for e in batch:
        acc_fwd.push(e)
    acc_rev = WeightedAccumulator()
    for e in reversed(batch):
        acc_rev.push(e)
    a, b = acc_fwd.finalize(), acc_rev.finalize()
    assert np.abs(a - b).max() <= 1e-12 * max(1.0, np.abs(a).max())


def test_finalize_is_not_destructive():
    acc = WeightedAccumulator()
    acc.push(LocalEstimate(1.0, 0.0))
    mid = acc.finalize()
    assert mid == pytest.approx(1.0)
    acc.push(LocalEstimate(3.0, np.log(3.0)))
    assert acc.finalize() == pytest.approx(2.5, rel=1e-14)


def test_merge_is_associative():
    rng = np.random.default_rng(83)
    batch = [
        LocalEstimate(rng.standard_normal(3), float(rng.uniform(-50, 50)))
        for _ in range(15)
    ]
    parts = [batch[:5], batch[5:9], batch[9:]]

    def acc_of(part):
        acc = WeightedAccumulator()
        for e in part:
            acc.push(e)
        return acc

    left = acc_of(parts[0])
    left.merge(acc_of(parts[1]))
    left.merge(acc_of(parts[2]))

    right_tail = acc_of(parts[1])
    right_tail.merge(acc_of(parts[2]))
    right = acc_of(parts[0])
    right.merge(right_tail)

    expected = combine_determinantal(batch)
    for acc in (left, right):
        assert acc.count == 15
        assert np.abs(acc.finalize() - expected).max() <= 1e-12 * max(
            1.0, np.abs(expected).max()
        )


def test_merge_with_empty_accumulator():
    acc = WeightedAccumulator()
    other = WeightedAccumulator()
    other.push(LocalEstimate(2.0, 1.0))
    acc.merge(other)
    assert acc.finalize() == pytest.approx(2.0)
    acc.merge(WeightedAccumulator())  # no-op
    assert acc.finalize() == pytest.approx(2.0)


def test_accumulator_empty_and_mismatch():
    acc = WeightedAccumulator()
    with pytest.raises(EmptyBatch):
        acc.finalize()
    acc.push(LocalEstimate(np.zeros((2, 2)), 0.0))
    with pytest.raises(DimensionMismatch):
        acc.push(LocalEstimate(np.zeros(2), 0.0))


def test_shapes_and_types_preserved():
    mats = [np.eye(2), 2.0 * np.eye(2)]
    out = combine_determinantal([LocalEstimate(m, 0.0) for m in mats])
    assert isinstance(out, np.ndarray) and out.shape == (2, 2)
    scal = combine_determinantal([LocalEstimate(1.5, 0.0)])
    assert isinstance(scal, float)
