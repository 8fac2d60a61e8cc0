"""Tests du plan de flux aléatoires et du découpage en lots."""

import numpy as np
import pytest

from app.engine.errors import InvalidParameterError
from app.engine.rng import RngPlan, batch_sizes, map_batches


def test_same_plan_same_numbers():
    a = RngPlan(42).generator(3, "env").normal(size=5)
    b = RngPlan(42).generator(3, "env").normal(size=5)
    assert np.array_equal(a, b)


def test_substreams_are_distinct():
    plan = RngPlan(42)
    draws = {s: plan.generator(0, s).random(4).tobytes() for s in ("init", "env", "walker", "probe")}
    assert len(set(draws.values())) == 4


def test_batches_are_distinct():
    plan = RngPlan(7)
    assert not np.array_equal(plan.generator(0, "env").random(4), plan.generator(1, "env").random(4))


def test_full_64_bit_seed():
    RngPlan(2**64 - 1).generator(0, "init").random()
    with pytest.raises(InvalidParameterError):
        RngPlan(2**64)
    with pytest.raises(InvalidParameterError):
        RngPlan(-1)


def test_unknown_substream():
    with pytest.raises(InvalidParameterError):
        RngPlan(1).generator(0, "noise")


def test_batch_sizes():
    assert batch_sizes(10, 4) == [4, 4, 2]
    assert batch_sizes(8, 4) == [4, 4]
    assert batch_sizes(3, 10) == [3]
    with pytest.raises(InvalidParameterError):
        batch_sizes(10, 0)


def test_map_batches_order_independent_of_workers():
    plan = RngPlan(5)

    def draw(i):
        return plan.generator(i, "env").normal(size=3)

    serial = map_batches(draw, 6, workers=1)
    pooled = map_batches(draw, 6, workers=4)
    assert all(np.array_equal(a, b) for a, b in zip(serial, pooled))
