import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from mstream.dist import (
    Dist, capped, dist_bind, dist_dirac, dist_map, dist_marginal, dist_product, dist_sample,
    dist_uniform, support_cap,
)
from mstream.errors import SupportOverflow


def test_dirac():
    assert dict(dist_dirac(3)) == {3: 1}
    assert dict(dist_dirac(None)) == {None: 1}
    assert dict(dist_dirac((1, 2))) == {(1, 2): 1}


def test_uniform():
    assert dict(dist_uniform([-1, 1])) == {-1: F(1, 2), 1: F(1, 2)}
    assert dict(dist_uniform([1, 2, 3, 4])) == {k: F(1, 4) for k in range(1, 5)}
    assert dist_uniform([7]) == dist_dirac(7)


def test_uniform_merges_duplicates():
    assert dict(dist_uniform([1, 1, 2])) == {1: F(2, 3), 2: F(1, 3)}


def test_uniform_empty():
    with pytest.raises(ValueError):
        dist_uniform([])


def test_bind_hand_sum():
    d = dist_uniform([0, 1])
    assert dict(dist_bind(d, lambda x: dist_uniform([x, x + 1]))) == {0: F(1, 4), 1: F(1, 2), 2: F(1, 4)}


def test_marginal():
    d = dist_uniform([(0, 1), (0, 2)])
    assert dist_marginal(d, [0]) == dist_dirac(0)
    assert dist_marginal(d, [0, 1]) == d
    four = dist_uniform([(-1, -1), (-1, 1), (1, -1), (1, 1)])
    assert dict(dist_marginal(four, [1])) == {-1: F(1, 2), 1: F(1, 2)}


def test_marginal_bad_index():
    with pytest.raises(IndexError):
        dist_marginal(dist_dirac((1,)), [3])


def test_rejects_bad_weights():
    with pytest.raises(ValueError):
        Dist({1: F(1, 2)})
    with pytest.raises(ValueError):
        Dist({1: F(3, 2), 2: F(-1, 2)})


def test_zero_weights_dropped():
    assert len(Dist({1: F(1), 2: F(0)})) == 1


def test_sample_point_mass():
    assert dist_sample(dist_dirac(5), random.Random(9)) == 5


def test_sample_replay():
    d = dist_uniform([1, 2, 3, 4])
    a = [dist_sample(d, random.Random(s)) for s in range(20)]
    b = [dist_sample(d, random.Random(s)) for s in range(20)]
    assert a == b


def test_sample_frequency():
    rng = random.Random(0)
    d = dist_uniform([-1, 1])
    ones = sum(dist_sample(d, rng) == 1 for _ in range(10000))
    assert 0.47 <= ones / 10000 <= 0.53


def test_support_cap():
    with capped(3):
        assert support_cap() == 3
        with pytest.raises(SupportOverflow):
            dist_uniform(range(4))
        dist_uniform(range(3))


def test_support_cap_env(monkeypatch):
    monkeypatch.setenv("MSTREAM_SUPPORT_CAP", "17")
    assert support_cap() == 17
    with capped(5):
        assert support_cap() == 5


weights = st.lists(st.integers(1, 6), min_size=1, max_size=5)


def make(ws, base=0):
    total = sum(ws)
    return Dist({base + i: F(w, total) for i, w in enumerate(ws)})


@given(weights, weights)
def test_product_sums_to_one(a, b):
    d = dist_product(make(a), make(b))
    assert sum(d.values()) == 1
    assert all(p > 0 for p in d.values())
    assert dist_marginal(d, [0]) == make(a)


@given(weights)
def test_monad_units(ws):
    d = make(ws)
    assert dist_bind(d, dist_dirac) == d
    assert dist_bind(dist_dirac(2), lambda x: d) == d


@given(weights, weights)
def test_bind_associative(a, b):
    d = make(a)
    k = lambda x: make(b, base=x)
    h = lambda y: dist_uniform([y, -y])
    assert dist_bind(dist_bind(d, k), h) == dist_bind(d, lambda x: dist_bind(k(x), h))


@given(weights)
def test_map_preserves_mass(ws):
    assert sum(dist_map(make(ws), lambda v: v % 2).values()) == 1
