"""Finite-support probability distributions with exact rational weights."""

from __future__ import annotations

import contextlib
import contextvars
import os
from collections.abc import Callable, Iterable, Mapping, Sequence
from fractions import Fraction
from math import lcm

from .errors import SupportOverflow
from .values import Value, value_key

DEFAULT_SUPPORT_CAP = 1_000_000

_cap_override: contextvars.ContextVar[int | None] = contextvars.ContextVar(
    "mstream_support_cap", default=None
)


def support_cap() -> int:
    """Current cap: an active :func:`capped` block, else ``MSTREAM_SUPPORT_CAP``, else the default."""
    cap = _cap_override.get()
    if cap is not None:
        return cap
    env = os.environ.get("MSTREAM_SUPPORT_CAP")
    if env:
        return int(env)
    return DEFAULT_SUPPORT_CAP


@contextlib.contextmanager
def capped(limit: int):
    token = _cap_override.set(int(limit))
    try:
        yield
    finally:
        _cap_override.reset(token)


class Dist(Mapping):
    """Immutable mapping from values to strictly positive ``Fraction`` weights summing to 1."""

    __slots__ = ("_w", "_hash")

    def __init__(self, weights: Mapping[Value, Fraction] | Iterable[tuple[Value, Fraction]], *, _trusted=False):
        w = dict(weights)
        if not _trusted:
            total = Fraction(0)
            clean = {}
            for v, p in w.items():
                p = Fraction(p)
                if p < 0:
                    raise ValueError(f"negative weight {p} on {v!r}")
                if p:
                    clean[v] = p
                    total += p
            if total != 1:
                raise ValueError(f"weights sum to {total}, not 1")
            w = clean
        if not w:
            raise ValueError("empty support")
        self._w = w
        self._hash = None

    def __getitem__(self, v):
        return self._w[v]

    def __iter__(self):
        return iter(self._w)

    def __len__(self):
        return len(self._w)

    def __eq__(self, other):
        if isinstance(other, Dist):
            return self._w == other._w
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._w.items()))
        return self._hash

    def __repr__(self):
        items = ", ".join(f"{v!r}: {p}" for v, p in self.sorted_items())
        return f"Dist({{{items}}})"

    def prob(self, v) -> Fraction:
        return self._w.get(v, Fraction(0))

    def sorted_items(self) -> list[tuple[Value, Fraction]]:
        return sorted(self._w.items(), key=lambda kv: value_key(kv[0]))

    def is_point(self) -> bool:
        return len(self._w) == 1

    def point(self) -> Value:
        if len(self._w) != 1:
            raise ValueError("distribution is not a point mass")
        return next(iter(self._w))


class _Accumulator:
    """Weight accumulator that enforces the support cap as entries are added."""

    __slots__ = ("w", "cap")

    def __init__(self):
        self.w: dict = {}
        self.cap = support_cap()

    def add(self, v, p):
        w = self.w
        if v in w:
            w[v] += p
        else:
            w[v] = p
            if len(w) > self.cap:
                raise SupportOverflow(self.cap, len(w))

    def result(self) -> Dist:
        return Dist({v: p for v, p in self.w.items() if p}, _trusted=True)


def dist_dirac(v: Value) -> Dist:
    return Dist({v: Fraction(1)}, _trusted=True)


def dist_uniform(values: Sequence[Value]) -> Dist:
    """Uniform over a list; repeated entries merge their weight."""
    values = list(values)
    if not values:
        raise ValueError("empty support")
    share = Fraction(1, len(values))
    acc = _Accumulator()
    for v in values:
        acc.add(v, share)
    return acc.result()


def dist_bind(d: Dist, k: Callable[[Value], Dist]) -> Dist:
    acc = _Accumulator()
    for y, py in d.items():
        for z, pz in k(y).items():
            acc.add(z, py * pz)
    return acc.result()


def dist_map(d: Dist, f: Callable[[Value], Value]) -> Dist:
    """Pushforward along a function."""
    acc = _Accumulator()
    for v, p in d.items():
        acc.add(f(v), p)
    return acc.result()


def dist_product(d1: Dist, d2: Dist, combine: Callable[[Value, Value], Value] = lambda a, b: (a, b)) -> Dist:
    """Independent joint of two distributions."""
    acc = _Accumulator()
    for a, pa in d1.items():
        for b, pb in d2.items():
            acc.add(combine(a, b), pa * pb)
    return acc.result()


def dist_marginal(d: Dist, keep: Sequence[int]) -> Dist:
    """Project tuple-valued outcomes onto ``keep``; a single index unwraps the component."""
    keep = list(keep)
    for v in d:
        if not isinstance(v, tuple):
            raise ValueError(f"marginal needs tuple outcomes, got {v!r}")
        for i in keep:
            if not -len(v) <= i < len(v):
                raise IndexError(f"index {i} out of range for outcome of length {len(v)}")
    if len(keep) == 1:
        (i,) = keep
        return dist_map(d, lambda v: v[i])
    return dist_map(d, lambda v: tuple(v[i] for i in keep))


def dist_sample(d: Dist, rng) -> Value:
    """Draw one outcome from ``rng`` (a ``random.Random``).

    Outcomes are laid out in :func:`value_key` order over a common
    denominator and a single ``rng.randrange`` call picks the slot, so a
    given seed replays the same draws on every platform.
    """
    items = d.sorted_items()
    if len(items) == 1:
        return items[0][0]
    den = lcm(*(p.denominator for _, p in items))
    r = rng.randrange(den)
    for v, p in items:
        r -= p.numerator * (den // p.denominator)
        if r < 0:
            return v
    raise AssertionError("weights do not sum to one")
