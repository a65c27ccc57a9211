"""Builtin generators of the stream language.

Each builtin is a kernel on wire values. ``discard`` is the only
polymorphic one; it is resolved against its argument type by the checker.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..dist import dist_uniform
from ..errors import TypeCheckError
from ..kernel import INT, SET, UNIT, Kernel, Ty, det_kernel, stoch_kernel


@dataclass(frozen=True)
class Builtin:
    name: str
    inputs: tuple | None  # None: accepts any argument type
    output: Ty
    stochastic: bool
    make: Callable[[tuple], Kernel]  # wire input types -> kernel
    doc: str = ""

    def kernel(self, wire_types) -> Kernel:
        return self.make(tuple(wire_types))


def _det(name, inputs, output, fn, doc):
    k = det_kernel(inputs, (output,), lambda xs: (fn(*xs),), name)
    return Builtin(name, inputs, output, False, lambda _: k, doc)


def _stoch(name, inputs, output, fn, doc):
    k = stoch_kernel(inputs, (output,), lambda xs: _wrap(fn(*xs)), name)
    return Builtin(name, inputs, output, True, lambda _: k, doc)


def _wrap(d):
    from ..dist import dist_map

    return dist_map(d, lambda v: (v,))


def _range(lo, hi):
    if lo > hi:
        raise ValueError(f"empty support: range {lo}..{hi}")
    return dist_uniform(list(range(lo, hi + 1)))


def _move(n, urn):
    return urn - {n} if n in urn else urn | {n}


BUILTINS = {
    b.name: b
    for b in [
        _det("+", (INT, INT), INT, lambda a, b: a + b, "integer addition"),
        _det("-", (INT, INT), INT, lambda a, b: a - b, "integer subtraction"),
        _det("*", (INT, INT), INT, lambda a, b: a * b, "integer multiplication"),
        _det("move", (INT, SET), SET, _move, "toggle ball n: remove it if present, else add it"),
        _det("size", (SET,), INT, len, "number of elements of a set"),
        _stoch("unif", (INT, INT), INT, lambda a, b: dist_uniform([a, b]),
               "uniform over the two values a and b"),
        _stoch("unifrange", (INT, INT), INT, _range, "uniform over the inclusive range lo..hi"),
        _stoch("uniform", (INT,), INT, lambda k: _range(1, k), "uniform over 1..k"),
        Builtin("discard", None, UNIT, False,
                lambda types: det_kernel(types, (), lambda xs: (), "discard"),
                "erase a value of any type"),
    ]
}


def builtin_lookup(name: str, pos=None) -> Builtin:
    try:
        return BUILTINS[name]
    except KeyError:
        raise TypeCheckError("generator", f"unknown generator {name!r}", pos) from None
