"""One-step processes: deterministic functions and finite stochastic kernels.

A :class:`Kernel` maps a tuple of wire values to a tuple of wire values.
Deterministic kernels return the tuple directly; stochastic kernels return
a :class:`~mstream.dist.Dist` over output tuples. Both share one interface
and composing two deterministic kernels stays deterministic.
"""

from __future__ import annotations

import itertools
import operator
import threading
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

from .dist import Dist, dist_bind, dist_dirac, dist_map, dist_product, dist_sample
from .errors import DomainError, SignatureError
from .values import value_key


@dataclass(frozen=True)
class Ty:
    """Types of the object language.

    ``kind`` is ``Int``, ``Set``, ``Unit``, ``Prod`` or ``Delay``. The
    optional ``domain`` lists every inhabitant and makes the type
    enumerable; like ``name`` it does not take part in equality.
    """

    kind: str
    args: tuple = ()
    name: str | None = field(default=None, compare=False)
    domain: tuple | None = field(default=None, compare=False)

    def __str__(self):
        if self.name:
            return self.name
        if self.kind == "Prod":
            return "(" + " * ".join(str(a) for a in self.args) + ")"
        if self.kind == "Delay":
            return "@" + str(self.args[0])
        return self.kind

    def __repr__(self):
        return f"Ty({self})"

    def contains(self, v) -> bool:
        k = self.kind
        if k == "Unit":
            return v is None
        if k == "Int":
            ok = isinstance(v, int) and not isinstance(v, bool)
        elif k == "Set":
            ok = isinstance(v, frozenset) and all(isinstance(x, int) for x in v)
        elif k == "Prod":
            return (
                isinstance(v, tuple)
                and len(v) == len(self.args)
                and all(a.contains(x) for a, x in zip(self.args, v))
            )
        else:
            raise TypeError(f"{self} has no runtime values")
        return ok and (self.domain is None or v in self.domain)

    def values(self) -> tuple:
        """Every inhabitant, for exhaustive enumeration."""
        if self.kind == "Unit":
            return (None,)
        if self.domain is not None:
            return self.domain
        if self.kind == "Prod":
            return tuple(itertools.product(*(a.values() for a in self.args)))
        raise DomainError(f"type {self} has no finite domain; declare one to enumerate it")

    def with_domain(self, values, name=None) -> "Ty":
        values = tuple(sorted(set(values), key=value_key))
        return Ty(self.kind, self.args, name=name or self.name, domain=values)


INT = Ty("Int")
SET = Ty("Set")
UNIT = Ty("Unit")


def prod(*items: Ty) -> Ty:
    return Ty("Prod", tuple(items))


def delay(t: Ty) -> Ty:
    return Ty("Delay", (t,))


def finite_int(values, name=None) -> Ty:
    return INT.with_domain(values, name)


Sig = tuple  # tuple[Ty, ...]


class Kernel:
    """Typed one-step process.

    ``body`` maps an input tuple to an output tuple (deterministic) or to a
    ``Dist`` over output tuples (stochastic). A stochastic kernel may carry a
    ``sampler(xs, rng)`` that draws without building the full distribution.
    Exact distributions of stochastic kernels are memoised per input; bodies
    must therefore be pure.
    """

    __slots__ = ("inputs", "outputs", "name", "stochastic", "_body", "_sampler", "_cache", "_lock")

    def __init__(self, inputs: Sequence[Ty], outputs: Sequence[Ty], body: Callable,
                 *, stochastic=False, name="k", sampler=None):
        self.inputs = tuple(inputs)
        self.outputs = tuple(outputs)
        self.name = name
        self.stochastic = stochastic
        self._body = body
        self._sampler = sampler
        self._cache = {}
        self._lock = threading.Lock()

    def __repr__(self):
        ins = ", ".join(map(str, self.inputs))
        outs = ", ".join(map(str, self.outputs))
        kind = "Stoch" if self.stochastic else "Det"
        return f"<{kind} {self.name}: ({ins}) -> ({outs})>"

    def det(self, xs: tuple) -> tuple:
        if self.stochastic:
            raise SignatureError(f"{self.name} is stochastic")
        return self._body(xs)

    def dist(self, xs: tuple) -> Dist:
        if not self.stochastic:
            return dist_dirac(self._body(xs))
        try:
            return self._cache[xs]
        except KeyError:
            pass
        d = self._body(xs)
        with self._lock:
            self._cache[xs] = d
        return d

    def sample(self, xs: tuple, rng) -> tuple:
        if not self.stochastic:
            return self._body(xs)
        if self._sampler is not None:
            return self._sampler(xs, rng)
        return dist_sample(self.dist(xs), rng)

    def check_input(self, xs) -> None:
        if not isinstance(xs, tuple) or len(xs) != len(self.inputs):
            raise SignatureError(f"{self.name} expects {len(self.inputs)} inputs, got {xs!r}")
        for t, x in zip(self.inputs, xs):
            if not t.contains(x):
                raise SignatureError(f"{self.name}: input {x!r} is not of type {t}")


def joined_name(a: str, sep: str, b: str, limit=60) -> str:
    """Name of a composite; long names are elided so building composites stays linear."""
    s = f"({a}{sep}{b})"
    return s if len(s) <= limit else f"({a[:20]}{sep}...)"


def det_kernel(inputs, outputs, fn, name="f") -> Kernel:
    return Kernel(inputs, outputs, fn, name=name)


def stoch_kernel(inputs, outputs, fn, name="p", sampler=None) -> Kernel:
    return Kernel(inputs, outputs, fn, stochastic=True, name=name, sampler=sampler)


def as_stochastic(k: Kernel) -> Kernel:
    """View a deterministic kernel as a point-mass stochastic kernel."""
    if k.stochastic:
        return k
    body = k._body
    return stoch_kernel(k.inputs, k.outputs, lambda xs: dist_dirac(body(xs)), name=k.name)


def kernel_compose(f: Kernel, g: Kernel) -> Kernel:
    """``f`` then ``g``."""
    if f.outputs != g.inputs:
        raise SignatureError(
            f"cannot compose {f.name} -> {g.name}: "
            f"({', '.join(map(str, f.outputs))}) vs ({', '.join(map(str, g.inputs))})"
        )
    name = joined_name(f.name, ";", g.name)
    fb, gb = f._body, g._body
    if not f.stochastic and not g.stochastic:
        return Kernel(f.inputs, g.outputs, lambda xs: gb(fb(xs)), name=name)
    if not f.stochastic:
        return stoch_kernel(f.inputs, g.outputs, lambda xs: g.dist(fb(xs)), name,
                            lambda xs, rng: g.sample(fb(xs), rng))
    if not g.stochastic:
        return stoch_kernel(f.inputs, g.outputs, lambda xs: dist_map(f.dist(xs), gb), name,
                            lambda xs, rng: gb(f.sample(xs, rng)))
    return stoch_kernel(f.inputs, g.outputs, lambda xs: dist_bind(f.dist(xs), g.dist), name,
                        lambda xs, rng: g.sample(f.sample(xs, rng), rng))


def kernel_tensor(f: Kernel, g: Kernel) -> Kernel:
    """Side-by-side: inputs and outputs concatenate; randomness is independent."""
    n = len(f.inputs)
    name = joined_name(f.name, "*", g.name)
    ins, outs = f.inputs + g.inputs, f.outputs + g.outputs
    if not f.stochastic and not g.stochastic:
        fb, gb = f._body, g._body
        return Kernel(ins, outs, lambda xs: fb(xs[:n]) + gb(xs[n:]), name=name)
    return stoch_kernel(
        ins, outs,
        lambda xs: dist_product(f.dist(xs[:n]), g.dist(xs[n:]), operator.add),
        name,
        lambda xs, rng: f.sample(xs[:n], rng) + g.sample(xs[n:], rng),
    )


def rewire(inputs: Sequence[Ty], index_map: Sequence[int], name="wire") -> Kernel:
    """Deterministic kernel whose j-th output is input ``index_map[j]``.

    Repeated indices copy, missing indices discard; every permutation,
    copy and discard in the engine is one of these.
    """
    inputs = tuple(inputs)
    idx = tuple(index_map)
    outputs = tuple(inputs[i] for i in idx)
    if idx == tuple(range(len(inputs))):
        return Kernel(inputs, outputs, lambda xs: xs, name=name)
    return Kernel(inputs, outputs, lambda xs: tuple(xs[i] for i in idx), name=name)


def structural_kernel(kind: str, types: Sequence[Ty], split: int | None = None) -> Kernel:
    """Identity, symmetry, copy or discard on the wires ``types``.

    ``symmetry`` swaps the first ``split`` wires with the rest (default: the
    first wire with the remaining ones).
    """
    types = tuple(types)
    n = len(types)
    if kind == "identity":
        return rewire(types, range(n), "id")
    if kind == "symmetry":
        k = 1 if split is None else split
        return rewire(types, [*range(k, n), *range(k)], "swap")
    if kind == "copy":
        return rewire(types, [*range(n), *range(n)], "copy")
    if kind == "discard":
        return rewire(types, [], "discard")
    raise ValueError(f"unknown structural kernel {kind!r}")


def kernel_apply(k: Kernel, xs: tuple, mode="exact"):
    """Apply ``k`` to a well-typed input tuple.

    ``mode`` is ``"exact"`` (returns the output ``Dist``; deterministic
    kernels give a point mass) or a ``random.Random`` to draw one outcome.
    """
    k.check_input(xs)
    if mode == "exact":
        return k.dist(xs)
    return k.sample(xs, mode)


def enumerate_inputs(types: Sequence[Ty]):
    """All input tuples over the finite domains of ``types``."""
    return list(itertools.product(*(t.values() for t in types)))
