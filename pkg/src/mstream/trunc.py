"""Observational semantics of streams at a finite truncation depth.

A stream truncated to steps ``0..n`` is a controlled stochastic process: for
every input history it yields a distribution over output histories. These
are computed exactly by pushing a distribution over ``(memory, outputs so
far)`` through the unrolled kernels and discarding the final memory.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from fractions import Fraction

from ._rational import Q, q
from .dist import Dist, _Accumulator, dist_map
from .errors import ScheduleError, StochasticKernelError
from .kernel import enumerate_inputs
from .stream import MStream, stream_run
from .values import to_json, value_key

History = tuple  # tuple of per-step wire tuples


@dataclass(frozen=True)
class JointDist:
    """Output-history distributions of an ``n``-step truncation, per input history."""

    n: int
    table: dict = field(repr=False)

    def __getitem__(self, history) -> Dist:
        return self.table[tuple(history)]

    def __len__(self):
        return len(self.table)

    def histories(self):
        return list(self.table)

    def only(self) -> Dist:
        """The distribution of a stream run on a single input history."""
        if len(self.table) != 1:
            raise ValueError(f"{len(self.table)} input histories, expected one")
        return next(iter(self.table.values()))

    def truncate(self, k: int) -> "JointDist":
        """Marginalise away every step after ``k``."""
        if not 0 <= k <= self.n:
            raise ValueError(f"cannot truncate depth {self.n} to {k}")
        out = {}
        for h, d in self.table.items():
            out.setdefault(h[: k + 1], dist_map(d, lambda ys: ys[: k + 1]))
        return JointDist(k, out)


def _as_tuple(x):
    return x if isinstance(x, tuple) else (x,)


def _domain_fn(f: MStream, domains) -> Callable[[int], list]:
    """Normalise the accepted ways of giving per-step input domains.

    ``None`` derives them from the finite domains of the input types;
    a callable maps a step to its domain; a sequence lists the domain of
    each step (the last one repeats).
    """
    if domains is None:
        sched = f.in_sched
        return lambda t: enumerate_inputs(sched.at(t))
    if callable(domains):
        return lambda t: [_as_tuple(x) for x in domains(t)]
    doms = [[_as_tuple(x) for x in d] for d in domains]
    return lambda t: doms[min(t, len(doms) - 1)]


def _advance(node: MStream, state: dict, x: tuple) -> dict:
    k = node.now
    m = len(node.mem_out)
    acc = _Accumulator()
    for (mem, hist), w in state.items():
        for out, p in k.dist(mem + x).items():
            acc.add((out[:m], hist + (out[m:],)), w * p)
    return acc.w


def _observe(state: dict) -> Dist:
    acc = _Accumulator()
    for (_, hist), w in state.items():
        acc.add(hist, w)
    return acc.result()


_START = {((), ()): Fraction(1)}


def _levels(f: MStream, n: int, domain_at):
    """Breadth-first over input prefixes; yields ``(t, [(prefix, state), ...])``."""
    level = [((), _START)]
    node = f
    for t in range(n + 1):
        dom = domain_at(t)
        level = [(p + (x,), _advance(node, s, x)) for p, s in level for x in dom]
        yield t, level
        if t < n:
            node = node.later


def proc_semantics(f: MStream, n: int, domains=None, history=None) -> JointDist:
    """Exact joint output distribution of steps ``0..n`` for every input history.

    Pass ``history`` (a sequence of ``n+1`` input tuples) to evaluate a single
    fixed history instead of enumerating domains.
    """
    if n < 0:
        raise ValueError("depth must be non-negative")
    if history is not None:
        history = tuple(_as_tuple(x) for x in history)
        if len(history) != n + 1:
            raise ValueError(f"history has {len(history)} steps, depth {n} needs {n + 1}")
        domain_at = lambda t: [history[t]]
    else:
        domain_at = _domain_fn(f, domains)
    last = None
    for _, last in _levels(f, n, domain_at):
        pass
    return JointDist(n, {p: _observe(s) for p, s in last})


def step_marginals(f: MStream, n: int, inputs=None) -> list[Dist]:
    """Distribution of each step's output on its own, for steps ``0..n``.

    Cheaper than the joint: only the memory distribution is carried along.
    """
    state = {(): Fraction(1)}
    node = f
    res = []
    for t in range(n + 1):
        x = () if inputs is None else _as_tuple(inputs[t])
        k = node.now
        m = len(node.mem_out)
        mem_acc, out_acc = _Accumulator(), _Accumulator()
        for mem, w in state.items():
            for out, p in k.dist(mem + x).items():
                mem_acc.add(out[:m], w * p)
                out_acc.add(out[m:], w * p)
        res.append(out_acc.result())
        state = mem_acc.w
        if t < n:
            node = node.later
    return res


# ---------------------------------------------------------------------------
# causality


@dataclass(frozen=True)
class CausalityReport:
    ok: bool
    depth: int
    step: int | None = None
    history: tuple | None = None
    expected: Dist | None = None
    got: Dist | None = None

    def __bool__(self):
        return self.ok

    def to_dict(self):
        d = {"causal": self.ok, "depth": self.depth}
        if not self.ok:
            d.update(step=self.step, history=to_json(self.history),
                     expected=dist_to_json(self.expected), got=dist_to_json(self.got))
        return d


def check_causality(proc, n: int, domains=None) -> CausalityReport:
    """Check the marginalisation property up to depth ``n``.

    ``proc`` is an :class:`MStream` or any callable mapping an input history
    (tuple of ``t+1`` input tuples) to a ``Dist`` over output histories of
    the same length. For every history ``h`` and ``t < len(h) - 1``,
    dropping the outputs after step ``t`` from ``proc(h)`` must give
    ``proc(h[:t+1])``; this also forces step-``t`` outputs to ignore inputs
    after ``t``.
    """
    if isinstance(proc, MStream):
        domain_at = _domain_fn(proc, domains)
        parents = {(): None}
        for t, level in _levels(proc, n, domain_at):
            joints = {p: _observe(s) for p, s in level}
            for p, d in joints.items():
                parent = parents.get(p[:-1])
                if parent is not None:
                    got = dist_map(d, lambda ys: ys[:t])
                    if got != parent:
                        return CausalityReport(False, n, t - 1, p, parent, got)
            parents = joints
        return CausalityReport(True, n)

    if domains is None:
        raise ValueError("a raw process needs explicit input domains")
    if callable(domains):
        doms = [[_as_tuple(x) for x in domains(t)] for t in range(n + 1)]
    else:
        doms = [[_as_tuple(x) for x in domains[min(t, len(domains) - 1)]] for t in range(n + 1)]
    cache = {}

    def joint(h):
        if h not in cache:
            cache[h] = proc(h)
        return cache[h]

    for h in itertools.product(*doms):
        full = joint(h)
        for t in range(n):
            got = dist_map(full, lambda ys: ys[: t + 1])
            want = joint(h[: t + 1])
            if got != want:
                return CausalityReport(False, n, t, h, want, got)
    return CausalityReport(True, n)


# ---------------------------------------------------------------------------
# observational equivalence


def dist_to_json(d: Dist | None):
    if d is None:
        return None
    return [{"value": to_json(v), "p": f"{p.numerator}/{p.denominator}"} for v, p in d.sorted_items()]


@dataclass(frozen=True)
class EquivReport:
    equal: bool
    depth: int
    step: int | None = None
    history: tuple | None = None
    left: Dist | None = None
    right: Dist | None = None

    def __bool__(self):
        return self.equal

    @property
    def verdict(self) -> str:
        return "equal" if self.equal else "differ"

    def to_dict(self):
        d = {"verdict": self.verdict, "depth": self.depth}
        if not self.equal:
            d.update(step=self.step, history=to_json(self.history),
                     left=dist_to_json(self.left), right=dist_to_json(self.right))
        return d


def _check_boundaries(f: MStream, g: MStream):
    if f.in_sched != g.in_sched or f.out_sched != g.out_sched:
        raise ScheduleError(
            f"streams have different boundaries: {f.in_sched} -> {f.out_sched} "
            f"vs {g.in_sched} -> {g.out_sched}"
        )


def _differ_report(f, g, n, t, prefix):
    a = proc_semantics(f, t, history=prefix).only()
    b = proc_semantics(g, t, history=prefix).only()
    return EquivReport(False, n, t, prefix, a, b)


def _obs_equiv_enumerate(f, g, n, domain_at):
    for (t, lf), (_, lg) in zip(_levels(f, n, domain_at), _levels(g, n, domain_at)):
        for (p, sf), (_, sg) in zip(lf, lg):
            if _observe(sf) != _observe(sg):
                return _differ_report(f, g, n, t, p)
    return EquivReport(True, n)


def _split_rows(node: MStream, cache: dict, xs: tuple):
    """Outcomes of ``node.now`` on ``xs`` as ``(memory, output, weight)`` triples."""
    key = (node.now, xs)
    rows = cache.get(key)
    if rows is None:
        m = len(node.mem_out)
        rows = cache[key] = [(o[:m], o[m:], q(p)) for o, p in node.now.dist(xs).items()]
    return rows


def _step(nodes, vec, x, cache):
    """Push a sparse vector over ``(side, memory)`` through one step on input ``x``.

    Returns one vector per emitted output tuple; the total weight of each is
    the probability of emitting that output, jointly with the history so far.
    """
    out = {}
    for (side, mem), w in vec.items():
        for mem2, y, p in _split_rows(nodes[side], cache, mem + x):
            v = out.get(y)
            if v is None:
                v = out[y] = {}
            key = (side, mem2)
            v[key] = v.get(key, 0) + w * p
    return out


def _balance(vec):
    return sum(w if side == 0 else -w for (side, _), w in vec.items())


class _Basis:
    """Incremental row-echelon basis of sparse rational vectors."""

    def __init__(self):
        self.rows = []  # (pivot key, vector with 1 at the pivot)

    def reduce(self, vec) -> dict:
        v = dict(vec)
        for key, row in self.rows:
            c = v.get(key)
            if c:
                for k, w in row.items():
                    r = v.get(k, 0) - c * w
                    if r:
                        v[k] = r
                    else:
                        v.pop(k, None)
        return v

    def insert(self, vec) -> bool:
        v = self.reduce(vec)
        if not v:
            return False
        key = next(iter(v))
        c = v[key]
        v = {k: w / c for k, w in v.items()}
        for i, (k2, row) in enumerate(self.rows):
            d = row.get(key)
            if d:
                new = dict(row)
                for k, w in v.items():
                    r = new.get(k, 0) - d * w
                    if r:
                        new[k] = r
                    else:
                        new.pop(k, None)
                self.rows[i] = (k2, new)
        self.rows.append((key, v))
        return True


def _obs_equiv_linear(f, g, n, domain_at):
    # Both streams are run side by side on a vector over (side, memory).
    # The weight vectors reachable at a depth span a space whose dimension is
    # bounded by the number of memory states, so keeping one representative
    # per basis direction decides equality of every joint at that depth.
    one = Q(1)
    frontier = [((), {(0, ()): one, (1, ()): one})]
    nodes = (f, g)
    cache = {}
    for t in range(n + 1):
        basis = _Basis()
        nxt = []
        for prefix, vec in frontier:
            for x in domain_at(t):
                for _, v in _step(nodes, vec, x, cache).items():
                    if _balance(v) != 0:
                        return _differ_report(f, g, n, t, prefix + (x,))
                    if t < n and basis.insert(v):
                        nxt.append((prefix + (x,), v))
        frontier = nxt
        if t < n:
            nodes = (nodes[0].later, nodes[1].later)
    return EquivReport(True, n)


def obs_equiv(f: MStream, g: MStream, n: int, domains=None, method="linear") -> EquivReport:
    """Decide whether ``f`` and ``g`` agree on every truncation up to depth ``n``.

    Input domains default to the finite domains declared on the input
    types; a ``DomainError`` is raised if some type has none. ``method``
    picks the decision procedure: ``"linear"`` keeps a basis of reachable
    memory-weight vectors per step (polynomial in the number of memory
    states), ``"enumerate"`` compares full joints for every input history.
    Both are exact and report the earliest differing step.
    """
    _check_boundaries(f, g)
    domain_at = _domain_fn(f, domains)
    if method == "linear":
        return _obs_equiv_linear(f, g, n, domain_at)
    if method == "enumerate":
        return _obs_equiv_enumerate(f, g, n, domain_at)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# cartesian view


def causal_eval(f: MStream, inputs: Iterable) -> list[tuple]:
    """Run a deterministic stream on an input prefix.

    The output at step ``t`` depends on inputs ``0..t`` only.
    """
    inputs = [_as_tuple(x) for x in inputs]
    try:
        return stream_run(f, inputs if f.in_sched.wires else None, len(inputs), rng=None)
    except StochasticKernelError as e:
        raise StochasticKernelError(f"causal_eval needs a deterministic stream: {e}") from None


def sorted_support(d: Dist):
    return sorted(d, key=value_key)
