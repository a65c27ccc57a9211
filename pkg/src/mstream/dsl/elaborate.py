"""Elaboration of typed terms into streams.

A typed node with free variables ``x1: A1, ..., xn: An`` and type ``B``
becomes a stream from the wires of ``A1 ... An`` to the wires of ``B``.
Every variable occupies one wire per non-unit leaf of its type; routing
between layouts (reordering, copying, discarding) is a single wiring stream.
"""

from __future__ import annotations

from functools import reduce

from ..errors import TypeCheckError
from ..kernel import UNIT, Ty, det_kernel
from ..stream import (
    MStream, TypeSchedule, WireSchedule, stream_copy, stream_delay, stream_discard,
    stream_feedback, stream_fby, stream_identity, stream_lift_constant, stream_par, stream_seq,
    stream_wait, stream_wiring,
)
from .typecheck import Typed, TypedProgram, delay_n, depth


def wires(ty: Ty) -> list[WireSchedule]:
    """Wire schedules of a normal-form type: one per non-unit leaf."""
    if ty.kind == "Unit":
        return []
    if ty.kind == "Prod":
        return [w for a in ty.args for w in wires(a)]
    k = 0
    while ty.kind == "Delay":
        ty, k = ty.args[0], k + 1
    return [WireSchedule.make((UNIT,) * k, ty)]


def schedule(ty: Ty) -> TypeSchedule:
    return TypeSchedule(wires(ty))


def env_schedule(env) -> TypeSchedule:
    return TypeSchedule([w for _, t in env for w in wires(t)])


def route(src, dst) -> MStream:
    """Wiring from the layout ``src`` to the layout ``dst`` (lists of ``(name, type)``)."""
    offsets, at = {}, 0
    for n, t in src:
        k = len(wires(t))
        offsets[n] = (at, k, t)
        at += k
    idx = []
    for n, t in dst:
        start, k, t0 = offsets[n]
        if t0 != t:
            raise TypeCheckError("type", f"internal: {n} routed at {t0} and {t}")
        idx.extend(range(start, start + k))
    return stream_wiring(env_schedule(src), idx, "route")


def par_all(streams, empty: TypeSchedule = TypeSchedule()) -> MStream:
    if not streams:
        return stream_identity(empty)
    return reduce(stream_par, streams)


def fby_wire(w: WireSchedule) -> MStream:
    """``fby`` on one wire, delayed as often as the wire itself."""
    s = stream_fby(w.steady)
    for _ in w.prefix:
        s = stream_delay(s)
    return s


def constant(value, ty: Ty, name) -> MStream:
    return stream_lift_constant(det_kernel((), (ty,), lambda xs: (value,), name))


class Elaborator:
    def __init__(self, typed: TypedProgram):
        self.typed = typed
        self._defs: dict[str, MStream] = {}

    # -- definitions

    def def_body(self, name: str) -> MStream:
        """The stream of a definition, reading the inputs it uses in declaration order."""
        if name not in self._defs:
            info = self.typed.defs[name]
            inputs = dict(self.typed.inputs)
            layout = [(n, inputs[n]) for n in info.inputs]
            self._defs[name] = stream_seq(route(layout, info.typed.env), self.elab(info.typed))
        return self._defs[name]

    def stream(self, name: str) -> MStream:
        """Public stream of a definition: it takes every program input."""
        info = self.typed.defs[name]
        inputs = dict(self.typed.inputs)
        layout = [(n, inputs[n]) for n in info.inputs]
        return stream_seq(route(list(self.typed.inputs), layout), self.def_body(name))

    # -- terms

    def elab(self, node: Typed) -> MStream:
        s = self.elab_direct(node)
        for _ in range(node.delay):
            s = stream_delay(s)
        return s

    def fan(self, env, kids) -> MStream:
        """Route the node's variables to each child and run the children side by side."""
        dst = [v for k in kids for v in k.env]
        return stream_seq(route(env, dst), par_all([self.elab(k) for k in kids]))

    def elab_direct(self, node: Typed) -> MStream:
        env = list(node.inner_env)
        ty = node.inner_ty
        kind = node.kind
        t = node.term
        if kind == "var":
            return stream_identity(env_schedule(env))
        if kind == "def":
            return self.def_body(t.name)
        if kind == "lit":
            return constant(t.value, ty, str(t.value))
        if kind == "set":
            return constant(frozenset(t.elems), ty, "set")
        if kind == "gen":
            pre = self.fan(env, node.kids)
            b = node.info
            if b.inputs is None:
                return stream_seq(pre, stream_discard(pre.out_sched))
            s = stream_lift_constant(b.kernel(b.inputs))
            for _ in range(int(depth(ty)) if ty.kind == "Delay" else 0):
                s = stream_delay(s)
            return stream_seq(pre, s)
        if kind == "pair":
            return self.fan(env, node.kids)
        if kind == "fby":
            pre = self.fan(env, node.kids)
            ws = wires(ty)
            n = len(ws)
            interleave = [j for i in range(n) for j in (i, n + i)]
            body = stream_seq(stream_wiring(pre.out_sched, interleave, "zip"),
                              par_all([fby_wire(w) for w in ws]))
            return stream_seq(pre, body)
        if kind == "wait":
            (body,) = node.kids
            return stream_seq(self.elab(body), stream_wait(schedule(body.ty)))
        if kind == "copy":
            (body,) = node.kids
            return stream_seq(self.elab(body), stream_copy(schedule(body.ty)))
        if kind == "split":
            m, body = node.kids
            binders = t.binders
            bound = [(binders[0], m.ty)] if len(binders) == 1 else list(zip(binders, m.ty.args))
            types = dict(env)
            rest = [(n, types[n]) for n, _ in body.env if n not in binders]
            first = stream_seq(route(env, list(m.env) + rest),
                               stream_par(self.elab(m), stream_identity(env_schedule(rest))))
            return stream_seq(first, stream_seq(route(bound + rest, body.env), self.elab(body)))
        if kind == "fbk":
            (body,) = node.kids
            state = node.info
            layout = [(t.binder, delay_n(state, 1))] + env
            inner = stream_seq(route(layout, body.env), self.elab(body))
            return stream_feedback(inner, len(wires(state)))
        raise ValueError(f"unknown node kind {kind!r}")


def elaborate(typed: TypedProgram) -> dict[str, MStream]:
    """Streams of every definition of a typed program, by name."""
    e = Elaborator(typed)
    return {name: e.stream(name) for name in typed.defs}
