"""Monoidal streams: a first action threading a memory channel, and the rest.

An :class:`MStream` is coinductive. ``now`` is a kernel from
``mem_in ++ inputs_0`` to ``mem_out ++ outputs_0``; ``later`` is the stream
for the remaining steps and takes ``mem_out`` as its incoming memory. All
wire lists are flat: tensoring concatenates, the monoidal unit is the empty
list, and a delayed wire carries the unit value ``None`` at step 0.
"""

from __future__ import annotations

import threading
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ScheduleError, SignatureError, StochasticKernelError
from .kernel import UNIT, Kernel, Ty, joined_name, kernel_compose, kernel_tensor, rewire

# ---------------------------------------------------------------------------
# type schedules


@dataclass(frozen=True)
class WireSchedule:
    """Types of one wire over time: a finite prefix, then ``steady`` forever."""

    prefix: tuple
    steady: Ty

    @staticmethod
    def make(prefix, steady) -> "WireSchedule":
        prefix = tuple(prefix)
        while prefix and prefix[-1] == steady:
            prefix = prefix[:-1]
        return WireSchedule(prefix, steady)

    def at(self, t: int) -> Ty:
        return self.prefix[t] if t < len(self.prefix) else self.steady

    def tail(self) -> "WireSchedule":
        return WireSchedule(self.prefix[1:], self.steady)

    def delayed(self) -> "WireSchedule":
        return WireSchedule.make((UNIT,) + self.prefix, self.steady)

    def __str__(self):
        if not self.prefix:
            return str(self.steady)
        return "[" + ", ".join(map(str, self.prefix)) + f", {self.steady}...]"


class TypeSchedule:
    """Per-step wire types of a stream boundary.

    Built from :meth:`constant`, :meth:`cons` and :meth:`delayed` and
    concatenated with ``+``. Every schedule is eventually constant, so
    equality is decidable.
    """

    __slots__ = ("wires",)

    def __init__(self, wires: Sequence[WireSchedule] = ()):
        self.wires = tuple(wires)

    @classmethod
    def constant(cls, types: Sequence[Ty]) -> "TypeSchedule":
        return cls(WireSchedule((), t) for t in types)

    @classmethod
    def cons(cls, head: Sequence[Ty], tail: "TypeSchedule") -> "TypeSchedule":
        head = tuple(head)
        if len(head) != len(tail):
            raise ScheduleError(f"head has {len(head)} wires, tail has {len(tail)}")
        return cls(WireSchedule.make((h,) + w.prefix, w.steady) for h, w in zip(head, tail.wires))

    def delayed(self) -> "TypeSchedule":
        return TypeSchedule(w.delayed() for w in self.wires)

    def at(self, t: int) -> tuple:
        return tuple(w.at(t) for w in self.wires)

    def tail(self) -> "TypeSchedule":
        return TypeSchedule(w.tail() for w in self.wires)

    def horizon(self) -> int:
        """First step from which the schedule is constant."""
        return max((len(w.prefix) for w in self.wires), default=0)

    def select(self, indices: Sequence[int]) -> "TypeSchedule":
        return TypeSchedule(self.wires[i] for i in indices)

    def __getitem__(self, s: slice) -> "TypeSchedule":
        return TypeSchedule(self.wires[s])

    def __add__(self, other: "TypeSchedule") -> "TypeSchedule":
        return TypeSchedule(self.wires + other.wires)

    def __len__(self):
        return len(self.wires)

    def __eq__(self, other):
        return isinstance(other, TypeSchedule) and self.wires == other.wires

    def __hash__(self):
        return hash(self.wires)

    def __repr__(self):
        return "TypeSchedule(" + ", ".join(map(str, self.wires)) + ")"


def as_schedule(t) -> TypeSchedule:
    """Accept a schedule, a single ``Ty`` or a list of ``Ty`` (constant)."""
    if isinstance(t, TypeSchedule):
        return t
    if isinstance(t, Ty):
        return TypeSchedule.constant([t])
    return TypeSchedule.constant(list(t))


# ---------------------------------------------------------------------------
# the stream type


class _Lazy:
    """Single-initialisation cell, safe to force from several threads."""

    __slots__ = ("_thunk", "_value", "_lock")

    _EMPTY = object()

    def __init__(self, thunk):
        self._thunk = thunk
        self._value = self._EMPTY
        self._lock = threading.Lock()

    def force(self):
        if self._value is self._EMPTY:
            with self._lock:
                if self._value is self._EMPTY:
                    self._value = self._thunk()
                    self._thunk = None
        return self._value

    @property
    def forced(self) -> bool:
        return self._value is not self._EMPTY


class ForceCounter:
    """Counts ``later`` forcings while active; used to check productivity."""

    _local = threading.local()

    def __init__(self):
        self.count = 0
        self.max_step = -1

    def __enter__(self):
        stack = getattr(self._local, "stack", None)
        if stack is None:
            stack = self._local.stack = []
        stack.append(self)
        return self

    def __exit__(self, *exc):
        self._local.stack.remove(self)

    @classmethod
    def record(cls, step):
        for c in getattr(cls._local, "stack", ()):
            c.count += 1
            c.max_step = max(c.max_step, step)


class MStream:
    __slots__ = ("mem_in", "mem_out", "now", "in_sched", "out_sched", "step", "name", "_later")

    def __init__(self, now: Kernel, later: Callable[[], "MStream"], in_sched: TypeSchedule,
                 out_sched: TypeSchedule, mem_in=(), mem_out=(), *, step=0, name="stream"):
        self.mem_in = tuple(mem_in)
        self.mem_out = tuple(mem_out)
        self.now = now
        self.in_sched = in_sched
        self.out_sched = out_sched
        self.step = step
        self.name = name
        if now.inputs != self.mem_in + in_sched.at(0):
            raise SignatureError(
                f"{name}: first action takes ({', '.join(map(str, now.inputs))}), "
                f"expected memory ({', '.join(map(str, self.mem_in))}) "
                f"and inputs ({', '.join(map(str, in_sched.at(0)))})"
            )
        if now.outputs != self.mem_out + out_sched.at(0):
            raise SignatureError(
                f"{name}: first action yields ({', '.join(map(str, now.outputs))}), "
                f"expected memory ({', '.join(map(str, self.mem_out))}) "
                f"and outputs ({', '.join(map(str, out_sched.at(0)))})"
            )
        self._later = _Lazy(later)

    @property
    def later(self) -> "MStream":
        was = self._later.forced
        nxt = self._later.force()
        if not was:
            ForceCounter.record(self.step + 1)
            if nxt.mem_in != self.mem_out:
                raise SignatureError(f"{self.name}: memory of step {self.step + 1} does not match")
        return nxt

    @property
    def stochastic_now(self) -> bool:
        return self.now.stochastic

    def __repr__(self):
        return f"<MStream {self.name} step={self.step} {self.in_sched} -> {self.out_sched}>"

    # operator sugar
    def __rshift__(self, other):
        return stream_seq(self, other)

    def __matmul__(self, other):
        return stream_par(self, other)


def _memoryless(kernel_at: Callable[[int], Kernel], in_sched, out_sched, name, step=0) -> MStream:
    """Memoryless stream applying ``kernel_at(step)`` at each step.

    Once both schedules are constant and ``kernel_at`` returns the same
    object, the stream becomes its own ``later``.
    """
    k = kernel_at(step)
    if k.inputs != in_sched.at(0) or k.outputs != out_sched.at(0):
        raise SignatureError(
            f"{name}: kernel at step {step} has signature "
            f"({', '.join(map(str, k.inputs))}) -> ({', '.join(map(str, k.outputs))}), "
            f"schedule needs ({', '.join(map(str, in_sched.at(0)))}) -> "
            f"({', '.join(map(str, out_sched.at(0)))})"
        )
    node = None

    def later():
        tin, tout = in_sched.tail(), out_sched.tail()
        if tin == in_sched and tout == out_sched and kernel_at(step + 1) is k:
            return _self_loop(node)
        return _memoryless(kernel_at, tin, tout, name, step + 1)

    node = MStream(k, later, in_sched, out_sched, step=step, name=name)
    return node


def _self_loop(node: MStream) -> MStream:
    return node


# ---------------------------------------------------------------------------
# constructors


def _cached(make):
    """Memoise a kernel factory on the step signature, so steady steps share one kernel."""
    cache = {}

    def kernel_for(sig):
        k = cache.get(sig)
        if k is None:
            k = cache[sig] = make(sig)
        return k

    return kernel_for


def stream_identity(sched) -> MStream:
    sched = as_schedule(sched)
    n = len(sched)
    kernel_for = _cached(lambda sig: rewire(sig, range(n), "id"))
    return _memoryless(lambda t: kernel_for(sched.at(t)), sched, sched, "id")


def stream_lift_constant(k: Kernel) -> MStream:
    """Memoryless stream applying ``k`` at every step."""
    return _memoryless(lambda t: k, TypeSchedule.constant(k.inputs),
                       TypeSchedule.constant(k.outputs), k.name)


def stream_lift_sequence(family, in_sched=None, out_sched=None, name="seq") -> MStream:
    """Memoryless stream applying ``family[t]`` at step ``t``.

    ``family`` is either a non-empty sequence of kernels, whose last entry
    repeats forever, or a callable from step to kernel. Schedules default
    to the signatures of the kernels at steps 0 and 1.
    """
    if callable(family):
        kernel_at = family
    else:
        ks = list(family)
        if not ks:
            raise ValueError("empty kernel family")
        kernel_at = lambda t: ks[min(t, len(ks) - 1)]
    if in_sched is None or out_sched is None:
        k0, k1 = kernel_at(0), kernel_at(1)
        if in_sched is None:
            in_sched = TypeSchedule.cons(k0.inputs, TypeSchedule.constant(k1.inputs))
        if out_sched is None:
            out_sched = TypeSchedule.cons(k0.outputs, TypeSchedule.constant(k1.outputs))
    return _memoryless(kernel_at, as_schedule(in_sched), as_schedule(out_sched), name)


def stream_wiring(in_sched, index_map: Sequence[int], name="wire") -> MStream:
    """Memoryless rearrangement: output wire ``j`` is input wire ``index_map[j]``."""
    in_sched = as_schedule(in_sched)
    idx = tuple(index_map)
    kernel_for = _cached(lambda sig: rewire(sig, idx, name))
    return _memoryless(lambda t: kernel_for(in_sched.at(t)),
                       in_sched, in_sched.select(idx), name)


def stream_symmetry(left, right) -> MStream:
    """Swap two blocks of wires: ``left + right -> right + left``."""
    left, right = as_schedule(left), as_schedule(right)
    n, m = len(left), len(right)
    return stream_wiring(left + right, [*range(n, n + m), *range(n)], "swap")


def stream_copy(sched) -> MStream:
    sched = as_schedule(sched)
    n = len(sched)
    return stream_wiring(sched, [*range(n), *range(n)], "copy")


def stream_discard(sched) -> MStream:
    return stream_wiring(as_schedule(sched), [], "discard")


# ---------------------------------------------------------------------------
# composition


def _seq_now(f: MStream, g: MStream) -> Kernel:
    a, b = len(f.mem_in), len(g.mem_in)
    x = len(f.in_sched)
    mf = len(f.mem_out)
    y = len(g.in_sched)
    ins = f.mem_in + g.mem_in + f.in_sched.at(0)
    # A,B,X -> A,X,B ; now(f) x id_B ; Mf,Y,B -> Mf,B,Y ; id_Mf x now(g)
    k = rewire(ins, [*range(a), *range(a + b, a + b + x), *range(a, a + b)], "σ")
    k = kernel_compose(k, kernel_tensor(f.now, rewire(g.mem_in, range(b), "id")))
    mid = f.now.outputs + g.mem_in
    k = kernel_compose(k, rewire(mid, [*range(mf), *range(mf + y, mf + y + b), *range(mf, mf + y)], "σ"))
    return kernel_compose(k, kernel_tensor(rewire(f.mem_out, range(mf), "id"), g.now))


def _seq(f: MStream, g: MStream) -> MStream:
    node = None

    def later():
        fl, gl = f.later, g.later
        if fl is f and gl is g:
            return node
        return _seq(fl, gl)

    node = MStream(
        _seq_now(f, g), later,
        f.in_sched, g.out_sched,
        f.mem_in + g.mem_in, f.mem_out + g.mem_out,
        step=f.step, name=joined_name(f.name, ";", g.name),
    )
    return node


def stream_seq(f: MStream, g: MStream) -> MStream:
    """Sequential composition; memories pair up."""
    if f.out_sched != g.in_sched:
        raise ScheduleError(f"cannot compose {f.name} then {g.name}: {f.out_sched} vs {g.in_sched}")
    return _seq(f, g)


def _par_now(f: MStream, g: MStream) -> Kernel:
    a, b = len(f.mem_in), len(g.mem_in)
    x, x2 = len(f.in_sched), len(g.in_sched)
    mf, mg = len(f.mem_out), len(g.mem_out)
    y, y2 = len(f.out_sched), len(g.out_sched)
    ins = f.mem_in + g.mem_in + f.in_sched.at(0) + g.in_sched.at(0)
    # A,B,X,X' -> A,X,B,X' ; now(f) x now(g) ; Mf,Y,Mg,Y' -> Mf,Mg,Y,Y'
    k = rewire(ins, [*range(a), *range(a + b, a + b + x), *range(a, a + b),
                     *range(a + b + x, a + b + x + x2)], "σ")
    k = kernel_compose(k, kernel_tensor(f.now, g.now))
    return kernel_compose(k, rewire(k.outputs, [*range(mf), *range(mf + y, mf + y + mg),
                                                *range(mf, mf + y), *range(mf + y + mg, mf + y + mg + y2)], "σ"))


def stream_par(f: MStream, g: MStream) -> MStream:
    """Parallel composition; inputs, outputs and memories concatenate."""
    node = None

    def later():
        fl, gl = f.later, g.later
        if fl is f and gl is g:
            return node
        return stream_par(fl, gl)

    node = MStream(
        _par_now(f, g), later,
        f.in_sched + g.in_sched, f.out_sched + g.out_sched,
        f.mem_in + g.mem_in, f.mem_out + g.mem_out,
        step=f.step, name=joined_name(f.name, "*", g.name),
    )
    return node


def stream_delay(f: MStream) -> MStream:
    """Shift by one step: unit action at step 0, then ``f``."""
    if f.mem_in:
        raise SignatureError("only streams without incoming memory can be delayed")
    in_sched, out_sched = f.in_sched.delayed(), f.out_sched.delayed()
    n_out = len(out_sched)
    unit = (None,) * n_out
    now = Kernel(in_sched.at(0), out_sched.at(0), lambda xs: unit, name="id_I")
    return MStream(now, lambda: f, in_sched, out_sched, step=f.step, name=f"∂{f.name[:40]}")


def _fbk_later(g: MStream, width: int, name: str) -> MStream:
    # From step 1 on, the fed-back wires sit in memory right after g's own
    # memory, which is exactly where g's first action expects its ∂S inputs.
    s_types = g.now.outputs[len(g.mem_out):len(g.mem_out) + width]
    node = None

    def later():
        gl = g.later
        return node if gl is g else _fbk_later(gl, width, name)

    node = MStream(
        g.now, later,
        g.in_sched[width:], g.out_sched[width:],
        g.mem_in + g.in_sched.at(0)[:width], g.mem_out + s_types,
        step=g.step, name=name,
    )
    return node


def stream_feedback(f: MStream, width: int) -> MStream:
    """Feed the first ``width`` outputs back, one step later, as the first inputs.

    ``f`` must map ``∂S + X`` to ``S + Y`` with ``S`` of ``width`` wires.
    At step 0 the fed-back inputs are the unit value; there is no initial
    state parameter (use ``fby`` for that).
    """
    if width == 0:
        return f
    if width > len(f.in_sched) or width > len(f.out_sched):
        raise ScheduleError(f"feedback width {width} exceeds the wires of {f.name}")
    s_in, s_out = f.in_sched[:width], f.out_sched[:width]
    if s_in != s_out.delayed():
        raise ScheduleError(
            f"feedback needs inputs {s_out.delayed()} to be the delay of outputs {s_out}, got {s_in}"
        )
    n = len(f.mem_in)
    x_types = f.in_sched.at(0)[width:]
    ins = f.mem_in + x_types
    units = (None,) * width
    insert = Kernel(ins, f.now.inputs, lambda xs: xs[:n] + units + xs[n:], name="unitS")
    name = f"fbk({f.name[:40]})"
    s_types = f.now.outputs[len(f.mem_out):len(f.mem_out) + width]
    return MStream(
        kernel_compose(insert, f.now),
        lambda: _fbk_later(f.later, width, name),
        f.in_sched[width:], f.out_sched[width:],
        f.mem_in, f.mem_out + s_types,
        step=f.step, name=name,
    )


def stream_fby(t: Ty) -> MStream:
    """``t + ∂t -> t``: the first input at step 0, the second afterwards."""
    first = Kernel((t, UNIT), (t,), lambda xs: (xs[0],), name="fby0")
    rest = Kernel((t, t), (t,), lambda xs: (xs[1],), name="fby")
    in_sched = TypeSchedule.constant([t]) + TypeSchedule.constant([t]).delayed()
    return stream_lift_sequence([first, rest], in_sched, TypeSchedule.constant([t]), name="fby")


def stream_wait(sched) -> MStream:
    """One-step shift ``X -> ∂X``, built as the feedback of a symmetry."""
    sched = as_schedule(sched)
    sigma = stream_symmetry(sched.delayed(), sched)
    return stream_feedback(sigma, len(sched))


# ---------------------------------------------------------------------------
# running


class Stage(NamedTuple):
    kernel: Kernel
    mem_in: tuple
    mem_out: tuple


def stream_unroll(f: MStream, n: int) -> list[Stage]:
    """The kernels of steps ``0..n`` with their memory signatures."""
    if n < 0:
        raise ValueError("n must be non-negative")
    out = []
    node = f
    for t in range(n + 1):
        out.append(Stage(node.now, node.mem_in, node.mem_out))
        if t < n:
            node = node.later
    return out


def _inputs_at(inputs, t, f_node):
    if inputs is None:
        if len(f_node.in_sched):
            raise SignatureError(f"{f_node.name} needs inputs")
        return ()
    x = inputs[t]
    return x if isinstance(x, tuple) else (x,)


def stream_run(f: MStream, inputs=None, n: int | None = None, mode="sample", rng=None, check=True):
    """Execute ``n`` steps (``0..n-1``).

    In sample mode one concrete memory value is threaded through and every
    stochastic kernel draws from ``rng``; the result is the list of output
    tuples. ``mode="exact"`` returns the joint distribution of the output
    history instead (see :func:`mstream.trunc.proc_semantics`).
    ``inputs`` is a sequence of per-step input tuples, or ``None`` for a
    stream without inputs.
    """
    if n is None:
        if inputs is None:
            raise ValueError("give n or inputs")
        n = len(inputs)
    if mode == "exact":
        from .trunc import proc_semantics

        history = tuple(_inputs_at(inputs, t, f) for t in range(n))
        return proc_semantics(f, n - 1, history=history)
    if mode != "sample":
        raise ValueError(f"unknown mode {mode!r}")
    out = []
    node = f
    mem = ()
    m = 0
    for t in range(n):
        x = _inputs_at(inputs, t, node)
        if check:
            types = node.in_sched.at(0)
            if len(x) != len(types) or not all(ty.contains(v) for ty, v in zip(types, x)):
                raise SignatureError(f"step {t}: input {x!r} does not match {types}")
        k = node.now
        if k.stochastic:
            if rng is None:
                raise StochasticKernelError(f"{f.name} is stochastic; pass rng")
            res = k.sample(mem + x, rng)
        else:
            res = k.det(mem + x)
        m = len(node.mem_out)
        mem, y = res[:m], res[m:]
        out.append(y)
        if t < n - 1:
            node = node.later
    return out
