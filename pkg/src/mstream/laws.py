"""Randomised checks of the feedback axioms and the category laws.

Every instance is rebuilt from a string seed, so a failure report names
everything needed to replay it. Random kernels are stochastic matrices over
2- or 3-element domains with denominators at most 8.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .dist import Dist
from .kernel import Kernel, Ty, enumerate_inputs, finite_int, stoch_kernel, det_kernel
from .stream import (
    MStream,
    TypeSchedule,
    _memoryless,
    stream_copy,
    stream_delay,
    stream_feedback,
    stream_fby,
    stream_identity,
    stream_par,
    stream_seq,
    stream_symmetry,
    stream_unroll,
    stream_wait,
)
from .trunc import EquivReport, obs_equiv

DENOMINATORS = (2, 4, 8)


def random_dist(rng: random.Random, outcomes: list) -> Dist:
    """Random distribution over ``outcomes`` with a denominator of 2, 4 or 8."""
    den = rng.choice(DENOMINATORS)
    cuts = sorted(rng.randint(0, den) for _ in range(len(outcomes) - 1))
    parts = [b - a for a, b in zip([0, *cuts], [*cuts, den])]
    return Dist({o: Fraction(p, den) for o, p in zip(outcomes, parts) if p})


def random_kernel(seed: str, inputs, outputs, stochastic=True, name="r") -> Kernel:
    """Pure random kernel: each input gets its own row, derived from ``seed``.

    Rows are generated on demand, so any input tuple is accepted, including
    unit values on delayed wires.
    """
    outcomes = enumerate_inputs(outputs)
    if stochastic:
        return stoch_kernel(inputs, outputs,
                            lambda xs: random_dist(random.Random(f"{seed}|{xs!r}"), outcomes), name)
    return det_kernel(inputs, outputs,
                      lambda xs: random.Random(f"{seed}|{xs!r}").choice(outcomes), name)


def random_type(rng: random.Random, sizes=(2, 3)) -> Ty:
    return finite_int(range(rng.choice(sizes)))


def random_lift(rng, in_sched: TypeSchedule, out_sched: TypeSchedule, stochastic=True) -> MStream:
    seed = f"{rng.random()!r}"
    kernels = {}

    def kernel_at(t):
        sig = (in_sched.at(t), out_sched.at(t))
        if sig not in kernels:
            kernels[sig] = random_kernel(seed, *sig, stochastic=stochastic, name=f"r{len(kernels)}")
        return kernels[sig]

    return _memoryless(kernel_at, in_sched, out_sched, "rand")


def random_stream(rng: random.Random, in_sched: TypeSchedule, out_sched: TypeSchedule,
                  depth=1, stochastic=True) -> MStream:
    """A random stream with the given boundary, built from lifts, feedback,
    sequential and parallel composition, ``fby`` and ``wait``."""
    kinds = ["lift"]
    if depth > 0:
        kinds += ["state", "state", "seq", "wait"]
        if len(in_sched) + len(out_sched) >= 2:
            kinds.append("par")
        if out_sched.horizon() == 0 and len(out_sched) == 1:
            kinds.append("fby")
    kind = rng.choice(kinds)
    sub = lambda i, o: random_stream(rng, i, o, depth - 1, stochastic)
    if kind == "lift":
        return random_lift(rng, in_sched, out_sched, stochastic)
    if kind == "state":
        s = TypeSchedule.constant([random_type(rng)])
        return stream_feedback(sub(s.delayed() + in_sched, s + out_sched), 1)
    if kind == "seq":
        mid = TypeSchedule.constant([random_type(rng) for _ in range(rng.randint(1, 2))])
        return stream_seq(sub(in_sched, mid), sub(mid, out_sched))
    if kind == "wait":
        mid = TypeSchedule.constant([random_type(rng)])
        return stream_seq(stream_seq(sub(in_sched, mid), stream_wait(mid)), sub(mid.delayed(), out_sched))
    if kind == "par":
        i = rng.randint(0, len(in_sched))
        j = rng.randint(0, len(out_sched))
        return stream_par(sub(in_sched[:i], out_sched[:j]), sub(in_sched[i:], out_sched[j:]))
    # fby: a head stream followed by a delayed tail stream
    t = out_sched.at(0)[0]
    n = len(in_sched)
    head = sub(in_sched, out_sched)
    rest = sub(in_sched.delayed(), out_sched.delayed())
    both = stream_seq(stream_copy(in_sched), stream_par(head, stream_delay_inputs(rest, in_sched, n)))
    return stream_seq(both, stream_fby(t))


def stream_delay_inputs(rest: MStream, in_sched: TypeSchedule, n: int) -> MStream:
    """Feed ``rest`` (which expects delayed inputs) from undelayed ones via ``wait``."""
    return stream_seq(stream_wait(in_sched), rest)


# ---------------------------------------------------------------------------
# instances


def _wires(rng, lo=1, hi=1) -> TypeSchedule:
    return TypeSchedule.constant([random_type(rng) for _ in range(rng.randint(lo, hi))])


def _input(rng) -> TypeSchedule:
    return TypeSchedule.constant([finite_int((0, 1))])


def _tightening(rng):
    x2, x, y, y2, s = _input(rng), _wires(rng), _wires(rng), _wires(rng), _wires(rng)
    f = random_stream(rng, s.delayed() + x, s + y)
    u = random_stream(rng, x2, x)
    v = random_stream(rng, y, y2)
    lhs = stream_feedback(
        stream_seq(stream_seq(stream_par(stream_identity(s.delayed()), u), f),
                   stream_par(stream_identity(s), v)), len(s))
    rhs = stream_seq(stream_seq(u, stream_feedback(f, len(s))), v)
    return lhs, rhs


def _vanishing(rng):
    x, y = _input(rng), _wires(rng)
    f = random_stream(rng, x, y)
    return stream_feedback(f, 0), f


def _joining(rng):
    x, y, s, t = _input(rng), _wires(rng), _wires(rng), _wires(rng)
    f = random_stream(rng, s.delayed() + t.delayed() + x, s + t + y)
    lhs = stream_feedback(stream_feedback(f, len(s)), len(t))
    rhs = stream_feedback(f, len(s) + len(t))
    return lhs, rhs


def _strength(rng):
    x, x2, y, y2, s = _input(rng), _input(rng), _wires(rng), _wires(rng), _wires(rng)
    f = random_stream(rng, s.delayed() + x, s + y)
    g = random_stream(rng, x2, y2)
    lhs = stream_par(stream_feedback(f, len(s)), g)
    rhs = stream_feedback(stream_par(f, g), len(s))
    return lhs, rhs


def _sliding(rng):
    x, y, s, t = _input(rng), _wires(rng), _wires(rng), _wires(rng)
    h = random_lift(rng, s, t)
    f = random_stream(rng, t.delayed() + x, s + y)
    lhs = stream_feedback(stream_seq(stream_par(stream_delay(h), stream_identity(x)), f), len(s))
    rhs = stream_feedback(stream_seq(f, stream_par(h, stream_identity(y))), len(t))
    return lhs, rhs


def _seq_assoc(rng):
    x, y, z, w = _input(rng), _wires(rng, 1, 2), _wires(rng, 1, 2), _wires(rng)
    f, g, h = random_stream(rng, x, y), random_stream(rng, y, z), random_stream(rng, z, w)
    return stream_seq(stream_seq(f, g), h), stream_seq(f, stream_seq(g, h))


def _seq_unit_left(rng):
    x, y = _input(rng), _wires(rng, 1, 2)
    f = random_stream(rng, x, y)
    return stream_seq(stream_identity(x), f), f


def _seq_unit_right(rng):
    x, y = _input(rng), _wires(rng, 1, 2)
    f = random_stream(rng, x, y)
    return stream_seq(f, stream_identity(y)), f


def _par_functor(rng):
    x, x2, y, y2, z, z2 = _input(rng), _input(rng), _wires(rng), _wires(rng), _wires(rng), _wires(rng)
    f, f2 = random_stream(rng, x, y), random_stream(rng, x2, y2)
    g, g2 = random_stream(rng, y, z), random_stream(rng, y2, z2)
    lhs = stream_seq(stream_par(f, f2), stream_par(g, g2))
    rhs = stream_par(stream_seq(f, g), stream_seq(f2, g2))
    return lhs, rhs


def _par_identity(rng):
    x, x2 = _input(rng), _input(rng)
    return stream_par(stream_identity(x), stream_identity(x2)), stream_identity(x + x2)


def _symmetry_natural(rng):
    x, x2, y, y2 = _input(rng), _input(rng), _wires(rng), _wires(rng)
    f, g = random_stream(rng, x, y), random_stream(rng, x2, y2)
    lhs = stream_seq(stream_par(f, g), stream_symmetry(y, y2))
    rhs = stream_seq(stream_symmetry(x, x2), stream_par(g, f))
    return lhs, rhs


def _delay_functor(rng):
    x, y, z = _input(rng), _wires(rng), _wires(rng)
    f, g = random_stream(rng, x, y), random_stream(rng, y, z)
    return stream_delay(stream_seq(f, g)), stream_seq(stream_delay(f), stream_delay(g))


def _delay_identity(rng):
    x = _input(rng)
    return stream_delay(stream_identity(x)), stream_identity(x.delayed())


FEEDBACK_AXIOMS = {
    "tightening": _tightening,
    "vanishing": _vanishing,
    "joining": _joining,
    "strength": _strength,
    "sliding": _sliding,
}

CATEGORY_LAWS = {
    "seq-associativity": _seq_assoc,
    "seq-left-unit": _seq_unit_left,
    "seq-right-unit": _seq_unit_right,
    "par-functoriality": _par_functor,
    "par-identity": _par_identity,
    "symmetry-naturality": _symmetry_natural,
    "delay-functoriality": _delay_functor,
    "delay-identity": _delay_identity,
}


def law_instance(law: str, seed) -> tuple[MStream, MStream]:
    """Both sides of one seeded instance of ``law``."""
    table = FEEDBACK_AXIOMS if law in FEEDBACK_AXIOMS else CATEGORY_LAWS
    return table[law](random.Random(f"{law}:{seed}"))


@dataclass(frozen=True)
class LawResult:
    law: str
    seed: str
    report: EquivReport

    @property
    def ok(self):
        return self.report.equal


@dataclass
class SuiteReport:
    depth: int
    results: list = field(default_factory=list)

    @property
    def failures(self):
        return [r for r in self.results if not r.ok]

    @property
    def passed(self):
        return not self.failures

    def counts(self) -> dict:
        out = {}
        for r in self.results:
            ok, total = out.get(r.law, (0, 0))
            out[r.law] = (ok + r.ok, total + 1)
        return out

    def to_dict(self):
        return {
            "depth": self.depth,
            "passed": self.passed,
            "laws": {k: {"passed": ok, "instances": n} for k, (ok, n) in self.counts().items()},
            "failures": [{"law": r.law, "seed": r.seed, **r.report.to_dict()} for r in self.failures],
        }


def _run_one(args):
    law, seed, depth = args
    lhs, rhs = law_instance(law, seed)
    return LawResult(law, seed, obs_equiv(lhs, rhs, depth))


def run_laws(laws, seed=0, instance_count=100, depth=4, workers=1) -> SuiteReport:
    jobs = [(law, f"{seed}/{i}", depth) for law in laws for i in range(instance_count)]
    report = SuiteReport(depth)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            report.results.extend(pool.map(_run_one, jobs, chunksize=8))
    else:
        report.results.extend(map(_run_one, jobs))
    return report


def axiom_suite(seed=0, instance_count=100, depth=4, workers=1) -> SuiteReport:
    """Check the five feedback axioms on ``instance_count`` random stochastic instances each."""
    return run_laws(FEEDBACK_AXIOMS, seed, instance_count, depth, workers)


def category_suite(seed=0, instance_count=100, depth=4, workers=1) -> SuiteReport:
    """Check associativity, unit laws, functoriality of par and delay, symmetry."""
    return run_laws(CATEGORY_LAWS, seed, instance_count, depth, workers)


def vanishing_is_definitional(f: MStream, n=3) -> bool:
    """Feedback over no wires returns the very same kernels."""
    a, b = stream_unroll(stream_feedback(f, 0), n), stream_unroll(f, n)
    return all(x.kernel is y.kernel for x, y in zip(a, b))
