import random

import pytest
from hypothesis import given, settings, strategies as st

from mstream.dist import dist_uniform
from mstream.dsl import BUILTINS, builtin_lookup, compile_file, compile_source
from mstream.errors import TypeCheckError
from mstream.kernel import INT, SET, det_kernel, kernel_apply, stoch_kernel
from mstream.stream import (
    TypeSchedule, stream_copy, stream_lift_constant, stream_run, stream_seq,
)
from mstream.trunc import causal_eval, check_causality, obs_equiv
from tests.conftest import PROGRAMS
from tests.reference_eval import evaluate, random_program


def run(c, name, n, seed=0):
    return [y for y in stream_run(c.stream(name), n=n, rng=random.Random(seed))]


def test_fib():
    c = compile_file(PROGRAMS / "fib.mstr")
    assert [y[0] for y in run(c, "fib", 10)] == [0, 1, 1, 2, 3, 5, 8, 13, 21, 34]


def test_walk_causal():
    assert check_causality(compile_file(PROGRAMS / "walk.mstr").stream("walk"), 5)


def test_generator_only_program_is_a_lift():
    c = compile_source("stream r : Int = unifrange(1, 3)")
    lift = stream_lift_constant(BUILTINS["unifrange"].kernel((INT, INT)))
    const = stream_lift_constant(det_kernel((), (INT, INT), lambda xs: (1, 3), "args"))
    assert obs_equiv(c.stream("r"), stream_seq(const, lift), 3)


def test_split_is_compositional():
    c = compile_source("stream r : Int = split copy(unif(0, 1)) -> [a, b] in a + b")
    coin = stream_lift_constant(stoch_kernel((), (INT,), lambda xs: dist_uniform([(0,), (1,)]), "coin"))
    add = stream_lift_constant(det_kernel((INT, INT), (INT,), lambda xs: (xs[0] + xs[1],), "add"))
    ints = TypeSchedule.constant([INT])
    assert obs_equiv(c.stream("r"), stream_seq(stream_seq(coin, stream_copy(ints)), add), 4)


@pytest.mark.parametrize("name", ["fib", "walk", "ehrenfest", "silent"])
def test_wait_routes_agree(name):
    path = PROGRAMS / f"{name}.mstr"
    prim, expanded = compile_file(path), compile_file(path, expand_wait=True)
    for d in prim.names:
        assert obs_equiv(prim.stream(d), expanded.stream(d), 5), d


def test_wait_routes_agree_on_inputs():
    src = "domain Bit = {0, 1}\nstream a : @Int = wait(x + 1)\nstream b : Int = 1 fby wait(x)"
    inputs = {"x": INT.with_domain([0, 1])}
    prim, expanded = compile_source(src, inputs), compile_source(src, inputs, expand_wait=True)
    for d in ("a", "b"):
        assert obs_equiv(prim.stream(d), expanded.stream(d), 5)


def test_ehrenfest_moves_one_ball():
    c = compile_file(PROGRAMS / "ehrenfest.mstr")
    states = run(c, "urns", 50, seed=3)
    assert states[0] == (frozenset({1, 2, 3, 4}), frozenset())
    for (a, b), (a2, b2) in zip(states, states[1:]):
        assert a | b == frozenset({1, 2, 3, 4}) and not a & b
        assert len(a ^ a2) == 1



def test_fbk_counter_values():
    c = compile_source("stream c : Int = fbk s. [0 fby (s + 1), 0 fby s]")
    assert [y[0] for y in run(c, "c", 5)] == [0, 0, 1, 2, 3]


def test_def_reference_under_delay():
    c = compile_source("stream n : Int = 10\nstream m : Int = 1 fby n * 2")
    assert [y[0] for y in run(c, "m", 3)] == [1, 20, 20]


def test_unit_programs():
    c = compile_file(PROGRAMS / "silent.mstr")
    assert run(c, "silent", 3) == [(), (), ()]
    assert obs_equiv(c.stream("silent"), c.stream("nothing"), 5)


def test_inputs_are_routed():
    c = compile_source("stream a : Int = y * 10\nstream b : Int = a + x", inputs={"x": INT, "y": INT})
    assert causal_eval(c.stream("b"), [(1, 2), (3, 4)]) == [(21,), (43,)]
    assert causal_eval(c.stream("a"), [(1, 2)]) == [(20,)]


def test_builtins():
    move = BUILTINS["move"].kernel((INT, SET))
    assert kernel_apply(move, (3, frozenset({1, 2, 3}))).point() == (frozenset({1, 2}),)
    assert kernel_apply(move, (4, frozenset({1, 2}))).point() == (frozenset({1, 2, 4}),)
    unif = BUILTINS["unif"].kernel((INT, INT))
    assert set(kernel_apply(unif, (-1, 1))) == {(-1,), (1,)}
    rng = BUILTINS["unifrange"].kernel((INT, INT))
    assert set(kernel_apply(rng, (-1, 1))) == {(-1,), (0,), (1,)}
    assert set(kernel_apply(BUILTINS["uniform"].kernel((INT,)), (4,))) == {(k,) for k in range(1, 5)}
    with pytest.raises(TypeCheckError):
        builtin_lookup("nope")


def compare_with_reference(seed, steps=8):
    prog = random_program(seed)
    c = compile_source(prog.source(), inputs={"x": INT})
    xs = [random.Random(f"in{seed}").randint(-3, 3) for _ in range(steps)]
    ref = evaluate(prog, xs)
    for d in prog.defs:
        got = [y[0] for y in causal_eval(c.stream(d.name), [(v,) for v in xs])]
        assert got == ref[d.name], (prog.source(), d.name)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 1_000_000))
def test_matches_reference_evaluator(seed):
    compare_with_reference(seed)
