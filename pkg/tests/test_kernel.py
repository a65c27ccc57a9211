import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from mstream.dist import dist_dirac, dist_uniform
from mstream.errors import DomainError, SignatureError
from mstream.kernel import (
    INT, SET, UNIT, det_kernel, delay, enumerate_inputs, finite_int, kernel_apply, kernel_compose,
    kernel_tensor, prod, stoch_kernel, structural_kernel,
)
from mstream.laws import random_kernel

B2 = finite_int([0, 1])
B3 = finite_int([0, 1, 2])

step = stoch_kernel((), (INT,), lambda xs: dist_uniform([(-1,), (1,)]), "step")
neg = det_kernel((INT,), (INT,), lambda xs: (-xs[0],), "neg")
add = det_kernel((INT, INT), (INT,), lambda xs: (xs[0] + xs[1],), "add")


def same(f, g):
    return all(f.dist(xs) == g.dist(xs) for xs in enumerate_inputs(f.inputs))


def test_type_printing():
    assert str(prod(INT, delay(SET))) == "(Int * @Set)"
    assert str(B2) == "Int"
    assert finite_int([0, 1], "Bit").name == "Bit"


def test_domain_values():
    assert B2.values() == (0, 1)
    assert prod(B2, UNIT).values() == ((0, None), (1, None))
    with pytest.raises(DomainError):
        INT.values()


def test_contains():
    assert INT.contains(3) and not INT.contains(True)
    assert SET.contains(frozenset({1})) and not SET.contains({1})
    assert not B2.contains(2)


def test_compose_identity():
    ident = structural_kernel("identity", (B3,))
    f = random_kernel(1, (B3,), (B2,))
    assert same(kernel_compose(ident, f), f)


def test_compose_pushforward():
    assert dict(kernel_compose(step, neg).dist(())) == {(1,): F(1, 2), (-1,): F(1, 2)}


def test_compose_mismatch():
    with pytest.raises(SignatureError):
        kernel_compose(neg, structural_kernel("identity", (SET,)))


def test_tensor_independence():
    d = kernel_tensor(step, step).dist(())
    assert dict(d) == {(a, b): F(1, 4) for a in (-1, 1) for b in (-1, 1)}


def test_tensor_identities():
    ia, ib = structural_kernel("identity", (B2,)), structural_kernel("identity", (B3,))
    assert same(kernel_tensor(ia, ib), structural_kernel("identity", (B2, B3)))


def test_structural():
    assert structural_kernel("copy", (INT,)).det((5,)) == (5, 5)
    assert structural_kernel("symmetry", (INT, SET)).det((1, frozenset())) == (frozenset(), 1)
    assert structural_kernel("discard", (INT,)).det((5,)) == ()
    counit = kernel_compose(
        structural_kernel("copy", (B3,)),
        kernel_tensor(structural_kernel("discard", (B3,)), structural_kernel("identity", (B3,))),
    )
    assert same(counit, structural_kernel("identity", (B3,)))


def test_apply():
    assert kernel_apply(add, (2, 3)) == dist_dirac((5,))
    assert dict(kernel_apply(step, ())) == {(-1,): F(1, 2), (1,): F(1, 2)}
    move = det_kernel((INT, SET), (SET,), lambda xs: (xs[1] ^ {xs[0]},), "move")
    assert kernel_apply(move, (2, frozenset({1, 2, 3}))) == dist_dirac((frozenset({1, 3}),))
    assert kernel_apply(step, (), random.Random(0)) in [(-1,), (1,)]


def test_apply_checks_input():
    with pytest.raises(SignatureError):
        kernel_apply(add, (1,))
    with pytest.raises(SignatureError):
        kernel_apply(add, (1, "x"))


def test_det_refuses_stochastic():
    with pytest.raises(SignatureError):
        step.det(())


seeds = st.integers(0, 10_000)


@given(seeds, seeds, seeds)
def test_compose_associative(a, b, c):
    f = random_kernel(a, (B2,), (B3,))
    g = random_kernel(b, (B3,), (B2, B2))
    h = random_kernel(c, (B2, B2), (B3,))
    assert same(kernel_compose(f, kernel_compose(g, h)), kernel_compose(kernel_compose(f, g), h))


@given(seeds, seeds)
def test_tensor_marginal(a, b):
    f = random_kernel(a, (B2,), (B3,))
    g = random_kernel(b, (B3,), (B2,))
    fg = kernel_tensor(f, g)
    first = kernel_compose(fg, structural_kernel("identity", (B3, B2)))
    for x in B2.values():
        for y in B3.values():
            marg = {}
            for (u, _), p in first.dist((x, y)).items():
                marg[(u,)] = marg.get((u,), 0) + p
            assert marg == dict(f.dist((x,)))


@given(seeds)
def test_kernel_rows_are_distributions(a):
    k = random_kernel(a, (B2, B3), (B3,))
    for xs in enumerate_inputs(k.inputs):
        d = k.dist(xs)
        assert sum(d.values()) == 1
        assert all(p.denominator in (1, 2, 4, 8) for p in d.values())
