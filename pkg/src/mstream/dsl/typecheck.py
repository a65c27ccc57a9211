"""Desugaring and delay-aware type checking.

Types are kept in a normal form where delays sit on the leaves:
``@(A * B)`` becomes ``(@A * @B)`` and ``@Unit`` is ``Unit``. A term may
always be checked after stripping one delay from its type and from the
types of all of its free variables (the Delay rule); the checker tries the
deepest such stripping first and backs off when a rule fails below it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

from ..errors import TypeCheckError
from ..kernel import INT, SET, UNIT, Ty, delay, prod
from .builtins import builtin_lookup
from .syntax import (
    Copy, Def, Fbk, Fby, Gen, Lit, Pair, Program, SetLit, Split, Var, Wait, children, free_names,
    show, show_type,
)

INF = float("inf")

# ---------------------------------------------------------------------------
# type normal form


def norm(t: Ty) -> Ty:
    if t.kind == "Prod":
        args = tuple(norm(a) for a in t.args)
        if not args:
            return UNIT
        if len(args) == 1:
            return args[0]
        return Ty("Prod", args, t.name)
    if t.kind == "Delay":
        return delay_n(norm(t.args[0]), 1)
    return t


def delay_n(t: Ty, k: int) -> Ty:
    """``@`` applied ``k`` times to a normal-form type, staying in normal form."""
    if k == 0 or t.kind == "Unit":
        return t
    if t.kind == "Prod":
        return Ty("Prod", tuple(delay_n(a, k) for a in t.args))
    for _ in range(k):
        t = delay(t)
    return t


def depth(t: Ty) -> float:
    """Number of delays that can be stripped from every leaf of ``t``."""
    if t.kind == "Unit":
        return INF
    if t.kind == "Delay":
        return 1 + depth(t.args[0])
    if t.kind == "Prod":
        return min((depth(a) for a in t.args), default=INF)
    return 0


def strip(t: Ty, k: int = 1) -> Ty:
    if k == 0 or t.kind == "Unit":
        return t
    if t.kind == "Delay":
        return strip(t.args[0], k - 1)
    if t.kind == "Prod":
        return Ty("Prod", tuple(strip(a, k) for a in t.args))
    raise ValueError(f"type {t} has no delay to strip")


def erase(t: Ty) -> Ty:
    """Drop every delay; used to tell delay mismatches from plain type errors."""
    if t.kind == "Delay":
        return erase(t.args[0])
    if t.kind == "Prod":
        return Ty("Prod", tuple(erase(a) for a in t.args))
    return t


# ---------------------------------------------------------------------------
# desugaring


def _def_refs(body, defs) -> list:
    return [n for n in free_names(body) if n in defs]


def _find_cycle(graph: dict):
    state = {}

    def visit(n, path):
        state[n] = "active"
        for m in graph[n]:
            if m == n:
                continue
            if state.get(m) == "active":
                return path[path.index(m):] + [m]
            if m not in state:
                c = visit(m, path + [m])
                if c:
                    return c
        state[n] = "done"
        return None

    for n in graph:
        if n not in state:
            c = visit(n, [n])
            if c:
                return c
    return None


def _expand_waits(t, fresh):
    if isinstance(t, Wait):
        y = next(fresh)
        return Fbk(y, Pair((_expand_waits(t.body, fresh), Var(y, t.pos)), t.pos), t.pos)
    if isinstance(t, Gen):
        return Gen(t.name, tuple(_expand_waits(a, fresh) for a in t.args), t.pos)
    if isinstance(t, Pair):
        return Pair(tuple(_expand_waits(a, fresh) for a in t.items), t.pos)
    if isinstance(t, Split):
        return Split(_expand_waits(t.scrutinee, fresh), t.binders, _expand_waits(t.body, fresh), t.pos)
    if isinstance(t, Fby):
        return Fby(_expand_waits(t.head, fresh), _expand_waits(t.tail, fresh), t.pos)
    if isinstance(t, Fbk):
        return Fbk(t.binder, _expand_waits(t.body, fresh), t.pos)
    if isinstance(t, Copy):
        return Copy(_expand_waits(t.body, fresh), t.pos)
    return t


def desugar(p: Program, expand_wait: bool = False) -> Program:
    """Turn self-reference into feedback and optionally ``wait`` into ``fbk``.

    ``stream m : A = x(m)`` becomes ``fbk m. copy(x(m))``: the binder reuses
    the definition's name, so inside the body ``m`` is the previous value of
    the stream itself. With ``expand_wait``, ``wait(x)`` becomes
    ``fbk y. [x, y]`` for a fresh ``y``. Mutual recursion is rejected.
    """
    names = {d.name for d in p.defs}
    graph = {d.name: _def_refs(d.body, names) for d in p.defs}
    cycle = _find_cycle(graph)
    if cycle:
        pos = p.get(cycle[0]).pos
        raise TypeCheckError(
            "recursion", "mutual recursion is not supported: " + " -> ".join(cycle), pos)
    fresh = (f"%w{i}" for i in itertools.count())
    defs = []
    for d in p.defs:
        body = d.body
        if expand_wait:
            body = _expand_waits(body, fresh)
        if d.name in free_names(body):
            body = Fbk(d.name, Copy(body, d.body.pos), d.body.pos)
        defs.append(replace(d, body=body))
    return replace(p, defs=tuple(defs))


# ---------------------------------------------------------------------------
# mode and linearity


def is_stochastic(p: Program) -> bool:
    """A program is stochastic iff it mentions a stochastic builtin."""

    def go(t):
        if isinstance(t, Gen):
            try:
                if builtin_lookup(t.name, t.pos).stochastic:
                    return True
            except TypeCheckError:
                pass
        return any(go(c) for c in children(t))

    return any(go(d.body) for d in p.defs)


def check_linearity(d: Def, inputs=()) -> None:
    """Every bound variable is used exactly once; every input at most once."""
    counter = itertools.count()

    def go(t, scope, counts):
        if isinstance(t, Var):
            if t.name in scope:
                counts[scope[t.name]] += 1
            return
        if isinstance(t, (Split, Fbk)):
            if isinstance(t, Split):
                go(t.scrutinee, scope, counts)
                binders, body = t.binders, t.body
            else:
                binders, body = (t.binder,), t.body
            inner = dict(scope)
            ids = {}
            for b in binders:
                ids[b] = inner[b] = next(counter)
                counts[ids[b]] = 0
            go(body, inner, counts)
            for b, i in ids.items():
                n = counts[i]
                if n > 1:
                    raise TypeCheckError(
                        "linearity",
                        f"variable {b!r} is used {n} times in a stochastic program; "
                        f"each variable must be used exactly once (insert copy/split)", t.pos)
                if n == 0:
                    raise TypeCheckError(
                        "linearity",
                        f"variable {b!r} is never used in a stochastic program; "
                        f"consume it explicitly with discard({b})", t.pos)
            return
        for c in children(t):
            go(c, scope, counts)

    scope = {}
    counts = {}
    for name in inputs:
        scope[name] = next(counter)
        counts[scope[name]] = 0
    go(d.body, scope, counts)
    for name in inputs:
        if counts[scope[name]] > 1:
            raise TypeCheckError(
                "linearity",
                f"input {name!r} is used {counts[scope[name]]} times in {d.name!r}; "
                f"insert copy/split", d.pos)


# ---------------------------------------------------------------------------
# typed terms


@dataclass(frozen=True)
class Typed:
    """A term with its type and the types of its free variables.

    ``ty`` and ``env`` are the outer types; the children were checked after
    ``delay`` applications of the Delay rule were stripped from both.
    ``info`` holds rule-specific data (the state type of a feedback, the
    scrutinee type of a split).
    """

    kind: str
    term: object = field(repr=False)
    ty: Ty
    env: tuple  # ((name, Ty), ...) in order of first occurrence
    kids: tuple = ()
    delay: int = 0
    info: object = None

    @property
    def inner_env(self) -> tuple:
        return tuple((n, strip(t, self.delay)) for n, t in self.env)

    @property
    def inner_ty(self) -> Ty:
        return strip(self.ty, self.delay)


@dataclass(frozen=True)
class DefInfo:
    name: str
    ty: Ty
    inputs: tuple  # names of the program inputs the definition reads
    typed: Typed


@dataclass(frozen=True)
class TypedProgram:
    program: Program  # after desugaring
    stochastic: bool
    inputs: tuple  # ((name, Ty), ...)
    defs: dict  # name -> DefInfo, in definition order

    @property
    def mode(self) -> str:
        return "stochastic" if self.stochastic else "deterministic"

    def types(self) -> dict:
        return {n: d.ty for n, d in self.defs.items()}


_FATAL = ("unbound", "generator", "recursion", "linearity")


class Checker:
    def __init__(self, inputs: dict):
        self.inputs = inputs
        self.defs: dict[str, DefInfo] = {}

    # -- free variables

    def fv(self, term, scope) -> list:
        out = []

        def add(n):
            if n not in out:
                out.append(n)

        def go(t, bound):
            if isinstance(t, Var):
                if t.name in bound:
                    return
                if t.name in scope:
                    add(t.name)
                elif t.name in self.defs:
                    for i in self.defs[t.name].inputs:
                        add(i)
            elif isinstance(t, Split):
                go(t.scrutinee, bound)
                go(t.body, bound | set(t.binders))
            elif isinstance(t, Fbk):
                go(t.body, bound | {t.binder})
            else:
                for c in children(t):
                    go(c, bound)

        go(term, frozenset())
        return out

    # -- entry points with the Delay rule

    def check(self, term, want: Ty, scope: dict) -> Typed:
        names = self.fv(term, scope)
        d = min([depth(scope[n]) for n in names] + [depth(want)])
        d = 0 if d == INF else int(d)
        err = None
        for k in range(d, -1, -1):
            inner = {n: strip(scope[n], k) for n in names}
            try:
                node = self.check_direct(term, strip(want, k), inner)
            except TypeCheckError as e:
                if e.kind in _FATAL:
                    raise
                err = e
                continue
            return replace(node, ty=want, env=tuple((n, scope[n]) for n in names), delay=k)
        raise err

    def synth(self, term, scope: dict) -> Typed:
        names = self.fv(term, scope)
        d = min((depth(scope[n]) for n in names), default=0)
        d = 0 if d == INF else int(d)
        err = None
        for k in range(d, -1, -1):
            inner = {n: strip(scope[n], k) for n in names}
            try:
                node = self.synth_direct(term, inner)
            except TypeCheckError as e:
                if e.kind in _FATAL:
                    raise
                err = e
                continue
            return replace(node, ty=delay_n(node.ty, k), env=tuple((n, scope[n]) for n in names),
                           delay=k)
        raise err

    # -- helpers

    def _node(self, kind, term, ty, scope, kids=(), info=None) -> Typed:
        env = tuple((n, scope[n]) for n in self.fv(term, scope))
        return Typed(kind, term, ty, env, tuple(kids), 0, info)

    @staticmethod
    def expect(actual: Ty, want: Ty, term):
        if actual == want:
            return
        what = show(term)
        if erase(actual) == erase(want):
            raise TypeCheckError(
                "delay", f"delay mismatch: {what} has type {show_type(actual)}, expected {show_type(want)}",
                term.pos)
        raise TypeCheckError(
            "type", f"type mismatch: {what} has type {show_type(actual)}, expected {show_type(want)}",
            term.pos)

    def lookup(self, v: Var, scope) -> tuple[str, Ty]:
        if v.name in scope:
            return "var", scope[v.name]
        if v.name in self.defs:
            info = self.defs[v.name]
            for i in info.inputs:
                if scope[i] != self.inputs[i]:
                    raise TypeCheckError(
                        "delay", f"delay mismatch: {v.name} reads input {i} at type "
                        f"{show_type(self.inputs[i])}, but here it has type {show_type(scope[i])}", v.pos)
            return "def", info.ty
        raise TypeCheckError("unbound", f"unbound variable {v.name!r}", v.pos)

    def _bind(self, t: Split, ty: Ty) -> dict:
        n = len(t.binders)
        if n == 1:
            return {t.binders[0]: ty}
        if ty.kind != "Prod" or len(ty.args) != n:
            raise TypeCheckError(
                "type", f"split into {n} names needs a product of {n} components, "
                f"got {show_type(ty)}", t.pos)
        return dict(zip(t.binders, ty.args))

    def _scrutinee_options(self, t: Split, scope):
        """The scrutinee at its synthesized type, then with fewer or more delays."""
        first = self.synth(t.scrutinee, scope)
        yield first
        d = depth(first.ty)
        d = 0 if d == INF else int(d)
        others = [strip(first.ty, i) for i in range(1, d + 1)] + [delay_n(first.ty, j) for j in (1, 2)]
        for ty in others:
            try:
                yield self.check(t.scrutinee, ty, scope)
            except TypeCheckError as e:
                if e.kind in _FATAL:
                    raise

    def _state_options(self, t: Fbk, want, scope) -> list:
        """Candidate state types of a feedback, most likely first."""
        body = t.body
        if isinstance(body, Copy) and want is not None:
            return [want]
        if isinstance(body, Pair) and len(body.items) == 2:
            first = body.items[0]
            if t.binder not in free_names(first):
                s0 = self.synth(first, scope).ty
                return [delay_n(s0, j) for j in (0, 1, 2)]
            # the next state reads the previous one: look for a base type
            # that reproduces itself
            found = []
            for c in (INT, SET):
                inner = dict(scope)
                inner[t.binder] = delay_n(c, 1)
                try:
                    if self.synth(first, inner).ty == c:
                        found.append(c)
                except TypeCheckError as e:
                    if e.kind in _FATAL:
                        raise
            if found:
                return found
        raise TypeCheckError(
            "feedback", f"cannot infer the state type of fbk {t.binder}; write its body as "
            f"[state, result] or as copy(...)", t.pos)

    # -- rules without the Delay rule at the root

    def check_direct(self, t, want: Ty, scope: dict) -> Typed:
        if isinstance(t, Var):
            kind, ty = self.lookup(t, scope)
            self.expect(ty, want, t)
            return self._node(kind, t, want, scope)
        if isinstance(t, Lit):
            self.expect(INT, want, t)
            return self._node("lit", t, want, scope)
        if isinstance(t, SetLit):
            self.expect(SET, want, t)
            return self._node("set", t, want, scope)
        if isinstance(t, Gen):
            b = builtin_lookup(t.name, t.pos)
            if b.inputs is None:
                if len(t.args) != 1:
                    raise TypeCheckError("type", f"{t.name} takes 1 argument, got {len(t.args)}", t.pos)
                self.expect(UNIT, want, t)
                return self._node("gen", t, want, scope, [self.synth(t.args[0], scope)], b)
            if len(t.args) != len(b.inputs):
                raise TypeCheckError(
                    "type", f"{t.name} takes {len(b.inputs)} arguments, got {len(t.args)}", t.pos)
            # A generator also applies pointwise under delays: from arguments
            # of types @^j A_i it gives @^j B. The plain delay rule already
            # covers delayed contexts; this handles mixed ones such as wait(x) + d.
            j = int(depth(want)) if want.kind == "Delay" else 0
            self.expect(b.output, strip(want, j), t)
            kids = [self.check(a, delay_n(ty, j), scope) for a, ty in zip(t.args, b.inputs)]
            return self._node("gen", t, want, scope, kids, b)
        if isinstance(t, Pair):
            n = len(t.items)
            if n == 0:
                self.expect(UNIT, want, t)
                return self._node("pair", t, want, scope)
            if n == 1:
                return self._node("pair", t, want, scope, [self.check(t.items[0], want, scope)])
            if want.kind != "Prod" or len(want.args) != n:
                raise TypeCheckError(
                    "type", f"a pair of {n} components cannot have type {show_type(want)}", t.pos)
            kids = [self.check(a, ty, scope) for a, ty in zip(t.items, want.args)]
            return self._node("pair", t, want, scope, kids)
        if isinstance(t, Split):
            err = None
            for m in self._scrutinee_options(t, scope):
                inner = dict(scope)
                inner.update(self._bind(t, m.ty))
                try:
                    body = self.check(t.body, want, inner)
                except TypeCheckError as e:
                    if e.kind in _FATAL:
                        raise
                    err = err or e
                    continue
                return self._node("split", t, want, scope, [m, body], m.ty)
            raise err
        if isinstance(t, Fby):
            head = self.check(t.head, want, scope)
            tail = self.check(t.tail, delay_n(want, 1), scope)
            return self._node("fby", t, want, scope, [head, tail])
        if isinstance(t, Wait):
            if depth(want) < 1:
                try:
                    got = delay_n(self.synth(t.body, scope).ty, 1)
                except TypeCheckError:
                    got = None
                shown = f"has type {show_type(got)}" if got else "has a delayed type"
                raise TypeCheckError(
                    "delay", f"delay mismatch: {show(t)} {shown}, expected {show_type(want)}", t.pos)
            body = self.check(t.body, strip(want), scope)
            return self._node("wait", t, want, scope, [body])
        if isinstance(t, Copy):
            if want.kind != "Prod" or len(want.args) != 2 or want.args[0] != want.args[1]:
                raise TypeCheckError(
                    "type", f"copy produces a pair of equal types, expected {show_type(want)}", t.pos)
            return self._node("copy", t, want, scope, [self.check(t.body, want.args[0], scope)])
        if isinstance(t, Fbk):
            err = None
            for s in self._state_options(t, want, scope):
                inner = dict(scope)
                inner[t.binder] = delay_n(s, 1)
                try:
                    body = self.check(t.body, prod(s, want), inner)
                except TypeCheckError as e:
                    if e.kind in _FATAL:
                        raise
                    err = err or e
                    continue
                return self._node("fbk", t, want, scope, [body], s)
            raise err
        raise TypeError(f"not a term: {t!r}")

    def synth_direct(self, t, scope: dict) -> Typed:
        if isinstance(t, Var):
            kind, ty = self.lookup(t, scope)
            return self._node(kind, t, ty, scope)
        if isinstance(t, Lit):
            return self._node("lit", t, INT, scope)
        if isinstance(t, SetLit):
            return self._node("set", t, SET, scope)
        if isinstance(t, Gen):
            b = builtin_lookup(t.name, t.pos)
            try:
                return self.check_direct(t, b.output, scope)
            except TypeCheckError as e:
                if e.kind in _FATAL or b.inputs is None or b.output.kind == "Unit":
                    raise
                # retry pointwise, at the largest delay an argument demands
                j = 0
                for a in t.args:
                    try:
                        ty = self.synth(a, scope).ty
                    except TypeCheckError as e2:
                        if e2.kind in _FATAL:
                            raise
                        continue
                    if ty.kind == "Delay":
                        j = max(j, int(depth(ty)))
                if j == 0:
                    raise
                return self.check_direct(t, delay_n(b.output, j), scope)
        if isinstance(t, Pair):
            kids = [self.synth(a, scope) for a in t.items]
            ty = norm(prod(*(k.ty for k in kids)))
            return self._node("pair", t, ty, scope, kids)
        if isinstance(t, Split):
            m = self.synth(t.scrutinee, scope)
            inner = dict(scope)
            inner.update(self._bind(t, m.ty))
            body = self.synth(t.body, inner)
            return self._node("split", t, body.ty, scope, [m, body], m.ty)
        if isinstance(t, Fby):
            head = self.synth(t.head, scope)
            tail = self.check(t.tail, delay_n(head.ty, 1), scope)
            return self._node("fby", t, head.ty, scope, [head, tail])
        if isinstance(t, Wait):
            body = self.synth(t.body, scope)
            return self._node("wait", t, delay_n(body.ty, 1), scope, [body])
        if isinstance(t, Copy):
            body = self.synth(t.body, scope)
            return self._node("copy", t, prod(body.ty, body.ty), scope, [body])
        if isinstance(t, Fbk):
            for s in self._state_options(t, None, scope):
                inner = dict(scope)
                inner[t.binder] = delay_n(s, 1)
                body = self.synth(t.body, inner)
                if body.ty.kind != "Prod" or len(body.ty.args) != 2 or body.ty.args[0] != s:
                    continue
                return self._node("fbk", t, body.ty.args[1], scope, [body], s)
            raise TypeCheckError("feedback", f"cannot infer the type of {show(t)}", t.pos)
        raise TypeError(f"not a term: {t!r}")

    # -- definitions

    def add_def(self, d: Def) -> DefInfo:
        ty = norm(d.ty)
        scope = dict(self.inputs)
        names = self.fv(d.body, scope)
        used = tuple(n for n in self.inputs if n in names)
        typed = self.check(d.body, ty, {n: scope[n] for n in used})
        info = DefInfo(d.name, ty, used, typed)
        self.defs[d.name] = info
        return info


def _order(p: Program) -> list:
    """Definitions with every referenced definition first (no cycles remain)."""
    names = {d.name: d for d in p.defs}
    done, out = set(), []

    def visit(d):
        if d.name in done:
            return
        done.add(d.name)
        for n in _def_refs(d.body, names):
            if n != d.name:
                visit(names[n])
        out.append(d)

    for d in p.defs:
        visit(d)
    return out


def typecheck(p: Program, inputs=None, expand_wait: bool = False) -> TypedProgram:
    """Desugar and type a program.

    ``inputs`` optionally maps names to types; those names may then be used
    free in every definition and become the input wires of its stream.
    """
    inputs = {n: norm(t) for n, t in dict(inputs or {}).items()}
    for n in inputs:
        if n in p.names:
            raise TypeCheckError("type", f"input {n!r} clashes with a definition of the same name")
    p = desugar(p, expand_wait)
    stochastic = is_stochastic(p)
    checker = Checker(inputs)
    for d in _order(p):
        if stochastic:
            check_linearity(d, [n for n in inputs])
        checker.add_def(d)
    defs = {d.name: checker.defs[d.name] for d in p.defs}
    return TypedProgram(p, stochastic, tuple(inputs.items()), defs)
