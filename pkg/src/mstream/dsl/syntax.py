"""Abstract syntax of the stream language and its printer.

Source positions are kept on every node as ``(line, col)`` but do not take
part in equality, so two parses of equivalent text compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..kernel import INT, SET, UNIT, Ty

Pos = tuple  # (line, col), 1-based


def _pos():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Lit:
    value: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class SetLit:
    elems: tuple
    pos: Pos = _pos()


@dataclass(frozen=True)
class Gen:
    """Application of a builtin generator; infix arithmetic is ``Gen("+", ...)``."""

    name: str
    args: tuple
    pos: Pos = _pos()


@dataclass(frozen=True)
class Pair:
    items: tuple
    pos: Pos = _pos()


@dataclass(frozen=True)
class Split:
    scrutinee: object
    binders: tuple
    body: object
    pos: Pos = _pos()


@dataclass(frozen=True)
class Fby:
    head: object
    tail: object
    pos: Pos = _pos()


@dataclass(frozen=True)
class Wait:
    body: object
    pos: Pos = _pos()


@dataclass(frozen=True)
class Fbk:
    binder: str
    body: object
    pos: Pos = _pos()


@dataclass(frozen=True)
class Copy:
    body: object
    pos: Pos = _pos()


Term = Var | Lit | SetLit | Gen | Pair | Split | Fby | Wait | Fbk | Copy

INFIX = {"+": 1, "-": 1, "*": 2}


@dataclass(frozen=True)
class Def:
    name: str
    ty: Ty
    body: Term
    pos: Pos = _pos()


@dataclass(frozen=True)
class DomainDecl:
    name: str
    values: tuple
    ty: Ty
    pos: Pos = _pos()


@dataclass(frozen=True)
class Program:
    defs: tuple
    domains: tuple = ()

    def get(self, name: str) -> Def:
        for d in self.defs:
            if d.name == name:
                return d
        raise KeyError(name)

    @property
    def names(self):
        return [d.name for d in self.defs]


# ---------------------------------------------------------------------------
# traversal


def children(t: Term) -> tuple:
    if isinstance(t, Gen):
        return t.args
    if isinstance(t, Pair):
        return t.items
    if isinstance(t, Split):
        return (t.scrutinee, t.body)
    if isinstance(t, Fby):
        return (t.head, t.tail)
    if isinstance(t, (Wait, Copy, Fbk)):
        return (t.body,)
    return ()


def free_names(t: Term, bound=frozenset()) -> list:
    """Identifiers used free in ``t``, in order of first occurrence."""
    out = []

    def go(t, bound):
        if isinstance(t, Var):
            if t.name not in bound and t.name not in out:
                out.append(t.name)
        elif isinstance(t, Split):
            go(t.scrutinee, bound)
            go(t.body, bound | set(t.binders))
        elif isinstance(t, Fbk):
            go(t.body, bound | {t.binder})
        else:
            for c in children(t):
                go(c, bound)

    go(t, frozenset(bound))
    return out


def substitute(t: Term, name: str, new: str) -> Term:
    """Rename free occurrences of ``name`` to ``new``."""
    if isinstance(t, Var):
        return Var(new, t.pos) if t.name == name else t
    if isinstance(t, Split):
        body = t.body if name in t.binders else substitute(t.body, name, new)
        return Split(substitute(t.scrutinee, name, new), t.binders, body, t.pos)
    if isinstance(t, Fbk):
        return t if t.binder == name else Fbk(t.binder, substitute(t.body, name, new), t.pos)
    if isinstance(t, Gen):
        return Gen(t.name, tuple(substitute(a, name, new) for a in t.args), t.pos)
    if isinstance(t, Pair):
        return Pair(tuple(substitute(a, name, new) for a in t.items), t.pos)
    if isinstance(t, Fby):
        return Fby(substitute(t.head, name, new), substitute(t.tail, name, new), t.pos)
    if isinstance(t, Wait):
        return Wait(substitute(t.body, name, new), t.pos)
    if isinstance(t, Copy):
        return Copy(substitute(t.body, name, new), t.pos)
    return t


# ---------------------------------------------------------------------------
# printing


def show_type(t: Ty) -> str:
    if t.name:
        return t.name
    if t.kind == "Prod":
        return "(" + " * ".join(show_type(a) for a in t.args) + ")"
    if t.kind == "Delay":
        return "@" + show_type(t.args[0])
    return t.kind


def _show_set(elems) -> str:
    return "{" + ", ".join(str(e) for e in elems) + "}"


def show(t: Term, prec: int = 0) -> str:
    """Print a term in the normal form the parser reads back to the same tree.

    ``prec`` is the binding strength of the context: 0 accepts anything,
    1 needs at least an additive term, 2 a multiplicative one, 3 an atom.
    """
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Lit):
        return str(t.value)
    if isinstance(t, SetLit):
        return _show_set(t.elems)
    if isinstance(t, Gen) and t.name in INFIX and len(t.args) == 2:
        p = INFIX[t.name]
        s = f"{show(t.args[0], p)} {t.name} {show(t.args[1], p + 1)}"
        return s if prec <= p else f"({s})"
    if isinstance(t, Gen):
        return f"{t.name}(" + ", ".join(show(a) for a in t.args) + ")"
    if isinstance(t, Pair):
        return "[" + ", ".join(show(a) for a in t.items) + "]"
    if isinstance(t, Wait):
        return f"wait({show(t.body)})"
    if isinstance(t, Copy):
        return f"copy({show(t.body)})"
    if isinstance(t, Fby):
        head = f"({show(t.head)})" if isinstance(t.head, (Split, Fbk)) else show(t.head, 0)
        s = f"{head} fby {show(t.tail, 1)}"
        return s if prec == 0 else f"({s})"
    if isinstance(t, Fbk):
        s = f"fbk {t.binder}. {show(t.body)}"
        return s if prec == 0 else f"({s})"
    if isinstance(t, Split):
        s = f"split {show(t.scrutinee)} -> [{', '.join(t.binders)}] in {show(t.body)}"
        return s if prec == 0 else f"({s})"
    raise TypeError(f"not a term: {t!r}")


def show_value(v) -> str:
    if isinstance(v, frozenset):
        return _show_set(sorted(v))
    return str(v)


def show_program(p: Program) -> str:
    lines = []
    for d in p.domains:
        lines.append(f"domain {d.name} = {{{', '.join(show_value(v) for v in d.values)}}}")
    for d in p.defs:
        lines.append(f"stream {d.name} : {show_type(d.ty)} = {show(d.body)}")
    return "\n".join(lines) + "\n"


BASE_TYPES = {"Int": INT, "Set": SET, "Unit": UNIT}
