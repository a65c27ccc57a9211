"""Lexer and recursive-descent parser for ``.mstr`` programs."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError
from ..kernel import INT, SET, Ty, delay, prod
from .syntax import (
    BASE_TYPES, Copy, Def, DomainDecl, Fbk, Fby, Gen, Lit, Pair, Program, SetLit, Split, Var, Wait,
)

KEYWORDS = {"stream", "fby", "wait", "fbk", "copy", "split", "in", "domain"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<arrow>->)
  | (?P<sym>[:=()\[\]{},*+\-@.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "kw", "sym", "eof"
    text: str
    line: int
    col: int

    @property
    def pos(self):
        return (self.line, self.col)


def tokenize(source: str) -> list[Token]:
    toks = []
    line, start = 1, 0
    i = 0
    while i < len(source):
        m = _TOKEN.match(source, i)
        if m is None:
            raise ParseError(f"unexpected character {source[i]!r}", line, i - start + 1)
        kind = m.lastgroup
        text = m.group()
        col = i - start + 1
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind == "ident":
            toks.append(Token("kw" if text in KEYWORDS else "ident", text, line, col))
        elif kind in ("int", "sym"):
            toks.append(Token(kind, text, line, col))
        elif kind == "arrow":
            toks.append(Token("sym", text, line, col))
        i = m.end()
    toks.append(Token("eof", "", line, i - start + 1))
    return toks


def _describe(tok: Token) -> str:
    return "end of input" if tok.kind == "eof" else repr(tok.text)


class Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0
        self.domains: dict[str, Ty] = {}

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def at(self, text, kind=None) -> bool:
        t = self.tok
        return t.text == text and (kind is None or t.kind == kind) and t.kind != "eof"

    def accept(self, text) -> Token | None:
        if self.at(text) and self.tok.kind in ("sym", "kw"):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text) -> Token:
        t = self.accept(text)
        if t is None:
            self.error(f"expected {text!r}, found {_describe(self.tok)}")
        return t

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "ident":
            self.error(f"expected an identifier, found {_describe(t)}")
        self.i += 1
        return t

    def integer(self) -> int:
        neg = self.accept("-")
        t = self.tok
        if t.kind != "int":
            self.error(f"expected an integer, found {_describe(t)}")
        self.i += 1
        return -int(t.text) if neg else int(t.text)

    # -- program

    def program(self) -> Program:
        defs, domains, seen = [], [], set()
        while self.tok.kind != "eof":
            if self.at("domain", "kw"):
                domains.append(self.domain_decl())
            elif self.at("stream", "kw"):
                d = self.definition()
                if d.name in seen:
                    raise ParseError(f"duplicate definition of {d.name!r}", *d.pos)
                seen.add(d.name)
                defs.append(d)
            else:
                self.error(f"expected 'stream' or 'domain', found {_describe(self.tok)}")
        return Program(tuple(defs), tuple(domains))

    def domain_decl(self) -> DomainDecl:
        kw = self.expect("domain")
        name = self.ident()
        if name.text in BASE_TYPES or name.text in self.domains:
            self.error(f"type {name.text!r} is already defined", name)
        self.expect("=")
        self.expect("{")
        values = [self.domain_value()]
        while self.accept(","):
            values.append(self.domain_value())
        self.expect("}")
        kinds = {type(v) for v in values}
        if len(kinds) != 1:
            self.error(f"domain {name.text!r} mixes integers and sets", name)
        base = INT if kinds == {int} else SET
        if len(set(values)) != len(values):
            self.error(f"domain {name.text!r} lists a value twice", name)
        ty = base.with_domain(values, name.text)
        self.domains[name.text] = ty
        return DomainDecl(name.text, tuple(ty.domain), ty, kw.pos)

    def domain_value(self):
        if self.accept("{"):
            elems = self.set_elems()
            return frozenset(elems)
        return self.integer()

    def set_elems(self) -> list[int]:
        """Elements after an opening brace, up to and including the closing one."""
        elems = []
        if not self.accept("}"):
            elems.append(self.integer())
            while self.accept(","):
                elems.append(self.integer())
            self.expect("}")
        return elems

    def definition(self) -> Def:
        kw = self.expect("stream")
        name = self.ident()
        self.expect(":")
        ty = self.type()
        self.expect("=")
        body = self.term()
        return Def(name.text, ty, body, name.pos or kw.pos)

    # -- types

    def type(self) -> Ty:
        if self.accept("@"):
            return delay(self.type())
        if self.accept("("):
            items = [self.type()]
            while self.accept("*"):
                items.append(self.type())
            self.expect(")")
            return items[0] if len(items) == 1 else prod(*items)
        t = self.ident()
        if t.text in BASE_TYPES:
            return BASE_TYPES[t.text]
        if t.text in self.domains:
            return self.domains[t.text]
        self.error(f"unknown type {t.text!r}", t)

    # -- terms, loosest binding first

    def term(self):
        left = self.additive()
        while (op := self.accept("fby")) is not None:
            left = Fby(left, self.additive(), op.pos)
        return left

    def additive(self):
        left = self.multiplicative()
        while self.at("+", "sym") or self.at("-", "sym"):
            op = self.tok
            self.i += 1
            left = Gen(op.text, (left, self.multiplicative()), op.pos)
        return left

    def multiplicative(self):
        left = self.primary()
        while (op := self.accept("*")) is not None:
            left = Gen("*", (left, self.primary()), op.pos)
        return left

    def args(self, close: str) -> tuple:
        items = [self.term()]
        while self.accept(","):
            items.append(self.term())
        self.expect(close)
        return tuple(items)

    def primary(self):
        t = self.tok
        if t.kind == "int" or (t.text == "-" and t.kind == "sym"):
            return Lit(self.integer(), t.pos)
        if self.accept("("):
            inner = self.term()
            self.expect(")")
            return inner
        if self.accept("["):
            if self.accept("]"):
                return Pair((), t.pos)
            return Pair(self.args("]"), t.pos)
        if self.accept("{"):
            elems = self.set_elems()
            return SetLit(tuple(sorted(set(elems))), t.pos)
        if self.accept("wait"):
            self.expect("(")
            body = self.term()
            self.expect(")")
            return Wait(body, t.pos)
        if self.accept("copy"):
            self.expect("(")
            body = self.term()
            self.expect(")")
            return Copy(body, t.pos)
        if self.accept("fbk"):
            binder = self.ident()
            self.expect(".")
            return Fbk(binder.text, self.term(), t.pos)
        if self.accept("split"):
            scrutinee = self.term()
            self.expect("->")
            self.expect("[")
            names = [self.ident()]
            while self.accept(","):
                names.append(self.ident())
            self.expect("]")
            seen = set()
            for n in names:
                if n.text in seen:
                    self.error(f"binder {n.text!r} appears twice in split", n)
                seen.add(n.text)
            self.expect("in")
            return Split(scrutinee, tuple(n.text for n in names), self.term(), t.pos)
        if t.kind == "ident":
            self.i += 1
            if self.accept("("):
                return Gen(t.text, self.args(")"), t.pos)
            return Var(t.text, t.pos)
        self.error(f"unexpected {_describe(t)}")


def parse(source: str) -> Program:
    """Parse program text; raises :class:`ParseError` with line and column."""
    return Parser(source).program()


def parse_term(source: str):
    p = Parser(source)
    t = p.term()
    if p.tok.kind != "eof":
        p.error(f"unexpected {_describe(p.tok)} after term")
    return t
