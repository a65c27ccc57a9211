"""The stream language: parsing, checking and elaboration into streams."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..stream import MStream
from .builtins import BUILTINS, Builtin, builtin_lookup
from .elaborate import Elaborator, elaborate
from .parser import parse, parse_term, tokenize
from .syntax import Program, show, show_program, show_type
from .typecheck import TypedProgram, desugar, typecheck


@dataclass
class Compiled:
    """A checked program with its streams elaborated on demand."""

    program: Program
    typed: TypedProgram
    _elab: Elaborator = field(repr=False, default=None)

    def __post_init__(self):
        self._elab = Elaborator(self.typed)
        self._streams = {}

    @property
    def names(self) -> list[str]:
        return list(self.typed.defs)

    @property
    def stochastic(self) -> bool:
        return self.typed.stochastic

    def types(self) -> dict:
        return self.typed.types()

    def stream(self, name: str) -> MStream:
        if name not in self.typed.defs:
            raise KeyError(f"no definition named {name!r}")
        if name not in self._streams:
            self._streams[name] = self._elab.stream(name)
        return self._streams[name]


def compile_source(source: str, inputs=None, expand_wait=False) -> Compiled:
    program = parse(source)
    return Compiled(program, typecheck(program, inputs, expand_wait))


def compile_file(path, inputs=None, expand_wait=False) -> Compiled:
    return compile_source(Path(path).read_text(encoding="utf-8"), inputs, expand_wait)


__all__ = [
    "BUILTINS", "Builtin", "Compiled", "Elaborator", "Program", "TypedProgram", "builtin_lookup",
    "compile_file", "compile_source", "desugar", "elaborate", "parse", "parse_term", "show",
    "show_program", "show_type", "tokenize", "typecheck",
]
