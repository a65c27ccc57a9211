"""Runtime values.

A value is one of

* ``None`` -- the unit value,
* ``int`` -- an arbitrary-precision integer,
* ``frozenset`` of ``int`` -- an urn (finite integer set),
* ``tuple`` of values.

Plain Python objects are used directly; they are immutable and hashable,
which is all the distribution code needs.
"""

from __future__ import annotations

from typing import Any, Union

Value = Union[None, int, frozenset, tuple]


def is_value(v: Any) -> bool:
    if v is None:
        return True
    if isinstance(v, bool):
        return False
    if isinstance(v, int):
        return True
    if isinstance(v, frozenset):
        return all(isinstance(x, int) and not isinstance(x, bool) for x in v)
    if isinstance(v, tuple):
        return all(is_value(x) for x in v)
    return False


def value_key(v: Value):
    """Total order on values, used wherever output must not depend on hashing."""
    if v is None:
        return (0,)
    if isinstance(v, int):
        return (1, v)
    if isinstance(v, frozenset):
        return (2, len(v), tuple(sorted(v)))
    return (3, len(v), tuple(value_key(x) for x in v))


def to_json(v: Value):
    """JSON-ready form: unit is null, sets are sorted arrays, tuples are arrays."""
    if v is None or isinstance(v, int):
        return v
    if isinstance(v, frozenset):
        return sorted(v)
    return [to_json(x) for x in v]


def show(v: Value) -> str:
    if v is None:
        return "()"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, frozenset):
        return "{" + ",".join(str(x) for x in sorted(v)) + "}"
    return "[" + ",".join(show(x) for x in v) + "]"
