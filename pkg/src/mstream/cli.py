"""Command-line front end.

Exit codes: 0 success (or "equal"), 1 parse or file error, 2 type error,
3 support overflow, 4 equivalence verdict "differ", 5 law-suite or
causality failure, 64 usage error.

Sampling uses Python's ``random.Random`` (Mersenne Twister MT19937) seeded
with ``--seed``; every stochastic draw is one ``randrange`` call over the
common denominator of the distribution, with outcomes laid out in the
canonical value order. This contract is named ``RNG_NAME`` below and is
part of the output format: the same seed and file give byte-identical runs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from pathlib import Path

from .dist import capped, support_cap
from .dsl import Compiled, compile_file, show_type
from .errors import MStreamError, ParseError, SupportOverflow, TypeCheckError
from .laws import axiom_suite, category_suite
from .stream import stream_run
from .trunc import check_causality, dist_to_json, obs_equiv, proc_semantics, step_marginals
from .values import show as show_value, to_json

RNG_NAME = "mt19937-randbelow/v1"

EXIT_OK, EXIT_PARSE, EXIT_TYPE, EXIT_OVERFLOW, EXIT_DIFFER, EXIT_LAWS, EXIT_USAGE = 0, 1, 2, 3, 4, 5, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _nonneg(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mstream", description="Run and compare stream programs.")
    p.add_argument("--support-cap", type=_nonneg, default=None,
                   help="maximum support size of exact distributions (default: $MSTREAM_SUPPORT_CAP or 1000000)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="parse and typecheck; print the type of every definition")
    c.add_argument("file")
    c.add_argument("--expand-wait", action="store_true", help="elaborate wait(x) as fbk y. [x, y]")

    r = sub.add_parser("run", help="sample-execute a stream, one record per step")
    r.add_argument("file")
    r.add_argument("name")
    r.add_argument("--steps", type=_nonneg, default=10, help="number of steps to run (default 10)")
    r.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    r.add_argument("--format", choices=["json", "csv"], default="json")

    d = sub.add_parser("dist", help="exact per-step marginals, or the joint history with --joint")
    d.add_argument("file")
    d.add_argument("name")
    d.add_argument("--steps", type=_nonneg, default=4, help="last step index (covers steps 0..N)")
    d.add_argument("--joint", action="store_true")
    d.add_argument("--format", choices=["json", "csv"], default="json")

    e = sub.add_parser("equiv", help="observational equivalence of two definitions")
    e.add_argument("file")
    e.add_argument("left")
    e.add_argument("right")
    e.add_argument("--depth", type=_nonneg, default=4)

    k = sub.add_parser("causality", help="check the marginalisation property of a definition")
    k.add_argument("file")
    k.add_argument("name")
    k.add_argument("--depth", type=_nonneg, default=5)

    lw = sub.add_parser("laws", help="run the feedback-axiom and category-law suites")
    lw.add_argument("--instances", type=_nonneg, default=100)
    lw.add_argument("--depth", type=_nonneg, default=4)
    lw.add_argument("--seed", type=int, default=0)
    lw.add_argument("--workers", type=_nonneg, default=1, help="worker processes (default 1)")
    return p


# ---------------------------------------------------------------------------
# output helpers


def _columns(c: Compiled, name: str) -> list[str]:
    n = len(c.stream(name).out_sched)
    return [name] if n == 1 else [f"{name}.{i}" for i in range(n)]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return show_value(v)


def _write_csv(rows, out) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    out.write(buf.getvalue())


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(", ", ": "))


PROGRAMS = Path(__file__).parent / "programs"


def resolve(path: str) -> Path:
    """The file itself if it exists, else a shipped program with the same name."""
    p = Path(path)
    if not p.exists() and (PROGRAMS / p.name).is_file():
        return PROGRAMS / p.name
    return p


def _load(path, **kw) -> Compiled:
    try:
        return compile_file(resolve(path), **kw)
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}", 0, 0) from None


def _stream(c: Compiled, name: str):
    if name not in c.names:
        raise UsageError(f"no definition named {name!r}; defined: {', '.join(c.names)}")
    return c.stream(name)


# ---------------------------------------------------------------------------
# commands


def cmd_check(args, out) -> int:
    c = _load(args.file, expand_wait=args.expand_wait)
    for name, ty in c.types().items():
        out.write(f"{name} : {show_type(ty)}\n")
    out.write(f"-- mode: {c.typed.mode}\n")
    return EXIT_OK


def cmd_run(args, out) -> int:
    c = _load(args.file)
    s = _stream(c, args.name)
    rows = stream_run(s, n=args.steps, rng=random.Random(args.seed))
    if args.format == "json":
        for t, y in enumerate(rows):
            out.write(_dumps({"t": t, "out": to_json(y)}) + "\n")
    else:
        _write_csv([["t", *_columns(c, args.name)]] + [[t, *map(_cell, y)] for t, y in enumerate(rows)], out)
    return EXIT_OK


def cmd_dist(args, out) -> int:
    c = _load(args.file)
    s = _stream(c, args.name)
    n = args.steps
    if args.joint:
        d = proc_semantics(s, n).only()
        if args.format == "json":
            joint = [{"history": to_json(h), "p": f"{p.numerator}/{p.denominator}"} for h, p in d.sorted_items()]
            out.write(_dumps({"steps": n, "joint": joint}) + "\n")
        else:
            cols = [f"{col}@{t}" for t in range(n + 1) for col in _columns(c, args.name)]
            rows = [[*cols, "p"]]
            for h, p in d.sorted_items():
                rows.append([_cell(v) for y in h for v in y] + [f"{p.numerator}/{p.denominator}"])
            _write_csv(rows, out)
        return EXIT_OK
    marginals = step_marginals(s, n)
    if args.format == "json":
        for t, d in enumerate(marginals):
            out.write(_dumps({"t": t, "dist": dist_to_json(d)}) + "\n")
    else:
        rows = [["t", *_columns(c, args.name), "p"]]
        for t, d in enumerate(marginals):
            for y, p in d.sorted_items():
                rows.append([t, *map(_cell, y), f"{p.numerator}/{p.denominator}"])
        _write_csv(rows, out)
    return EXIT_OK


def cmd_equiv(args, out) -> int:
    c = _load(args.file)
    left, right = _stream(c, args.left), _stream(c, args.right)
    report = obs_equiv(left, right, args.depth)
    out.write(_dumps({"streams": [args.left, args.right], **report.to_dict()}) + "\n")
    return EXIT_OK if report.equal else EXIT_DIFFER


def cmd_causality(args, out) -> int:
    c = _load(args.file)
    report = check_causality(_stream(c, args.name), args.depth)
    out.write(_dumps({"name": args.name, **report.to_dict()}) + "\n")
    return EXIT_OK if report.ok else EXIT_LAWS


def cmd_laws(args, out) -> int:
    ok = True
    for title, suite in (("feedback-axioms", axiom_suite), ("category-laws", category_suite)):
        report = suite(args.seed, args.instances, args.depth, workers=args.workers)
        out.write(_dumps({"suite": title, "seed": args.seed, **report.to_dict()}) + "\n")
        ok = ok and report.passed
    return EXIT_OK if ok else EXIT_LAWS


COMMANDS = {
    "check": cmd_check, "run": cmd_run, "dist": cmd_dist, "equiv": cmd_equiv,
    "causality": cmd_causality, "laws": cmd_laws,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    cap = args.support_cap if args.support_cap is not None else support_cap()
    try:
        with capped(cap):
            return COMMANDS[args.command](args, out)
    except ParseError as e:
        print(f"{args.file}:{e}" if e.line else f"error: {e}", file=err)
        return EXIT_PARSE
    except TypeCheckError as e:
        print(f"{args.file}:{e}", file=err)
        return EXIT_TYPE
    except SupportOverflow as e:
        print(f"error: {e}", file=err)
        return EXIT_OVERFLOW
    except UsageError as e:
        print(f"mstream: error: {e}", file=err)
        return EXIT_USAGE
    except MStreamError as e:
        print(f"error: {e}", file=err)
        return EXIT_TYPE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
