"""Command-line interface.

Exit codes: 0 success or true, 1 false or not a solution, 2 usage or
parse error, 3 inconsistent theory, 4 undefined update or non-classical
initial state.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import os
import random
import sys
from typing import Optional, Sequence

from . import textio
from .delcheck import EvaluationRegistry, del_models, del_satisfies
from .errors import CapExceeded, DelAspError, NonClassicalInitialState, ParseError, UnboundObject
from .plan import is_solution, search
from .syntax import Atom
from .update import asp_update, event_update_eval, whole_event_update_eval
from .worldview import UNDEFINED, world_views

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_INCONSISTENT, EXIT_UNDEFINED = 0, 1, 2, 3, 4

log = logging.getLogger("delasp")


class UsageError(Exception):
    pass


@contextlib.contextmanager
def _caps(args):
    """Apply --cap-* flags as DELASP_* overrides for the duration of a command."""
    saved = dict(os.environ)
    try:
        for flag, var in (("cap_atoms", "DELASP_CAP_ATOMS"), ("cap_worlds", "DELASP_CAP_WORLDS")):
            value = getattr(args, flag, None)
            if value is not None:
                if value <= 0:
                    raise UsageError(f"--{flag.replace('_', '-')} must be positive")
                os.environ[var] = str(value)
        yield
    finally:
        os.environ.clear()
        os.environ.update(saved)


def _names(values) -> list:
    out = []
    for v in values or []:
        out.extend(x for x in v.replace(",", " ").split() if x)
    return out


# ---------------------------------------------------------------------------
# Commands


def cmd_worldviews(args) -> int:
    theory = textio.load_program(args.program)
    if args.assertion:
        theory = theory.with_facts(*_names(args.assertion))
    views = world_views(theory, [Atom(n) for n in _names(args.signature)])
    if not views:
        print("no world view")
        return EXIT_INCONSISTENT
    if args.format == "dot":
        for i, v in enumerate(views):
            sys.stdout.write(textio.export_dot(v, f"V{i}"))
    else:
        sys.stdout.write(textio.format_world_views(views))
    return EXIT_OK


def cmd_update(args) -> int:
    model = textio.load_model(args.model)
    if bool(args.theory) == bool(args.event):
        raise UsageError("give exactly one of --theory or --event")
    if args.theory:
        theory = textio.load_program(args.theory)
        if args.assertion:
            theory = theory.with_facts(*_names(args.assertion))
        fluents = _names(args.fluents) or sorted(theory.fluents) or sorted(a.name for a in model.atoms)
        res = asp_update(model, theory, fluents)
    else:
        em = textio.load_event_model(args.event)
        point = args.point or em.point
        res = event_update_eval(model, em, point) if point else whole_event_update_eval(model, em)
    if res is UNDEFINED:
        print("UNDEFINED")
        return EXIT_UNDEFINED
    if args.format == "dot":
        sys.stdout.write(textio.export_dot(res.model))
    else:
        sys.stdout.write(textio.format_update_result(res))
    return EXIT_OK


def parse_binding(spec: str, registry: EvaluationRegistry, base=None) -> None:
    """``name=theory:path+a+b``, ``name=event:path@e`` or ``name=event:path``."""
    name, sep, target = spec.partition("=")
    if not sep or not name:
        raise UsageError(f"binding {spec!r} is not of the form name=kind:path")
    kind, sep, rest = target.partition(":")
    if kind == "theory" and sep:
        path, *assertions = rest.split("+")
        registry.bind_theory(name, textio.load_program(path, base), assertions)
    elif kind == "event" and sep:
        path, _, point = rest.partition("@")
        em = textio.load_event_model(path, base)
        registry.bind_event(name, em, point or None)
    else:
        raise UsageError(f"binding {spec!r}: kind must be theory: or event:")


def cmd_check(args) -> int:
    model = textio.load_model(args.model)
    formula = textio.parse_formula(args.formula)
    reg = EvaluationRegistry()
    for spec in args.bind or []:
        parse_binding(spec, reg)
    reg.check_bound(formula)
    if args.world:
        ok = del_satisfies(model, args.world, formula, reg)
    else:
        ok = del_models(model, formula, reg)
    print("true" if ok else "false")
    return EXIT_OK if ok else EXIT_FALSE


def cmd_plan(args) -> int:
    task = textio.load_task(args.task)
    if args.plan_cmd == "verify":
        if textio.resolve(args.plan).is_file():
            plan = textio.load_plan(args.plan)
        else:
            plan = textio.parse_plan(args.plan)
        ok = is_solution(task, plan)
        print("SOLUTION" if ok else "NOT-A-SOLUTION")
        return EXIT_OK if ok else EXIT_FALSE
    pool = [textio.parse_formula(c) for c in args.cond] if args.cond else None
    plan = search(task, args.max_len, args.max_if, pool, strategy=args.strategy)
    if plan is None:
        print("NONE")
        return EXIT_FALSE
    print(textio.format_plan(plan))
    return EXIT_OK


def cmd_export_dot(args) -> int:
    path = textio.resolve(args.file)
    text = path.read_text()
    first = next((line for _, line in textio._lines(text)), "")
    if first == "model literals":
        for i, v in enumerate(textio.parse_world_views(text, str(path))):
            sys.stdout.write(textio.export_dot(v, f"V{i}"))
    else:
        res = textio.parse_update_result(text, str(path))
        sys.stdout.write(textio.export_dot(res.model))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    def globals_(suppress: bool) -> argparse.ArgumentParser:
        # subcommand copies must not reset flags given before the subcommand
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--seed", type=int, default=d(0), help="random seed (default 0)")
        g.add_argument("--cap-atoms", type=int, default=d(None), help="maximum atoms per theory")
        g.add_argument("--cap-worlds", type=int, default=d(None), help="maximum worlds per belief model")
        g.add_argument("--format", choices=("text", "dot"), default=d("text"))
        g.add_argument("-v", "--verbose", action="store_true", default=d(False))
        return g

    common = globals_(True)
    p = argparse.ArgumentParser(prog="delasp", description="DEL[ASP] reasoning tools", parents=[globals_(False)])
    sub = p.add_subparsers(dest="command", required=True)

    w = sub.add_parser("worldviews", parents=[common], help="list the world views of a program")
    w.add_argument("program")
    w.add_argument("--signature", action="append", help="extra atoms of the signature")
    w.add_argument("--assert", dest="assertion", action="append", help="add atoms as facts")
    w.set_defaults(func=cmd_worldviews)

    u = sub.add_parser("update", parents=[common], help="update a model by a theory or an event model")
    u.add_argument("--model", required=True)
    u.add_argument("--theory")
    u.add_argument("--assert", dest="assertion", action="append")
    u.add_argument("--fluents", action="append")
    u.add_argument("--event")
    u.add_argument("--point", help="event to point at (default: the file's point, else all)")
    u.set_defaults(func=cmd_update)

    c = sub.add_parser("check", parents=[common], help="model-check a dynamic formula")
    c.add_argument("--model", required=True)
    c.add_argument("--formula", required=True)
    c.add_argument("--bind", action="append", metavar="NAME=KIND:PATH")
    c.add_argument("--world", help="check at one world instead of the whole model")
    c.set_defaults(func=cmd_check)

    pl = sub.add_parser("plan", parents=[common], help="verify or search plans")
    psub = pl.add_subparsers(dest="plan_cmd", required=True)
    pv = psub.add_parser("verify", parents=[common])
    pv.add_argument("--task", required=True)
    pv.add_argument("--plan", required=True, help=".plan file or plan text")
    pv.set_defaults(func=cmd_plan)
    ps = psub.add_parser("search", parents=[common])
    ps.add_argument("--task", required=True)
    ps.add_argument("--max-len", type=int, default=4)
    ps.add_argument("--max-if", type=int, default=0)
    ps.add_argument("--cond", action="append", help="condition formula for the pool (repeatable)")
    ps.add_argument("--strategy", choices=("dp", "enumerate"), default="dp")
    ps.set_defaults(func=cmd_plan)

    d = sub.add_parser("export-dot", parents=[common], help="render a .em file as DOT")
    d.add_argument("file")
    d.set_defaults(func=cmd_export_dot)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    random.seed(args.seed)
    try:
        with _caps(args):
            return args.func(args)
    except NonClassicalInitialState as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_UNDEFINED
    except (ParseError, UnboundObject, UsageError, CapExceeded, FileNotFoundError, DelAspError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
