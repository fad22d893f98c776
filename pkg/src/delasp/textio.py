"""Text formats: formulas, .elp programs, .em models, .ev event models,
.plan plans, .task planning tasks, and DOT export."""

from __future__ import annotations

import os
import re
from pathlib import Path
from typing import Iterable, NamedTuple, Optional

from .errors import ParseError, SourceSpan
from .htcore import EpistemicModel, HTModel
from .plan import Action, IfK, Plan, PlanningTask, Seq, Skip
from .syntax import (
    BOT,
    And,
    Atom,
    Belief,
    ClassNeg,
    Falsum,
    Formula,
    Iff,
    Implies,
    Know,
    Lit,
    Literal,
    NamedRef,
    Not,
    Observed,
    Or,
    PointedEvent,
    Theory,
    TheoryObject,
    Top,
    Unknown,
    Update,
    UpdateDual,
    WholeEvent,
    atoms_of,
    check_del,
    conj,
    is_consistent,
    is_objective,
)
from .update import EventModel, UpdateResult
from .worldview import WorldView

CORPUS = Path(__file__).with_name("corpus")

# ---------------------------------------------------------------------------
# Tokens

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
   |(?P<box>\[[^\]\s]+\])
   |(?P<dia><(?!-)[^<>\s]+>)
   |(?P<op><->|<-|->|:-|:=|[&|~\-'(){},.;:])
   |(?P<ident>[A-Za-z_][A-Za-z0-9_]*)
   |(?P<num>[0-9]+)
    """,
    re.X,
)

_KEYWORDS = {"not", "bot", "top"}
_MODAL = {"K", "L", "O", "U"}


class Tok(NamedTuple):
    kind: str
    value: str
    line: int
    col: int


def _tokenize(text: str, file: Optional[str], line0: int = 1) -> list:
    toks = []
    pos, line, lstart = 0, line0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", SourceSpan(file, line, pos - lstart + 1))
        kind = m.lastgroup
        if kind != "ws":
            toks.append(Tok(kind, m.group(), line, pos - lstart + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            lstart = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - lstart + 1))
    return toks


def object_ref(name: str):
    """Parse the text between [ ] or < >."""
    if name.startswith("theory:"):
        parts = name[len("theory:"):].split("+")
        return TheoryObject(parts[0], tuple(parts[1:]))
    if name.startswith("event:"):
        rest = name[len("event:"):]
        if "@" in rest:
            em, e = rest.split("@", 1)
            return PointedEvent(em, e)
        return WholeEvent(rest)
    return NamedRef(name)


class _Parser:
    def __init__(self, text: str, file: Optional[str] = None, line0: int = 1):
        self.file = file
        self.toks = _tokenize(text, file, line0)
        self.i = 0
        self.prev_sites: list = []

    # -- helpers
    def peek(self, k: int = 0) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def span(self, t: Optional[Tok] = None) -> SourceSpan:
        t = t or self.peek()
        return SourceSpan(self.file, t.line, t.col)

    def error(self, msg: str, t: Optional[Tok] = None):
        raise ParseError(msg, self.span(t))

    def at(self, kind: str, value: Optional[str] = None, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind == kind and (value is None or t.value == value)

    def accept(self, kind: str, value: Optional[str] = None) -> Optional[Tok]:
        if self.at(kind, value):
            return self.next()
        return None

    def expect(self, kind: str, value: Optional[str] = None, what: Optional[str] = None) -> Tok:
        if self.at(kind, value):
            return self.next()
        t = self.peek()
        shown = t.value or "end of input"
        self.error(f"expected {what or value or kind}, found {shown!r}")

    def at_eof(self) -> bool:
        return self.at("eof")

    def name(self, what: str = "name") -> str:
        t = self.expect("ident", what=what)
        if not re.match(r"[a-z]", t.value) or t.value in _KEYWORDS:
            self.error(f"invalid {what} {t.value!r}", t)
        return t.value

    # -- formulas
    def formula(self) -> Formula:
        left = self.implication()
        while self.accept("op", "<->"):
            left = Iff(left, self.implication())
        return left

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.accept("op", "->"):
            return Implies(left, self.implication())
        if self.accept("op", "<-"):
            return Implies(self.disjunction(), left)
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.accept("op", "|"):
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.accept("op", "&"):
            left = And(left, self.unary())
        return left

    def _literal_start(self) -> bool:
        t = self.peek()
        if t.kind == "op" and t.value in ("-", "'"):
            return True
        return t.kind == "ident" and t.value not in _KEYWORDS and t.value not in _MODAL

    def literal(self) -> Literal:
        start = self.peek()
        negative = prev = False
        while self.at("op", "-") or self.at("op", "'"):
            t = self.next()
            if t.value == "-":
                if negative:
                    self.error("double strong negation is not allowed", t)
                negative = True
            else:
                if prev:
                    self.error("repeated previous-state marker", t)
                prev = True
        if self.at("op", "("):
            self.error("strong negation applies to atoms only")
        name = self.name("atom")
        a = Atom(name, prev)
        if prev:
            self.prev_sites.append((a, self.span(start)))
        return Literal(a, negative)

    def _modal_atom(self, op: str) -> Atom:
        paren = self.accept("op", "(")
        if not self._literal_start():
            self.error(f"{op} applies to an atom")
        l = self.literal()
        if l.negative:
            self.error(f"{op} applies to an atom, not a strongly negated literal")
        if paren and not self.accept("op", ")"):
            self.error(f"{op} applies to an atom")
        return l.atom

    def unary(self) -> Formula:
        t = self.peek()
        if t.kind == "ident":
            if t.value == "not":
                self.next()
                return Not(self.unary())
            if t.value in ("K", "L"):
                self.next()
                body = self.unary()
                return Know(body) if t.value == "K" else Belief(body)
            if t.value in ("O", "U"):
                self.next()
                a = self._modal_atom(t.value)
                return Observed(a) if t.value == "O" else Unknown(a)
        if t.kind == "op" and t.value == "~":
            self.next()
            return ClassNeg(self.unary())
        if t.kind == "box":
            self.next()
            return Update(object_ref(t.value[1:-1]), self.unary())
        if t.kind == "dia":
            self.next()
            return UpdateDual(object_ref(t.value[1:-1]), self.unary())
        return self.primary()

    def primary(self) -> Formula:
        if self.accept("op", "("):
            f = self.formula()
            self.expect("op", ")")
            return f
        if self.accept("ident", "bot"):
            return BOT
        if self.accept("ident", "top"):
            return Top()
        if self._literal_start():
            return Lit(self.literal())
        t = self.peek()
        self.error(f"expected a formula, found {t.value or 'end of input'!r}")

    def body(self) -> Formula:
        items = [self.formula()]
        while self.accept("op", ","):
            items.append(self.formula())
        return conj(items)


def parse_formula(text: str, file: Optional[str] = None) -> Formula:
    p = _Parser(text, file)
    f = p.formula()
    if not p.at_eof():
        p.error(f"unexpected {p.peek().value!r} after formula")
    return f


# ---------------------------------------------------------------------------
# Programs


def inertia_rules(fluent: str) -> list:
    f, pf = Atom(fluent), Atom(fluent, True)
    return [
        Implies(And(Lit(Literal(pf)), Not(Lit(Literal(f, True)))), Lit(Literal(f))),
        Implies(And(Lit(Literal(pf, True)), Not(Lit(Literal(f)))), Lit(Literal(f, True))),
    ]


_DECLS = ("fluent", "action", "inertial")


def parse_program(text: str, file: Optional[str] = None) -> Theory:
    p = _Parser(text, file)
    formulas, fluents, actions = [], [], []
    while not p.at_eof():
        t = p.peek()
        if t.kind == "ident" and t.value in _DECLS and p.at("ident", k=1):
            p.next()
            names = [p.name()]
            while not p.at("op", "."):
                p.accept("op", ",")
                names.append(p.name())
            p.expect("op", ".")
            if t.value == "action":
                actions.extend(names)
            else:
                fluents.extend(names)
            if t.value == "inertial":
                for n in names:
                    formulas.extend(inertia_rules(n))
            continue
        if t.kind == "num":
            p.error("cardinality bounds are not supported; only {a} choices are")
        if p.accept("op", "{"):
            l = p.literal()
            if not p.at("op", "}"):
                p.error("only singleton choices {a} are supported")
            p.next()
            if p.at("num"):
                p.error("cardinality bounds are not supported; only {a} choices are")
            head = Or(Lit(l), Not(Lit(l)))
            if p.accept("op", ":-"):
                formulas.append(Implies(p.body(), head))
            else:
                formulas.append(head)
            p.expect("op", ".", "'.'")
            continue
        if p.accept("op", ":-"):
            formulas.append(Implies(p.body(), BOT))
        else:
            head = p.formula()
            if p.accept("op", ":-"):
                formulas.append(Implies(p.body(), head))
            else:
                formulas.append(head)
        p.expect("op", ".", "'.'")
    acts = set(actions)
    for a, span in p.prev_sites:
        if a.name in acts:
            raise ParseError(f"previous-state marker on action atom {a.name!r}", span)
    return Theory(tuple(formulas), frozenset(fluents), frozenset(actions))


def _body_items(f: Formula) -> list:
    items = []
    while isinstance(f, And):
        items.append(f.right)
        f = f.left
    items.append(f)
    return items[::-1]


def format_program(theory: Theory) -> str:
    lines = []
    if theory.fluents:
        lines.append("fluent " + " ".join(sorted(theory.fluents)) + ".")
    if theory.actions:
        lines.append("action " + " ".join(sorted(theory.actions)) + ".")
    for f in theory.formulas:
        if isinstance(f, Implies):
            body = ", ".join(format_formula(b) for b in _body_items(f.left))
            if isinstance(f.right, Falsum):
                lines.append(f":- {body}.")
            else:
                lines.append(f"{format_formula(f.right)} :- {body}.")
        else:
            lines.append(format_formula(f) + ".")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Formula printing

_LEVEL = {Iff: 0, Implies: 1, Or: 2, And: 3}


def format_formula(f: Formula) -> str:
    return _fmt(f, 0)


def _fmt(f: Formula, ctx: int) -> str:
    if isinstance(f, Lit):
        return str(f.literal)
    if isinstance(f, Falsum):
        return "bot"
    if isinstance(f, Top):
        return "top"
    if isinstance(f, Not):
        return "not " + _fmt(f.body, 4)
    if isinstance(f, ClassNeg):
        return "~" + _fmt(f.body, 4)
    if isinstance(f, Know):
        return f"K({_fmt(f.body, 0)})"
    if isinstance(f, Belief):
        return f"L({_fmt(f.body, 0)})"
    if isinstance(f, Observed):
        return f"O({f.atom})"
    if isinstance(f, Unknown):
        return f"U({f.atom})"
    if isinstance(f, Update):
        return f"[{f.obj}] " + _fmt(f.body, 4)
    if isinstance(f, UpdateDual):
        return f"<{f.obj}> " + _fmt(f.body, 4)
    level = _LEVEL[type(f)]
    if isinstance(f, Iff):
        s = f"{_fmt(f.left, 0)} <-> {_fmt(f.right, 1)}"
    elif isinstance(f, Implies):
        s = f"{_fmt(f.left, 2)} -> {_fmt(f.right, 1)}"
    elif isinstance(f, Or):
        s = f"{_fmt(f.left, 2)} | {_fmt(f.right, 3)}"
    else:
        s = f"{_fmt(f.left, 3)} & {_fmt(f.right, 4)}"
    return f"({s})" if level < ctx else s


# ---------------------------------------------------------------------------
# Epistemic models (.em)

_WORLD_ID = r"[A-Za-z0-9_(),']+"
_WORLD = re.compile(rf"world\s+({_WORLD_ID})\s*:\s*(.*)\Z")
_REL = re.compile(rf"({_WORLD_ID})\s*->\s*({_WORLD_ID})\Z")


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0].strip()
        if line:
            yield no, line


def _literal_list(text: str, file, line: int, allow_prev: bool) -> list:
    out = []
    for tok in text.replace(",", " ").split():
        p = _Parser(tok, file, line)
        try:
            l = p.literal()
        except ParseError as e:
            raise ParseError(f"bad literal {tok!r}: {e.message}", SourceSpan(file, line, 1)) from None
        if not p.at_eof():
            raise ParseError(f"bad literal {tok!r}", SourceSpan(file, line, 1))
        if l.atom.prev and not allow_prev:
            raise ParseError(f"previous-state atom {tok!r} in a two-valued model", SourceSpan(file, line, 1))
        out.append(l)
    return out


def _parse_em(text: str, file: Optional[str]):
    kind = None
    atoms = None
    worlds: dict = {}
    cells: list = []
    rel: list = []
    in_rel = False
    for no, line in _lines(text):
        span = SourceSpan(file, no, 1)
        if kind is None:
            if line == "model":
                kind = "atoms"
            elif line == "model literals":
                kind = "literals"
            else:
                raise ParseError("expected header 'model' or 'model literals'", span)
            continue
        if in_rel:
            m = _REL.match(line)
            if not m:
                raise ParseError("expected 'w -> w'' in rel section", span)
            rel.append((m.group(1), m.group(2)))
            continue
        if line.startswith("atoms:"):
            names = line[len("atoms:"):].replace(",", " ").split()
            atoms = [Atom(n.lstrip("'"), n.startswith("'")) for n in names]
            continue
        if line == "rel":
            in_rel = True
            continue
        m = _WORLD.match(line)
        if m:
            w = m.group(1)
            if w in worlds:
                raise ParseError(f"duplicate world id {w!r}", span)
            lits = _literal_list(m.group(2), file, no, kind == "literals")
            if not is_consistent(lits):
                raise ParseError(f"inconsistent valuation for world {w!r}", span)
            worlds[w] = (lits, span)
            continue
        if line.startswith("cell"):
            ids = line[len("cell"):].split()
            if not ids:
                raise ParseError("empty cell", span)
            cells.append((ids, span))
            continue
        raise ParseError(f"cannot parse line {line!r}", span)
    if kind is None:
        raise ParseError("empty model file", SourceSpan(file, 1, 1))
    seen = {}
    for ids, span in cells:
        for w in ids:
            if w not in worlds:
                raise ParseError(f"cell mentions unknown world {w!r}", span)
            if w in seen:
                raise ParseError(f"world {w!r} is in two cells", span)
            seen[w] = True
    for w, (_, span) in worlds.items():
        if w not in seen:
            raise ParseError(f"world {w!r} is in no cell", span)
    return kind, atoms, worlds, [ids for ids, _ in cells], rel


def _two_valued(atoms, worlds, cells, file) -> EpistemicModel:
    sig = set(atoms) if atoms is not None else {l.atom for lits, _ in worlds.values() for l in lits}
    val = {}
    for w, (lits, span) in worlds.items():
        signed = {l.atom for l in lits}
        extra = signed - sig
        if extra:
            raise ParseError(f"world {w!r} signs undeclared atom {sorted(map(str, extra))[0]}", span)
        if signed != sig:
            missing = sorted(map(str, sig - signed))
            raise ParseError(f"atom {missing[0]} is unsigned in world {w!r}", span)
        val[w] = {l.atom for l in lits if not l.negative}
    return EpistemicModel(val, cells, sig)


def parse_model(text: str, file: Optional[str] = None) -> EpistemicModel:
    kind, atoms, worlds, cells, rel = _parse_em(text, file)
    if kind != "atoms":
        raise ParseError("expected a two-valued model (header 'model')", SourceSpan(file, 1, 1))
    if rel:
        raise ParseError("unexpected rel section; use parse_update_result", SourceSpan(file, 1, 1))
    return _two_valued(atoms, worlds, cells, file)


def parse_update_result(text: str, file: Optional[str] = None) -> UpdateResult:
    kind, atoms, worlds, cells, rel = _parse_em(text, file)
    if kind != "atoms":
        raise ParseError("expected a two-valued model (header 'model')", SourceSpan(file, 1, 1))
    return UpdateResult(_two_valued(atoms, worlds, cells, file), frozenset(rel))


def parse_world_views(text: str, file: Optional[str] = None) -> list:
    """A literal-valued .em file; each cell is one world view."""
    kind, atoms, worlds, cells, rel = _parse_em(text, file)
    if kind != "literals":
        raise ParseError("expected header 'model literals'", SourceSpan(file, 1, 1))
    return [WorldView(tuple(frozenset(worlds[w][0]) for w in ids)) for ids in cells]


def _signed(model: EpistemicModel, w: str) -> str:
    v = model.valuation[w]
    return " ".join(("" if a in v else "-") + str(a) for a in sorted(model.atoms))


def format_model(model: EpistemicModel, relation: Optional[Iterable] = None) -> str:
    lines = ["model"]
    lines.append("atoms: " + " ".join(str(a) for a in sorted(model.atoms)))
    for w in model.worlds:
        lines.append(f"world {w}: {_signed(model, w)}".rstrip())
    for c in model.cells:
        lines.append("cell " + " ".join(sorted(c)))
    if relation is not None:
        lines.append("rel")
        for x, y in sorted(relation):
            lines.append(f"{x} -> {y}")
    return "\n".join(lines) + "\n"


def format_update_result(res: UpdateResult) -> str:
    return format_model(res.model, res.relation)


def format_literals(v: Iterable[Literal]) -> str:
    return " ".join(str(l) for l in sorted(v))


def format_world_views(views: Iterable[WorldView]) -> str:
    lines = ["model literals"]
    for i, view in enumerate(views):
        ids = [f"v{i}_w{j}" for j in range(len(view.worlds))]
        for w, v in zip(ids, view.worlds):
            lines.append(f"world {w}: {format_literals(v)}".rstrip())
        lines.append("cell " + " ".join(ids))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Event models (.ev)

_EVENT = re.compile(r"event\s+([A-Za-z_][A-Za-z0-9_]*)\s+pre:\s*(.*?)(?:\s+post:\s*(.*))?\Z")


def _formula_at(text: str, file, line: int) -> Formula:
    p = _Parser(text, file, line)
    f = p.formula()
    if not p.at_eof():
        p.error(f"unexpected {p.peek().value!r} after formula")
    return f


def parse_event_model(text: str, file: Optional[str] = None) -> EventModel:
    atoms = None
    pre, post, edges, point, order = {}, {}, [], None, []
    for no, line in _lines(text):
        span = SourceSpan(file, no, 1)
        if line in ("events", "event model"):
            continue
        if line.startswith("atoms:"):
            atoms = [Atom(n) for n in line[len("atoms:"):].replace(",", " ").split()]
            continue
        m = _EVENT.match(line)
        if m:
            e = m.group(1)
            if e in pre:
                raise ParseError(f"duplicate event {e!r}", span)
            pre[e] = _formula_at(m.group(2), file, no)
            post[e] = {}
            if m.group(3):
                for item in m.group(3).split(","):
                    if ":=" not in item:
                        raise ParseError(f"expected 'atom := formula' in {item.strip()!r}", span)
                    lhs, rhs = item.split(":=", 1)
                    a = Atom(lhs.strip()) if re.fullmatch(r"\s*[a-z][A-Za-z0-9_]*\s*", lhs) else None
                    if a is None:
                        raise ParseError(f"bad assignment target {lhs.strip()!r}", span)
                    post[e][a] = _formula_at(rhs, file, no)
            order.append(e)
            continue
        parts = line.split()
        if parts[0] == "edge" and len(parts) == 3:
            edges.append((parts[1], parts[2], span))
            continue
        if parts[0] == "point" and len(parts) == 2:
            point = (parts[1], span)
            continue
        raise ParseError(f"cannot parse line {line!r}", span)
    for a, b, span in edges:
        for e in (a, b):
            if e not in pre:
                raise ParseError(f"edge mentions unknown event {e!r}", span)
    if point and point[0] not in pre:
        raise ParseError(f"unknown point event {point[0]!r}", point[1])
    mentioned = set()
    for e in order:
        check_del(pre[e])
        mentioned |= atoms_of(pre[e])
        mentioned |= set(post[e])
        for f in post[e].values():
            check_del(f)
            mentioned |= atoms_of(f)
    if atoms is not None:
        unknown = mentioned - set(atoms)
        if unknown:
            raise ParseError(f"undeclared atom {sorted(map(str, unknown))[0]}", SourceSpan(file, 1, 1))
    return EventModel(
        events=tuple(order),
        relation=frozenset((a, b) for a, b, _ in edges),
        pre=pre,
        post=post,
        atoms=frozenset(atoms) if atoms is not None else None,
        point=point[0] if point else None,
    )


def format_event_model(em: EventModel) -> str:
    lines = ["events"]
    if em.atoms is not None:
        lines.append("atoms: " + " ".join(str(a) for a in sorted(em.atoms)))
    for e in em.events:
        line = f"event {e} pre: {format_formula(em.pre[e])}"
        if em.post.get(e):
            line += " post: " + ", ".join(f"{a} := {format_formula(f)}" for a, f in sorted(em.post[e].items()))
        lines.append(line)
    for a, b in sorted(em.relation):
        if a < b:
            lines.append(f"edge {a} {b}")
    if em.point:
        lines.append(f"point {em.point}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Plans (.plan)

_PLAN_WORDS = {"if", "then", "else", "skip"}


def _plan_seq(p: _Parser) -> Plan:
    steps = [_plan_step(p)]
    while p.accept("op", ";"):
        steps.append(_plan_step(p))
    out = steps[-1]
    for s in reversed(steps[:-1]):
        out = Seq(s, out)
    return out


def _plan_step(p: _Parser) -> Plan:
    if p.accept("op", "("):
        inner = _plan_seq(p)
        p.expect("op", ")")
        return inner
    if p.accept("ident", "skip"):
        return Skip()
    if p.accept("ident", "if"):
        t = p.peek()
        if not p.accept("ident", "K"):
            p.error("expected K(...) after 'if'")
        cond = p.unary()
        if not is_objective(cond):
            p.error("plan condition must be objective", t)
        check_del(cond)
        p.expect("ident", "then", "'then'")
        then = _plan_step(p)
        other = _plan_step(p) if p.accept("ident", "else") else Skip()
        return IfK(cond, then, other)
    t = p.peek()
    name = p.name("action")
    if name in _PLAN_WORDS:
        p.error(f"unexpected {name!r}", t)
    return Action(name)


def parse_plan(text: str, file: Optional[str] = None) -> Plan:
    p = _Parser(text, file)
    plan = _plan_seq(p)
    if not p.at_eof():
        p.error(f"unexpected {p.peek().value!r} in plan")
    return plan


def format_plan(plan: Plan) -> str:
    if isinstance(plan, Seq):
        first = _plan_step_str(plan.first, seq_ok=False)
        return f"{first}; {format_plan(plan.second)}"
    return _plan_step_str(plan, seq_ok=True)


def _plan_step_str(plan: Plan, seq_ok: bool) -> str:
    if isinstance(plan, Action):
        return plan.name
    if isinstance(plan, Skip):
        return "skip"
    if isinstance(plan, Seq):
        s = format_plan(plan)
        return s if seq_ok else f"({s})"
    s = f"if K({format_formula(plan.cond)}) then {_branch(plan.then)}"
    if not isinstance(plan.orelse, Skip):
        s += f" else {_branch(plan.orelse)}"
    return s


def _branch(plan: Plan) -> str:
    if isinstance(plan, (Seq, IfK)):
        return f"({format_plan(plan)})"
    return _plan_step_str(plan, seq_ok=False)


# ---------------------------------------------------------------------------
# Planning tasks (.task)

_TASK_KEYS = ("name", "fluents", "actions", "init", "init-file", "theory", "goal")


def resolve(path: str, base: Optional[os.PathLike] = None) -> Path:
    """Resolve a data file: as given, relative to ``base``, then in the corpus."""
    p = Path(path)
    if p.is_absolute():
        return p
    for root in ([Path(base)] if base else []) + [Path.cwd(), CORPUS]:
        cand = root / p
        if cand.exists():
            return cand
    return (Path(base) / p) if base else p


def parse_task(text: str, file: Optional[str] = None, base_dir: Optional[os.PathLike] = None) -> PlanningTask:
    if base_dir is None and file:
        base_dir = Path(file).parent
    fields: dict = {}
    inits = []
    for no, line in _lines(text):
        span = SourceSpan(file, no, 1)
        key, sep, value = line.partition(":")
        key = key.strip()
        if not sep or key not in _TASK_KEYS:
            raise ParseError(f"cannot parse task line {line!r}", span)
        value = value.strip()
        if key == "init":
            inits.append((value, no))
        elif key in fields:
            raise ParseError(f"duplicate key {key!r}", span)
        else:
            fields[key] = (value, no)
    if "theory" not in fields or "goal" not in fields:
        raise ParseError("task needs 'theory:' and 'goal:'", SourceSpan(file, 1, 1))
    tpath = fields["theory"][0]
    tfile = resolve(tpath, base_dir)
    theory = parse_program(tfile.read_text(), str(tfile))
    init_formulas = [_formula_at(v, file, no) for v, no in inits]
    init_path = None
    if "init-file" in fields:
        init_path = fields["init-file"][0]
        ifile = resolve(init_path, base_dir)
        init_formulas.extend(parse_program(ifile.read_text(), str(ifile)).formulas)
    if not init_formulas:
        raise ParseError("task needs 'init:' or 'init-file:'", SourceSpan(file, 1, 1))
    fluents = fields["fluents"][0].replace(",", " ").split() if "fluents" in fields else sorted(theory.fluents)
    actions = fields["actions"][0].replace(",", " ").split() if "actions" in fields else sorted(theory.actions)
    goal = _formula_at(fields["goal"][0], file, fields["goal"][1])
    name = fields["name"][0] if "name" in fields else None
    try:
        return PlanningTask(
            initial=Theory(tuple(init_formulas), frozenset(fluents), frozenset()),
            theory=theory,
            goal=goal,
            fluents=tuple(fluents),
            actions=tuple(actions),
            theory_path=tpath,
            init_path=init_path,
            name=name,
        )
    except ValueError as e:
        raise ParseError(str(e), SourceSpan(file, 1, 1)) from None


def format_task(task: PlanningTask) -> str:
    lines = []
    if task.name:
        lines.append(f"name: {task.name}")
    lines.append("fluents: " + " ".join(task.fluents))
    lines.append("actions: " + " ".join(task.actions))
    if task.init_path:
        lines.append(f"init-file: {task.init_path}")
    else:
        for f in task.initial.formulas:
            lines.append(f"init: {format_formula(f)}")
    if not task.theory_path:
        raise ValueError("task has no theory path to serialize")
    lines.append(f"theory: {task.theory_path}")
    lines.append(f"goal: {format_formula(task.goal)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# DOT


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(model, name: str = "M") -> str:
    if isinstance(model, HTModel):
        lines = [f"digraph {name} {{"]
        for w in model.worlds:
            h = format_literals(model.vh[w])
            t = format_literals(model.vt[w])
            lines.append(f"  {_q(w)} [label={_q(f'{w}: h={{{h}}} t={{{t}}}')}];")
        for x, y in sorted(model.relation):
            lines.append(f"  {_q(x)} -> {_q(y)};")
        lines.append("}")
        return "\n".join(lines) + "\n"
    if isinstance(model, WorldView):
        ids = model.ids()
        lines = [f"graph {name} {{"]
        for w, v in ids.items():
            lines.append(f"  {_q(w)} [label={_q(f'{w}: {format_literals(v)}')}];")
        ws = list(ids)
        for i, x in enumerate(ws):
            for y in ws[i + 1:]:
                lines.append(f"  {_q(x)} -- {_q(y)};")
        lines.append("}")
        return "\n".join(lines) + "\n"
    lines = [f"graph {name} {{"]
    for w in model.worlds:
        lines.append(f"  {_q(w)} [label={_q(f'{w}: {_signed(model, w)}'.rstrip())}];")
    for c in model.cells:
        ws = sorted(c)
        for i, x in enumerate(ws):
            for y in ws[i + 1:]:
                lines.append(f"  {_q(x)} -- {_q(y)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# File helpers


def load_program(path, base=None) -> Theory:
    p = resolve(str(path), base)
    return parse_program(p.read_text(), str(p))


def load_model(path, base=None) -> EpistemicModel:
    p = resolve(str(path), base)
    return parse_model(p.read_text(), str(p))


def load_event_model(path, base=None) -> EventModel:
    p = resolve(str(path), base)
    return parse_event_model(p.read_text(), str(p))


def load_plan(path, base=None) -> Plan:
    p = resolve(str(path), base)
    return parse_plan(p.read_text(), str(p))


def load_task(path, base=None) -> PlanningTask:
    p = resolve(str(path), base)
    return parse_task(p.read_text(), str(p))
