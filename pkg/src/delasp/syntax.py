"""Atoms, literals, the shared formula AST and abbreviation rewriting.

One AST serves both layers. Theory members (the ASP layer) may use
default negation ``Not``, the belief modality ``Belief`` and the
abbreviations K/O/U; dynamic formulas (the DEL layer) use classical
negation ``ClassNeg``, ``Know`` and update modalities. ``check_asp`` and
``check_del`` reject nodes from the wrong layer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

from .errors import LayerError

_NAME = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


@dataclass(frozen=True, order=True)
class Atom:
    name: str
    prev: bool = False

    def __post_init__(self):
        if not _NAME.match(self.name):
            raise ValueError(f"invalid atom name {self.name!r}")

    def lifted(self) -> "Atom":
        if self.prev:
            raise ValueError(f"atom {self} is already a previous-state atom")
        return Atom(self.name, True)

    def erased(self) -> "Atom":
        return Atom(self.name, False)

    def __str__(self) -> str:
        return ("'" if self.prev else "") + self.name

    def __repr__(self) -> str:
        return f"Atom({self})"


@dataclass(frozen=True, order=True)
class Literal:
    atom: Atom
    negative: bool = False

    def complement(self) -> "Literal":
        return Literal(self.atom, not self.negative)

    def __str__(self) -> str:
        return ("-" if self.negative else "") + str(self.atom)

    def __repr__(self) -> str:
        return f"Literal({self})"


def lit(name: str, negative: bool = False, prev: bool = False) -> Literal:
    return Literal(Atom(name, prev), negative)


def is_consistent(literals: Iterable[Literal]) -> bool:
    seen = set(literals)
    return not any(l.complement() in seen for l in seen)


# ---------------------------------------------------------------------------
# Updating objects referenced by [o] and <o>


@dataclass(frozen=True, order=True)
class NamedRef:
    """A name resolved through the evaluation registry's bindings."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class TheoryObject:
    """A registered theory extended with the listed assertion atoms."""

    theory_id: str
    assertions: tuple = ()

    def __str__(self) -> str:
        return "theory:" + "+".join((self.theory_id,) + tuple(self.assertions))


@dataclass(frozen=True, order=True)
class PointedEvent:
    model_id: str
    event: str

    def __str__(self) -> str:
        return f"event:{self.model_id}@{self.event}"


@dataclass(frozen=True, order=True)
class WholeEvent:
    model_id: str

    def __str__(self) -> str:
        return f"event:{self.model_id}"


ObjectRef = Union[NamedRef, TheoryObject, PointedEvent, WholeEvent]


# ---------------------------------------------------------------------------
# Formula AST


class Formula:
    """Base class of all formula nodes."""

    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __str__(self) -> str:
        from .textio import format_formula

        return format_formula(self)


@dataclass(frozen=True)
class Falsum(Formula):
    pass


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Lit(Formula):
    literal: Literal


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Not(Formula):
    """Default negation; abbreviates ``body -> bot``."""

    body: Formula


@dataclass(frozen=True)
class ClassNeg(Formula):
    """Classical negation ~ of the DEL layer."""

    body: Formula


@dataclass(frozen=True)
class Belief(Formula):
    body: Formula


@dataclass(frozen=True)
class Know(Formula):
    body: Formula


@dataclass(frozen=True)
class Observed(Formula):
    atom: Atom


@dataclass(frozen=True)
class Unknown(Formula):
    atom: Atom


@dataclass(frozen=True)
class Update(Formula):
    obj: ObjectRef
    body: Formula


@dataclass(frozen=True)
class UpdateDual(Formula):
    obj: ObjectRef
    body: Formula


BOT = Falsum()
TOP = Top()

_BINARY = (And, Or, Implies, Iff)
_UNARY = (Not, ClassNeg, Belief, Know, Update, UpdateDual)


def atom(name: str, prev: bool = False) -> Lit:
    return Lit(Literal(Atom(name, prev)))


def neg(name: str, prev: bool = False) -> Lit:
    return Lit(Literal(Atom(name, prev), True))


def conj(items: Iterable[Formula]) -> Formula:
    """Left-folded conjunction; the empty conjunction is top."""
    out = None
    for f in items:
        out = f if out is None else And(out, f)
    return TOP if out is None else out


def disj(items: Iterable[Formula]) -> Formula:
    out = None
    for f in items:
        out = f if out is None else Or(out, f)
    return BOT if out is None else out


def children(f: Formula) -> tuple:
    if isinstance(f, _BINARY):
        return (f.left, f.right)
    if isinstance(f, _UNARY):
        return (f.body,)
    return ()


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def atoms_of(f: Union[Formula, Iterable[Formula]]) -> frozenset:
    if not isinstance(f, Formula):
        out = set()
        for g in f:
            out |= atoms_of(g)
        return frozenset(out)
    out = set()
    for g in walk(f):
        if isinstance(g, Lit):
            out.add(g.literal.atom)
        elif isinstance(g, (Observed, Unknown)):
            out.add(g.atom)
    return frozenset(out)


def objects_of(f: Formula) -> list:
    seen = []
    for g in walk(f):
        if isinstance(g, (Update, UpdateDual)) and g.obj not in seen:
            seen.append(g.obj)
    return seen


def is_objective(f: Formula) -> bool:
    return not any(isinstance(g, (Belief, Know, Update, UpdateDual)) for g in walk(f))


def is_subjective(f: Formula) -> bool:
    """At least one atom and every atom under some K or L."""

    def ok(g, guarded):
        if isinstance(g, Lit) or isinstance(g, (Observed, Unknown)):
            return guarded
        inner = guarded or isinstance(g, (Belief, Know))
        return all(ok(c, inner) for c in children(g))

    return bool(atoms_of(f)) and ok(f, False)


def check_asp(f: Formula) -> None:
    for g in walk(f):
        if isinstance(g, (ClassNeg, Update, UpdateDual)):
            raise LayerError(f"{type(g).__name__} is not allowed in a theory formula")


def check_del(f: Formula) -> None:
    for g in walk(f):
        if isinstance(g, (Not, Belief, Observed, Unknown)):
            raise LayerError(f"{type(g).__name__} is not allowed in a dynamic formula")


# ---------------------------------------------------------------------------
# Rewriting

_CORE = (Falsum, Lit, And, Or, Implies, Belief)


def _neg(f: Formula) -> Formula:
    return Implies(f, BOT)


def _expanded_unknown(a: Atom) -> Formula:
    return And(_neg(Lit(Literal(a))), _neg(Lit(Literal(a, True))))


def _notnot(f: Formula) -> Formula:
    return _neg(_neg(f))


def expand_abbreviations(f: Formula) -> Formula:
    """Rewrite an ASP-layer formula into Falsum/Lit/And/Or/Implies/Belief."""
    if isinstance(f, (Falsum, Lit)):
        return f
    if isinstance(f, Top):
        return Implies(BOT, BOT)
    if isinstance(f, (And, Or, Implies)):
        return type(f)(expand_abbreviations(f.left), expand_abbreviations(f.right))
    if isinstance(f, Iff):
        a, b = expand_abbreviations(f.left), expand_abbreviations(f.right)
        return And(Implies(a, b), Implies(b, a))
    if isinstance(f, Not):
        return _neg(expand_abbreviations(f.body))
    if isinstance(f, Belief):
        return Belief(expand_abbreviations(f.body))
    if isinstance(f, Know):
        body = expand_abbreviations(f.body)
        return And(body, Belief(body))
    if isinstance(f, Unknown):
        return _expanded_unknown(f.atom)
    if isinstance(f, Observed):
        p = Lit(Literal(f.atom))
        np_ = Lit(Literal(f.atom, True))
        u = _expanded_unknown(f.atom)
        return And(
            And(Implies(p, Belief(_notnot(p))), Implies(np_, Belief(_notnot(np_)))),
            Implies(u, Belief(_notnot(u))),
        )
    raise LayerError(f"{type(f).__name__} is not allowed in a theory formula")


def is_core(f: Formula) -> bool:
    return all(isinstance(g, _CORE) for g in walk(f))


def _map_atoms(f: Formula, fn) -> Formula:
    if isinstance(f, Lit):
        return Lit(Literal(fn(f.literal.atom), f.literal.negative))
    if isinstance(f, (Observed, Unknown)):
        return type(f)(fn(f.atom))
    if isinstance(f, _BINARY):
        return type(f)(_map_atoms(f.left, fn), _map_atoms(f.right, fn))
    if isinstance(f, (Update, UpdateDual)):
        return type(f)(f.obj, _map_atoms(f.body, fn))
    if isinstance(f, _UNARY):
        return type(f)(_map_atoms(f.body, fn))
    return f


def prev_lift(f: Formula) -> Formula:
    """Write the previous-state marker in front of every atom."""
    if not is_objective(f):
        raise LayerError("prev_lift expects an objective formula")
    if any(a.prev for a in atoms_of(f)):
        raise ValueError("formula already contains previous-state atoms")
    return _map_atoms(f, Atom.lifted)


def prev_erase(f: Formula) -> Formula:
    return _map_atoms(f, Atom.erased)


def subjective_subformulas(formulas: Union["Theory", Iterable[Formula]]) -> list:
    """Maximal Belief-rooted subformulas, deduplicated, in first-occurrence order."""
    if isinstance(formulas, Theory):
        formulas = formulas.formulas
    out: list = []
    seen = set()
    for f in formulas:
        stack = [f]
        while stack:
            g = stack.pop()
            if isinstance(g, Belief):
                if g not in seen:
                    seen.add(g)
                    out.append(g)
                continue
            stack.extend(reversed(children(g)))
    return out


# ---------------------------------------------------------------------------
# Theories


@dataclass(frozen=True)
class Theory:
    """An autoepistemic theory with its declared fluents and actions.

    Rules are kept as ``Implies(body, head)``; facts are kept as the head
    formula itself.
    """

    formulas: tuple = ()
    fluents: frozenset = field(default_factory=frozenset)
    actions: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "formulas", tuple(self.formulas))
        object.__setattr__(self, "fluents", frozenset(self.fluents))
        object.__setattr__(self, "actions", frozenset(self.actions))
        for f in self.formulas:
            check_asp(f)

    def atoms(self) -> frozenset:
        return atoms_of(self.formulas)

    def signature(self) -> frozenset:
        """All atoms of the formulas plus the declared fluents and actions."""
        sig = set(self.atoms())
        sig.update(Atom(n) for n in self.fluents | self.actions)
        return frozenset(sig)

    def extended(self, formulas: Iterable[Formula]) -> "Theory":
        return Theory(self.formulas + tuple(formulas), self.fluents, self.actions)

    def with_facts(self, *names: str) -> "Theory":
        return self.extended(atom(n) for n in names)

    def expanded(self) -> tuple:
        return tuple(expand_abbreviations(f) for f in self.formulas)

    def __iter__(self):
        return iter(self.formulas)

    def __len__(self):
        return len(self.formulas)
