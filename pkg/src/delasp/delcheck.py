"""Model checking of dynamic epistemic formulas."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import LayerError, UnboundObject
from .htcore import EpistemicModel
from .syntax import (
    And,
    Atom,
    ClassNeg,
    Falsum,
    Formula,
    Iff,
    Implies,
    Know,
    Lit,
    NamedRef,
    Or,
    PointedEvent,
    Theory,
    TheoryObject,
    Top,
    Update,
    UpdateDual,
    WholeEvent,
)
from .update import (
    EventModel,
    asp_update,
    event_update_eval,
    whole_event_update_eval,
)
from .worldview import UNDEFINED


@dataclass(frozen=True)
class TheoryBinding:
    theory: Theory
    assertions: tuple = ()
    fluents: Optional[tuple] = None  # defaults to the theory's declared fluents

    def update_theory(self) -> Theory:
        return self.theory.with_facts(*self.assertions)

    def fluent_atoms(self) -> tuple:
        names = self.fluents if self.fluents is not None else sorted(self.theory.fluents)
        return tuple(sorted(a if isinstance(a, Atom) else Atom(a) for a in names))


@dataclass(frozen=True)
class EventBinding:
    model: EventModel
    point: Optional[str] = None  # None: the whole (non-pointed) event model

    __hash__ = None


class EvaluationRegistry:
    """Resolves object references and memoises their updating evaluations."""

    def __init__(self, memoize: bool = True):
        self.bindings: dict = {}
        self.theories: dict = {}
        self.event_models: dict = {}
        self.memoize = memoize
        self._memo: dict = {}
        self._cells: dict = {}
        self._lock = threading.Lock()

    # -- registration
    def bind_theory(self, name: str, theory: Theory, assertions: Iterable[str] = (), fluents=None):
        self.bindings[name] = TheoryBinding(theory, tuple(assertions), tuple(fluents) if fluents is not None else None)
        return self

    def bind_event(self, name: str, model: EventModel, point: Optional[str] = None):
        if point is not None and point not in model.events:
            raise ValueError(f"unknown event {point!r}")
        self.bindings[name] = EventBinding(model, point)
        return self

    def add_theory(self, theory_id: str, theory: Theory, fluents=None):
        self.theories[theory_id] = (theory, tuple(fluents) if fluents is not None else None)
        return self

    def add_event_model(self, model_id: str, model: EventModel):
        self.event_models[model_id] = model
        return self

    # -- resolution
    def resolve(self, ref):
        if isinstance(ref, NamedRef):
            if ref.name not in self.bindings:
                raise UnboundObject(f"unbound object {ref.name!r}")
            return self.bindings[ref.name]
        if isinstance(ref, TheoryObject):
            if ref.theory_id not in self.theories:
                raise UnboundObject(f"unknown theory {ref.theory_id!r}")
            theory, fluents = self.theories[ref.theory_id]
            return TheoryBinding(theory, tuple(ref.assertions), fluents)
        if isinstance(ref, (PointedEvent, WholeEvent)):
            if ref.model_id not in self.event_models:
                raise UnboundObject(f"unknown event model {ref.model_id!r}")
            em = self.event_models[ref.model_id]
            point = ref.event if isinstance(ref, PointedEvent) else None
            if point is not None and point not in em.events:
                raise UnboundObject(f"unknown event {point!r} in {ref.model_id!r}")
            return EventBinding(em, point)
        raise TypeError(f"not an object reference: {ref!r}")

    def check_bound(self, f: Formula) -> None:
        from .syntax import objects_of

        for ref in objects_of(f):
            self.resolve(ref)

    def evaluate(self, model: EpistemicModel, ref):
        """The updating evaluation of ``ref`` on ``model`` (or UNDEFINED)."""
        key = (model.fingerprint(), ref)
        if self.memoize:
            hit = self._memo.get(key)
            if hit is not None:
                return hit
        result = self.compute(model, ref)
        if self.memoize:
            with self._lock:
                self._memo.setdefault(key, result)
        return result

    def compute(self, model: EpistemicModel, ref):
        b = self.resolve(ref)
        if isinstance(b, TheoryBinding):
            cache = self._cells if self.memoize else None
            return asp_update(model, b.update_theory(), b.fluent_atoms(), cache)
        if b.point is None:
            return whole_event_update_eval(model, b.model, self)
        return event_update_eval(model, b.model, b.point, self)

    def clear(self):
        with self._lock:
            self._memo.clear()
            self._cells.clear()


def del_satisfies(model: EpistemicModel, w: str, f: Formula, registry: Optional[EvaluationRegistry] = None) -> bool:
    if w not in model.valuation:
        raise KeyError(f"unknown world {w!r}")
    return _sat(model, w, f, registry)


def _sat(m: EpistemicModel, w: str, f: Formula, reg) -> bool:
    if isinstance(f, Lit):
        a = f.literal.atom
        if a not in m.atoms:
            raise ValueError(f"atom {a} is not in the model's signature")
        holds = a in m.valuation[w]
        return not holds if f.literal.negative else holds
    if isinstance(f, And):
        return _sat(m, w, f.left, reg) and _sat(m, w, f.right, reg)
    if isinstance(f, Or):
        return _sat(m, w, f.left, reg) or _sat(m, w, f.right, reg)
    if isinstance(f, Implies):
        return (not _sat(m, w, f.left, reg)) or _sat(m, w, f.right, reg)
    if isinstance(f, Iff):
        return _sat(m, w, f.left, reg) == _sat(m, w, f.right, reg)
    if isinstance(f, ClassNeg):
        return not _sat(m, w, f.body, reg)
    if isinstance(f, Falsum):
        return False
    if isinstance(f, Top):
        return True
    if isinstance(f, Know):
        return all(_sat(m, v, f.body, reg) for v in sorted(m.cell_of(w)))
    if isinstance(f, Update):
        if reg is None:
            raise UnboundObject(f"no registry to resolve {f.obj}")
        res = reg.evaluate(m, f.obj)
        if res is UNDEFINED:
            return False
        return all(_sat(res.model, v, f.body, reg) for v in res.successors(w))
    if isinstance(f, UpdateDual):
        return not _sat(m, w, Update(f.obj, ClassNeg(f.body)), reg)
    raise LayerError(f"{type(f).__name__} is not allowed in a dynamic formula")


def del_models(model: EpistemicModel, f: Formula, registry: Optional[EvaluationRegistry] = None) -> bool:
    return all(del_satisfies(model, w, f, registry) for w in model.worlds)


def entails_over(models: Iterable[EpistemicModel], f: Formula, registry: Optional[EvaluationRegistry] = None) -> bool:
    return all(del_models(m, f, registry) for m in models)


def truth_set(model: EpistemicModel, f: Formula, registry=None) -> frozenset:
    return frozenset(w for w in model.worlds if del_satisfies(model, w, f, registry))
