"""Updating evaluations: ASP theory updates and event-model updates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, MutableMapping, Optional

from .htcore import EpistemicModel
from .syntax import Atom, Formula, Lit, Literal, Theory, check_del, atoms_of, prev_lift
from .worldview import UNDEFINED, characteristic_formula, mod_of_views, world_views


@dataclass(frozen=True)
class UpdateResult:
    model: EpistemicModel
    relation: frozenset = frozenset()

    def successors(self, w: str) -> list:
        return sorted(y for x, y in self.relation if x == w)


def _atoms(names) -> tuple:
    return tuple(sorted(a if isinstance(a, Atom) else Atom(a) for a in names))


# ---------------------------------------------------------------------------
# ASP updates

INCONSISTENT = "inconsistent"
NONCLASSICAL = "nonclassical"
OK = "ok"


def cell_views(cell: EpistemicModel, theory: Theory, fluents, cache: Optional[MutableMapping] = None):
    """World views of theory + prev-lifted characteristic formula of the cell.

    Returns ``(status, views)`` where status is OK, INCONSISTENT (no world
    view) or NONCLASSICAL (some world leaves an atom of F or 'F undecided).
    """
    F = _atoms(fluents)
    if not cell.atoms <= set(F):
        raise ValueError("cell atoms must be fluents of the update")
    key = None
    if cache is not None:
        key = (frozenset(cell.valuation.values()), cell.atoms, theory, F)
        if key in cache:
            return cache[key]
    phi = prev_lift(characteristic_formula(cell))
    views = world_views(theory.extended([phi]), set(F) | {a.lifted() for a in F})
    if not views:
        out = (INCONSISTENT, ())
    elif not all(v.decides(F + tuple(a.lifted() for a in F)) for v in views):
        out = (NONCLASSICAL, tuple(views))
    else:
        out = (OK, tuple(views))
    if cache is not None:
        cache[key] = out
    return out


def _relation(cell: EpistemicModel, provenance: Mapping) -> set:
    rel = set()
    for w2, lits in provenance.items():
        before = frozenset(l.atom.name for l in lits if l.atom.prev and not l.negative)
        for w in cell.worlds:
            if before == frozenset(a.name for a in cell.valuation[w]):
                rel.add((w, w2))
    return rel


def product_update_cell(cell: EpistemicModel, theory: Theory, fluents, cache=None):
    """Update of one information cell; UNDEFINED unless the lifted theory is
    consistent and classical on the fluents and their previous copies."""
    if not cell.is_cell():
        raise ValueError("product_update_cell expects an information cell")
    status, views = cell_views(cell, theory, fluents, cache)
    if status != OK:
        return UNDEFINED
    res = mod_of_views(list(views), _atoms(fluents))
    return UpdateResult(res.model, frozenset(_relation(cell, res.provenance)))


def asp_update(model: EpistemicModel, theory: Theory, fluents, cache=None):
    """Whole-model update: per-cell updates joined by disjoint union.

    A cell whose lifted theory has no world view contributes nothing (the
    action is not executable there). The update is UNDEFINED when some
    cell yields a non-classical result, or when no cell survives.
    """
    F = _atoms(fluents)
    cells = model.cell_models()
    if not cells:
        return UpdateResult(EpistemicModel({}, [], F), frozenset())
    val, out_cells, rel = {}, [], set()
    offset = 0
    for cell in cells:
        status, views = cell_views(cell, theory, F, cache)
        if status == NONCLASSICAL:
            return UNDEFINED
        if status == INCONSISTENT:
            continue
        res = mod_of_views(list(views), F, offset)
        offset += len(views)
        val.update(res.model.valuation)
        out_cells.extend(res.model.cells)
        rel |= _relation(cell, res.provenance)
    if not val:
        return UNDEFINED
    return UpdateResult(EpistemicModel(val, out_cells, F), frozenset(rel))


# ---------------------------------------------------------------------------
# Event models


@dataclass(frozen=True, eq=True)
class EventModel:
    """Events with preconditions and partial postconditions.

    The indistinguishability relation is closed to an equivalence on
    construction. Unlisted postconditions leave an atom unchanged.
    """

    events: tuple
    relation: frozenset
    pre: Mapping
    post: Mapping = field(default_factory=dict)
    atoms: Optional[frozenset] = None
    point: Optional[str] = None

    __hash__ = None

    def __post_init__(self):
        events = tuple(self.events)
        evs = set(events)
        if len(evs) != len(events):
            raise ValueError("duplicate event id")
        if set(self.pre) != evs:
            raise ValueError("every event needs exactly one precondition")
        post = {e: dict(self.post.get(e, {})) for e in events}
        for e, m in post.items():
            for a in m:
                if self.atoms is not None and a not in self.atoms:
                    raise ValueError(f"postcondition of {e} assigns undeclared atom {a}")
        for f in list(self.pre.values()) + [f for m in post.values() for f in m.values()]:
            check_del(f)
        parent = {e: e for e in events}

        def find(e):
            while parent[e] != e:
                parent[e] = parent[parent[e]]
                e = parent[e]
            return e

        for a, b in self.relation:
            if a not in evs or b not in evs:
                raise ValueError(f"edge ({a},{b}) mentions an unknown event")
            parent[find(a)] = find(b)
        classes: dict = {}
        for e in events:
            classes.setdefault(find(e), []).append(e)
        rel = frozenset((a, b) for c in classes.values() for a in c for b in c)
        if self.point is not None and self.point not in evs:
            raise ValueError(f"unknown point event {self.point!r}")
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "relation", rel)
        object.__setattr__(self, "pre", dict(self.pre))
        object.__setattr__(self, "post", post)
        if self.atoms is not None:
            object.__setattr__(self, "atoms", frozenset(self.atoms))

    def classes(self) -> list:
        seen, out = set(), []
        for e in self.events:
            if e in seen:
                continue
            c = sorted(b for a, b in self.relation if a == e)
            seen.update(c)
            out.append(c)
        return out

    def postcondition(self, e: str, a: Atom) -> Formula:
        return self.post[e].get(a, Lit(Literal(a)))

    def mentioned_atoms(self) -> frozenset:
        out = set()
        for e in self.events:
            out |= atoms_of(self.pre[e]) | set(self.post[e])
            for f in self.post[e].values():
                out |= atoms_of(f)
        return frozenset(out)


def _pair(w: str, e: str) -> str:
    return f"({w},{e})"


def event_product_update(model: EpistemicModel, em: EventModel, registry=None) -> EpistemicModel:
    from .delcheck import del_satisfies

    unknown = {a for e in em.events for a in em.post[e]} - set(model.atoms)
    if unknown:
        raise ValueError(f"postcondition assigns atom {sorted(map(str, unknown))[0]} outside the model")
    cls = {e: i for i, c in enumerate(em.classes()) for e in c}
    cell_index = {w: i for i, c in enumerate(model.cells) for w in c}
    val, groups = {}, {}
    for w in model.worlds:
        for e in em.events:
            if not del_satisfies(model, w, em.pre[e], registry):
                continue
            v = frozenset(a for a in model.atoms if del_satisfies(model, w, em.postcondition(e, a), registry))
            wid = _pair(w, e)
            val[wid] = v
            groups.setdefault((cell_index[w], cls[e]), []).append(wid)
    return EpistemicModel(val, list(groups.values()), model.atoms)


def event_update_eval(model: EpistemicModel, em: EventModel, point: str, registry=None) -> UpdateResult:
    if point not in em.pre:
        raise ValueError(f"unknown event {point!r}")
    out = event_product_update(model, em, registry)
    rel = {(w, _pair(w, point)) for w in model.worlds if _pair(w, point) in out.valuation}
    return UpdateResult(out, frozenset(rel))


def whole_event_update_eval(model: EpistemicModel, em: EventModel, registry=None) -> UpdateResult:
    """Non-pointed event model: every surviving (w, e) is a successor of w."""
    out = event_product_update(model, em, registry)
    rel = {(w, _pair(w, e)) for w in model.worlds for e in em.events if _pair(w, e) in out.valuation}
    return UpdateResult(out, frozenset(rel))
