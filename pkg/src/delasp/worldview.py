"""World views, answer sets, P-classicality, projection and Mod(Gamma, P)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, Mapping, Optional

from . import _kernel as K
from .config import limits
from .errors import CapExceeded, LayerError
from .htcore import EpistemicModel
from .syntax import (
    Atom,
    Formula,
    Lit,
    Literal,
    Theory,
    atoms_of,
    conj,
    disj,
    expand_abbreviations,
    is_consistent,
)

log = logging.getLogger(__name__)


class Undefined:
    """Marker returned when Mod or an update is undefined."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNDEFINED"

    def __bool__(self):
        return False


UNDEFINED = Undefined()


def valuation_key(v: Iterable[Literal]) -> tuple:
    return tuple(sorted(v))


@dataclass(frozen=True)
class WorldView:
    """An information cell over literals; worlds are identified with valuations."""

    worlds: tuple

    def __post_init__(self):
        ws = {frozenset(v) for v in self.worlds}
        for v in ws:
            if not is_consistent(v):
                raise ValueError("world valuation is not literal-consistent")
        object.__setattr__(self, "worlds", tuple(sorted(ws, key=valuation_key)))

    def __len__(self):
        return len(self.worlds)

    def __iter__(self):
        return iter(self.worlds)

    def ids(self) -> dict:
        return {f"w{i + 1}": v for i, v in enumerate(self.worlds)}

    def decides(self, atoms: Iterable[Atom]) -> bool:
        atoms = list(atoms)
        return all(Literal(a) in v or Literal(a, True) in v for v in self.worlds for a in atoms)

    def restricted(self, atoms: Iterable[Atom]) -> "WorldView":
        keep = set(atoms)
        return WorldView(tuple(frozenset(l for l in v if l.atom in keep) for v in self.worlds))


# ---------------------------------------------------------------------------
# Shared preparation


def _raw(theory) -> list:
    if isinstance(theory, Theory):
        return list(theory.formulas)
    if isinstance(theory, Formula):
        return [theory]
    return list(theory)


def _prepare(theory, signature, cap_atoms):
    formulas = [expand_abbreviations(f) for f in _raw(theory)]
    atoms = set(atoms_of(formulas))
    if isinstance(theory, Theory):
        atoms |= theory.signature()
    atoms |= {a if isinstance(a, Atom) else Atom(a) for a in signature}
    cap = cap_atoms or limits().cap_atoms
    if len(atoms) > cap:
        raise CapExceeded(f"{len(atoms)} atoms exceed the cap of {cap}")
    sig = K.Signature(atoms)
    return K.Compiled(formulas, sig), sig


def answer_sets(theory, signature: Iterable = (), cap_atoms: Optional[int] = None) -> list:
    """Answer sets of a modality-free theory, as literal sets in canonical order."""
    comp, sig = _prepare(theory, signature, cap_atoms)
    if comp.beliefs:
        raise LayerError("answer_sets expects a theory without the belief modality")
    return sorted((sig.literals(m) for m in K.answer_sets(comp.nodes, sig)), key=valuation_key)


# ---------------------------------------------------------------------------
# World views


def _values_on(comp, cell):
    bt = K.belief_tvalues(comp, cell)
    return tuple(bt[i] for i in comp.maximal)


def _passes(comp, cell, rivals, strategy) -> bool:
    """Clause (a) for every world of the cell, clause (b) for every rival I."""
    for tau in cell:
        if not K.is_equilibrium(comp, cell, tau, strategy):
            return False
    for I in rivals:
        if K.is_equilibrium(comp, cell, I, strategy):
            return False
    return True


def world_views(
    theory,
    signature: Iterable = (),
    *,
    strategy: str = "bisimulation",
    cap_atoms: Optional[int] = None,
    subset_cap: Optional[int] = None,
) -> list:
    """All world views, in canonical order.

    For every guess of the maximal belief subformulas the answer sets of
    the guessed reduct are computed; candidate cells are the subsets of
    those answer sets whose belief values agree with the guess. Every
    world of a world view is such an answer set, so only the answer sets
    outside the candidate need to be refuted for clause (b).
    """
    comp, sig = _prepare(theory, signature, cap_atoms)
    cap = subset_cap or limits().subset_cap
    found = set()
    for guess in product((False, True), repeat=len(comp.maximal)):
        values = dict(zip(comp.maximal, guess))
        nodes = [K.substitute(n, values) for n in comp.nodes]
        sets = sorted(K.answer_sets(nodes, sig))
        if not sets:
            continue
        candidates = [tuple(sets)]
        if comp.maximal:
            if len(sets) <= cap:
                for r in range(len(sets) - 1, 0, -1):
                    candidates.extend(combinations(sets, r))
            else:
                log.warning("%d answer sets exceed subset_cap=%d; only the full set is tried", len(sets), cap)
        for cell in candidates:
            if _values_on(comp, cell) != guess:
                continue
            rivals = [I for I in sets if I not in cell]
            if _passes(comp, list(cell), rivals, strategy):
                found.add(frozenset(cell))
    views = [WorldView(tuple(sig.literals(m) for m in cell)) for cell in found]
    return sorted(views, key=lambda v: v.worlds)


def verify_world_view(theory, view, signature: Iterable = (), *, strategy: str = "bisimulation") -> bool:
    """Check the world-view definition with clause (b) over all consistent
    interpretations of the signature.

    Interpretations that falsify the theory under the cell's belief values
    cannot satisfy M + I, so only the classical models are tested, found by
    search instead of listing all 3^n candidates.
    """
    worlds = view.worlds if isinstance(view, WorldView) else list(view)
    extra = {l.atom for v in worlds for l in v}
    comp, sig = _prepare(theory, set(signature) | extra, None)
    cell = sorted({sig.mask(v) for v in worlds})
    if not cell:
        return False
    bt = K.belief_tvalues(comp, cell)
    nodes = [K.substitute(n, dict(enumerate(bt))) for n in comp.nodes]
    rivals = [I for I in K.total_models(nodes, sig, sig.full) if I not in cell]
    return _passes(comp, cell, rivals, strategy)


def world_views_oracle(theory, signature: Iterable = (), *, cap_atoms: int = 2, strategy: str = "bisimulation") -> list:
    """Reference enumeration: every nonempty set of interpretations is a
    candidate cell and is checked against the definition directly.

    Interpretations that falsify the theory under every truth assignment
    to its belief subformulas cannot be worlds and are pruned first.
    """
    comp, sig = _prepare(theory, signature, max(cap_atoms, 1))
    if len(sig) > 3:
        raise CapExceeded("the oracle is limited to 3 atoms")
    interps = sig.all_consistent()
    pool = []
    for I in interps:
        for guess in product((False, True), repeat=len(comp.beliefs)):
            if all(K.tval(n, I, guess) for n in comp.nodes):
                pool.append(I)
                break
    found = []
    for r in range(1, len(pool) + 1):
        for cell in combinations(pool, r):
            cell = list(cell)
            rivals = [I for I in interps if I not in cell]
            if _passes(comp, cell, rivals, strategy):
                found.append(WorldView(tuple(sig.literals(m) for m in cell)))
    return sorted(found, key=lambda v: v.worlds)


# ---------------------------------------------------------------------------
# Classicality, projection, Mod


def _atoms(atoms) -> list:
    return sorted(a if isinstance(a, Atom) else Atom(a) for a in atoms)


def is_p_classical(theory, atoms: Iterable, signature: Iterable = ()) -> bool:
    views = theory if _is_view_list(theory) else world_views(theory, signature)
    P = _atoms(atoms)
    return bool(views) and all(v.decides(P) for v in views)


def _is_view_list(x) -> bool:
    return isinstance(x, (list, tuple)) and all(isinstance(v, WorldView) for v in x)


def project(view: WorldView, atoms: Iterable, ids: Optional[list] = None) -> EpistemicModel:
    """The two-valued cell view|P: p holds at w iff p is in V(w)."""
    P = _atoms(atoms)
    if not view.decides(P):
        raise ValueError("world view does not decide every projected atom")
    ids = ids or [f"w{i + 1}" for i in range(len(view.worlds))]
    val = {w: frozenset(a for a in P if Literal(a) in v) for w, v in zip(ids, view.worlds)}
    return EpistemicModel(val, [ids] if ids else [], P)


@dataclass(frozen=True)
class ModResult:
    model: EpistemicModel
    provenance: Mapping = field(default_factory=dict)  # world id -> full literal valuation
    views: tuple = ()


def mod_of_views(views, atoms: Iterable, offset: int = 0):
    """Disjoint union of the projected world views, or UNDEFINED.

    World ``j`` of the ``i``-th view gets id ``c{offset+i}_w{j}``.
    """
    P = _atoms(atoms)
    if not views or not all(v.decides(P) for v in views):
        return UNDEFINED
    val, cells, prov = {}, [], {}
    for i, view in enumerate(views):
        ids = [f"c{offset + i}_w{j}" for j in range(len(view.worlds))]
        cell = project(view, P, ids)
        val.update(cell.valuation)
        prov.update(zip(ids, view.worlds))
        cells.append(ids)
    return ModResult(EpistemicModel(val, cells, P), prov, tuple(views))


def mod(theory, atoms: Iterable, signature: Iterable = ()):
    return mod_of_views(world_views(theory, signature), atoms)


def world_formula(cell: EpistemicModel, w: str) -> Formula:
    v = cell.valuation[w]
    return conj(Lit(Literal(a, a not in v)) for a in sorted(cell.atoms))


def characteristic_formula(cell: EpistemicModel) -> Formula:
    """Disjunction over worlds of the full signed conjunctions."""
    return disj(world_formula(cell, w) for w in cell.worlds)
