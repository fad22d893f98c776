"""Epistemic models, here-and-there models, bisimulation and equilibrium."""

from __future__ import annotations

from typing import Iterable, Mapping, Optional

from . import _kernel as K
from .config import limits
from .errors import CapExceeded, LayerError
from .syntax import (
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
    Not,
    Observed,
    Or,
    Theory,
    Top,
    Unknown,
    Update,
    UpdateDual,
    atoms_of,
    expand_abbreviations,
    is_consistent,
)


def _as_atom(a) -> Atom:
    return a if isinstance(a, Atom) else Atom(a)


class EpistemicModel:
    """Worlds partitioned into cells, with two-valued valuations over ``atoms``."""

    __slots__ = ("atoms", "valuation", "cells", "_cell_of", "_fp")

    def __init__(self, valuation: Mapping, cells: Iterable[Iterable[str]], atoms: Optional[Iterable] = None):
        val = {str(w): frozenset(_as_atom(a) for a in v) for w, v in valuation.items()}
        used = frozenset().union(*val.values()) if val else frozenset()
        sig = frozenset(_as_atom(a) for a in atoms) if atoms is not None else used
        if not used <= sig:
            raise ValueError(f"valuation uses atoms outside the signature: {sorted(map(str, used - sig))}")
        cell_list = [frozenset(c) for c in cells]
        cell_of = {}
        for c in cell_list:
            if not c:
                raise ValueError("empty cell")
            for w in c:
                if w not in val:
                    raise ValueError(f"cell mentions unknown world {w!r}")
                if w in cell_of:
                    raise ValueError(f"world {w!r} is in two cells")
                cell_of[w] = c
        missing = set(val) - set(cell_of)
        if missing:
            raise ValueError(f"worlds in no cell: {sorted(missing)}")
        self.atoms = sig
        self.valuation = val
        self.cells = tuple(sorted(cell_list, key=lambda c: min(c)))
        self._cell_of = cell_of
        self._fp = None

    @property
    def worlds(self) -> tuple:
        return tuple(sorted(self.valuation))

    def cell_of(self, w: str) -> frozenset:
        return self._cell_of[w]

    def is_cell(self) -> bool:
        return len(self.cells) == 1

    def cell_models(self) -> list:
        """cell(M): one information cell per cell, in canonical order."""
        return [self.restrict(c) for c in self.cells]

    def restrict(self, worlds: Iterable[str]) -> "EpistemicModel":
        keep = set(worlds)
        return EpistemicModel(
            {w: self.valuation[w] for w in keep},
            [c & keep for c in self.cells if c & keep],
            self.atoms,
        )

    def fingerprint(self) -> tuple:
        if self._fp is None:
            self._fp = (
                tuple(sorted(self.atoms)),
                tuple((w, tuple(sorted(self.valuation[w]))) for w in self.worlds),
                tuple(tuple(sorted(c)) for c in self.cells),
            )
        return self._fp

    def to_ht(self) -> "HTModel":
        lits = {w: frozenset(Literal(a) for a in v) for w, v in self.valuation.items()}
        rel = {(x, y) for c in self.cells for x in c for y in c}
        return HTModel(self.valuation.keys(), rel, lits, lits)

    def __eq__(self, other):
        return isinstance(other, EpistemicModel) and self.fingerprint() == other.fingerprint()

    def __hash__(self):
        return hash(self.fingerprint())

    def __repr__(self):
        parts = ", ".join(
            f"{w}:{{{','.join(sorted(map(str, self.valuation[w])))}}}" for w in self.worlds
        )
        return f"EpistemicModel({parts}; cells={[sorted(c) for c in self.cells]})"


class HTModel:
    __slots__ = ("worlds", "relation", "vh", "vt", "_succ")

    def __init__(self, worlds, relation, vh: Mapping, vt: Mapping):
        self.worlds = tuple(sorted(worlds))
        ws = set(self.worlds)
        self.relation = frozenset((x, y) for x, y in relation)
        for x, y in self.relation:
            if x not in ws or y not in ws:
                raise ValueError(f"relation pair ({x},{y}) mentions an unknown world")
        self.vh = {w: frozenset(vh[w]) for w in self.worlds}
        self.vt = {w: frozenset(vt[w]) for w in self.worlds}
        for w in self.worlds:
            if not self.vh[w] <= self.vt[w]:
                raise ValueError(f"Vh({w}) is not a subset of Vt({w})")
            if not is_consistent(self.vt[w]):
                raise ValueError(f"inconsistent valuation at {w}")
        succ = {w: [] for w in self.worlds}
        for x, y in sorted(self.relation):
            succ[x].append(y)
        self._succ = succ

    def successors(self, w: str) -> list:
        return self._succ[w]

    def is_total(self) -> bool:
        return all(self.vh[w] == self.vt[w] for w in self.worlds)

    def total(self) -> "HTModel":
        """The model M^t with both valuations equal to Vt."""
        return HTModel(self.worlds, self.relation, self.vt, self.vt)

    def atoms(self) -> frozenset:
        return frozenset(l.atom for v in self.vt.values() for l in v)

    def __eq__(self, other):
        return (
            isinstance(other, HTModel)
            and self.worlds == other.worlds
            and self.relation == other.relation
            and self.vh == other.vh
            and self.vt == other.vt
        )

    def __hash__(self):
        return hash((self.worlds, self.relation))

    def __repr__(self):
        return f"HTModel(worlds={self.worlds}, |R|={len(self.relation)})"


class BeliefHTModel(HTModel):
    """An HT-model where every world sees exactly the non-distinguished worlds."""

    __slots__ = ("distinguished",)

    def __init__(self, worlds, vh: Mapping, vt: Mapping, distinguished: str):
        worlds = tuple(worlds)
        if distinguished not in worlds:
            raise ValueError("distinguished world not in the model")
        rel = {(x, y) for x in worlds for y in worlds if y != distinguished}
        super().__init__(worlds, rel, vh, vt)
        self.distinguished = distinguished

    @classmethod
    def from_base(cls, base: HTModel, distinguished: str) -> "BeliefHTModel":
        m = cls(base.worlds, base.vh, base.vt, distinguished)
        if m.relation != base.relation:
            raise ValueError("relation is not W x (W minus w0)")
        return m

    @property
    def base(self) -> HTModel:
        return HTModel(self.worlds, self.relation, self.vh, self.vt)

    def cell_worlds(self) -> list:
        return [w for w in self.worlds if w != self.distinguished]


# ---------------------------------------------------------------------------
# Satisfaction


def ht_satisfies(m: HTModel, w: str, f: Formula) -> bool:
    """``m, w |= f`` in here-and-there (h-level)."""
    return _sat(m, w, f, False)


def _sat(m: HTModel, w: str, f: Formula, there: bool) -> bool:
    if isinstance(f, Lit):
        return f.literal in (m.vt[w] if there else m.vh[w])
    if isinstance(f, Falsum):
        return False
    if isinstance(f, And):
        return _sat(m, w, f.left, there) and _sat(m, w, f.right, there)
    if isinstance(f, Or):
        return _sat(m, w, f.left, there) or _sat(m, w, f.right, there)
    if isinstance(f, Implies):
        here_ok = (not _sat(m, w, f.left, there)) or _sat(m, w, f.right, there)
        if there:
            return here_ok
        return here_ok and ((not _sat(m, w, f.left, True)) or _sat(m, w, f.right, True))
    if isinstance(f, Belief):
        return all(_sat(m, v, f.body, there) for v in m.successors(w))
    if isinstance(f, (Top, Not, Know, Observed, Unknown, Iff)):
        return _sat(m, w, expand_abbreviations(f), there)
    if isinstance(f, (ClassNeg, Update, UpdateDual)):
        raise LayerError(f"{type(f).__name__} cannot be evaluated in an HT-model")
    raise TypeError(f"unknown formula node {f!r}")


def ht_models(m: HTModel, formulas: Iterable[Formula]) -> bool:
    fs = list(formulas)
    return all(ht_satisfies(m, w, f) for w in m.worlds for f in fs)


# ---------------------------------------------------------------------------
# Belief worlds and bisimulation


def _fresh(base: str, taken) -> str:
    name = base
    while name in taken:
        name += "'"
    return name


def attach_belief_world(cell, I: Iterable[Literal], name: str = "w0") -> BeliefHTModel:
    """M + I: add a world valued I that sees every world of the cell.

    ``cell`` is a world view, a mapping world -> literal set, or a
    single-cell EpistemicModel (atoms become positive literals).
    """
    I = frozenset(I)
    if not is_consistent(I):
        raise ValueError("inconsistent interpretation")
    if isinstance(cell, EpistemicModel):
        if not cell.is_cell():
            raise ValueError("expected an information cell")
        val = {w: frozenset(Literal(a) for a in v) for w, v in cell.valuation.items()}
    elif isinstance(cell, Mapping):
        val = {w: frozenset(v) for w, v in cell.items()}
    else:
        val = {f"w{i + 1}": frozenset(v) for i, v in enumerate(getattr(cell, "worlds", cell))}
    w0 = _fresh(name, val)
    val[w0] = I
    return BeliefHTModel(val.keys(), val, val, w0)


def _largest_bisim(m1: HTModel, m2: HTModel, exact_h: bool) -> set:
    z = {
        (x, y)
        for x in m1.worlds
        for y in m2.worlds
        if m1.vt[x] == m2.vt[y] and (m1.vh[x] == m2.vh[y] if exact_h else m1.vh[x] <= m2.vh[y])
    }
    changed = True
    while changed:
        changed = False
        for x, y in list(z):
            s1, s2 = m1.successors(x), m2.successors(y)
            forth = all(any((x2, y2) in z for y2 in s2) for x2 in s1)
            back = forth and all(any((x2, y2) in z for x2 in s1) for y2 in s2)
            if not back:
                z.discard((x, y))
                changed = True
    return z


def _is_total_relation(z, m1, m2) -> bool:
    return {x for x, _ in z} == set(m1.worlds) and {y for _, y in z} == set(m2.worlds)


def _check_cap(*models, cap=None):
    cap = cap or limits().cap_preceq
    for m in models:
        if len(m.worlds) > cap:
            raise CapExceeded(f"model has {len(m.worlds)} worlds, cap is {cap}")


def preceq(m1: HTModel, m2: HTModel, cap: Optional[int] = None) -> bool:
    """m1 is below m2: a total Z with equal Vt, Vh(m1) within Vh(m2), forth and back.

    The largest relation meeting the local conditions is computed as a
    greatest fixpoint; a witness exists iff that relation is total.
    """
    _check_cap(m1, m2, cap=cap)
    return _is_total_relation(_largest_bisim(m1, m2, False), m1, m2)


def approx(m1: HTModel, m2: HTModel, cap: Optional[int] = None) -> bool:
    _check_cap(m1, m2, cap=cap)
    return _is_total_relation(_largest_bisim(m1, m2, True), m1, m2)


def strictly_less(m1: HTModel, m2: HTModel, cap: Optional[int] = None) -> bool:
    return preceq(m1, m2, cap) and not approx(m1, m2, cap)


def bisimilar(a: EpistemicModel, b: EpistemicModel) -> bool:
    """Bisimilarity of two-valued epistemic models (valuations over atoms)."""
    ha, hb = a.to_ht(), b.to_ht()
    if not a.worlds and not b.worlds:
        return True
    return approx(ha, hb, cap=max(len(ha.worlds), len(hb.worlds), 1))


# ---------------------------------------------------------------------------
# Equilibrium


def _expanded(theory) -> list:
    formulas = theory.formulas if isinstance(theory, Theory) else list(theory)
    return [expand_abbreviations(f) for f in formulas]


def is_equilibrium(m: BeliefHTModel, theory, strategy: str = "bisimulation") -> bool:
    """Is the total belief model ``m`` an equilibrium model of the theory?

    ``strategy="bisimulation"`` decides the definition exactly: smaller
    models may use any worlds bisimilar at the t-level. ``"same-domain"``
    only considers h-reductions of m's own worlds.
    """
    if not m.is_total():
        raise ValueError("is_equilibrium expects a total belief model")
    lim = limits()
    if len(m.worlds) > lim.cap_worlds:
        raise CapExceeded(f"belief model has {len(m.worlds)} worlds, cap is {lim.cap_worlds}")
    formulas = _expanded(theory)
    sig = K.Signature(atoms_of(formulas) | m.atoms())
    if len(sig) > lim.cap_atoms:
        raise CapExceeded(f"{len(sig)} atoms, cap is {lim.cap_atoms}")
    comp = K.Compiled(formulas, sig)
    cell = [sig.mask(m.vt[w]) for w in m.cell_worlds()]
    return K.is_equilibrium(comp, cell, sig.mask(m.vt[m.distinguished]), strategy)
