import pytest
from hypothesis import given, settings, strategies as st

from delasp import textio
from delasp.errors import CapExceeded, LayerError
from delasp.htcore import (
    BeliefHTModel,
    EpistemicModel,
    HTModel,
    approx,
    attach_belief_world,
    bisimilar,
    ht_satisfies,
    is_equilibrium,
    preceq,
    strictly_less,
)
from delasp.htcore import _sat
from delasp.syntax import (
    And,
    Belief,
    ClassNeg,
    Implies,
    Know,
    Literal,
    Not,
    Observed,
    Or,
    Unknown,
    atom,
    neg,
)
from delasp.worldview import world_views

import oracles
from generators import ATOMS, Chooser, asp_formula, asp_theory, ht_model, valuation3

P, Q = ATOMS[0], ATOMS[1]
p, q = Literal(P), Literal(Q)


def _with_modal(c, f):
    k = c.int(0, 3)
    a = c.choice(ATOMS[:2])
    if k == 1:
        return And(f, Know(Implies(f, Not(f))))
    if k == 2:
        return Or(f, Observed(a))
    if k == 3:
        return Implies(Unknown(a), f)
    return f


@given(st.data())
def test_persistence(data):
    c = Chooser.from_data(data)
    m = ht_model(c, ATOMS[:2])
    f = _with_modal(c, asp_formula(c, ATOMS[:2], depth=3))
    for w in m.worlds:
        if _sat(m, w, f, False):
            assert _sat(m, w, f, True)


@given(st.data())
def test_total_models_are_classical(data):
    c = Chooser.from_data(data)
    m = ht_model(c, ATOMS[:3]).total()
    f = _with_modal(c, asp_formula(c, ATOMS[:3], depth=3))
    for w in m.worlds:
        assert ht_satisfies(m, w, f) == oracles.classical(m, w, f)


def test_implication_checks_both_levels():
    # h = {}, t = {p}: p -> q fails at t, so fails; not p fails too
    m = HTModel(["x"], [], {"x": set()}, {"x": {p}})
    assert not ht_satisfies(m, "x", Implies(atom("p"), atom("q")))
    assert not ht_satisfies(m, "x", Not(atom("p")))
    assert not ht_satisfies(m, "x", Or(atom("p"), Not(atom("p"))))
    assert ht_satisfies(m, "x", Not(Not(atom("p"))))


def test_del_nodes_rejected():
    m = HTModel(["x"], [], {"x": set()}, {"x": set()})
    with pytest.raises(LayerError):
        ht_satisfies(m, "x", ClassNeg(atom("p")))


def test_model_validation():
    with pytest.raises(ValueError):
        HTModel(["x"], [], {"x": {p}}, {"x": set()})
    with pytest.raises(ValueError):
        HTModel(["x"], [], {"x": set()}, {"x": {p, p.complement()}})
    with pytest.raises(ValueError):
        HTModel(["x"], [("x", "y")], {"x": set()}, {"x": set()})
    with pytest.raises(ValueError):
        EpistemicModel({"w": {"p"}}, [["w"]], ["q"])
    with pytest.raises(ValueError):
        EpistemicModel({"w": set()}, [])


# ---------------------------------------------------------------------------
# Bisimulation preorder


@settings(max_examples=150)
@given(st.data())
def test_preceq_matches_brute_force(data):
    c = Chooser.from_data(data)
    atoms = ATOMS[: c.int(1, 2)]
    m1 = ht_model(c, atoms, 3)
    if c.bool():
        # perturb a copy of m1 so related pairs are likely
        vh = {w: frozenset(x for x in m1.vt[w] if c.bool()) | m1.vh[w] for w in m1.worlds}
        rel = set(m1.relation) if c.bool() else {(x, y) for x, y in m1.relation if c.bool()}
        m2 = HTModel(m1.worlds, rel, vh, m1.vt)
    else:
        m2 = ht_model(c, atoms, 3)
    assert preceq(m1, m2) == oracles.preceq(m1, m2)
    assert approx(m1, m2) == oracles.preceq(m1, m2, exact_h=True)


@given(st.data())
def test_preceq_reflexive(data):
    m = ht_model(Chooser.from_data(data), ATOMS[:3], 4)
    assert preceq(m, m) and approx(m, m) and not strictly_less(m, m)


@given(st.data())
def test_preceq_transitive(data):
    c = Chooser.from_data(data)
    ms = [ht_model(c, ATOMS[:1], 2) for _ in range(3)]
    if preceq(ms[0], ms[1]) and preceq(ms[1], ms[2]):
        assert preceq(ms[0], ms[2])


@given(st.data())
def test_shrinking_here_goes_down(data):
    c = Chooser.from_data(data)
    m3 = ht_model(c, ATOMS[:3], 3)
    m2 = HTModel(m3.worlds, m3.relation, {w: frozenset(x for x in m3.vh[w] if c.bool()) for w in m3.worlds}, m3.vt)
    m1 = HTModel(m2.worlds, m2.relation, {w: frozenset(x for x in m2.vh[w] if c.bool()) for w in m2.worlds}, m2.vt)
    assert preceq(m1, m2) and preceq(m2, m3) and preceq(m1, m3)


def test_duplicate_worlds_are_bisimilar():
    a = EpistemicModel({"w": {"p"}}, [["w"]], ["p"])
    b = EpistemicModel({"u": {"p"}, "v": {"p"}}, [["u", "v"]], ["p"])
    c = EpistemicModel({"u": {"p"}, "v": set()}, [["u", "v"]], ["p"])
    assert bisimilar(a, b) and not bisimilar(a, c)
    assert bisimilar(EpistemicModel({}, []), EpistemicModel({}, []))


def test_cap_is_enforced():
    ws = [f"x{i}" for i in range(5)]
    m = HTModel(ws, [], {w: set() for w in ws}, {w: set() for w in ws})
    with pytest.raises(CapExceeded):
        preceq(m, m, cap=4)


# ---------------------------------------------------------------------------
# Belief worlds


def test_attach_belief_world():
    m = attach_belief_world({"w1": {p}, "w2": set()}, {q})
    assert isinstance(m, BeliefHTModel)
    assert m.distinguished == "w0"
    assert m.vt["w0"] == {q}
    assert set(m.successors("w0")) == {"w1", "w2"}
    assert set(m.successors("w1")) == {"w1", "w2"}
    assert m.cell_worlds() == ["w1", "w2"]


def test_attach_belief_world_fresh_name_and_cells():
    m = attach_belief_world({"w0": {p}}, set())
    assert m.distinguished == "w0'"
    cell = EpistemicModel({"a": {"p"}}, [["a"]], ["p", "q"])
    m2 = attach_belief_world(cell, {p})
    assert m2.vt["a"] == {p}
    with pytest.raises(ValueError):
        attach_belief_world(EpistemicModel({"a": set(), "b": set()}, [["a"], ["b"]]), set())
    with pytest.raises(ValueError):
        attach_belief_world({"a": set()}, {p, p.complement()})
    m3 = attach_belief_world([{p}, {q}], set())
    assert m3.cell_worlds() == ["w1", "w2"]


def test_from_base_checks_relation():
    m = attach_belief_world({"a": set()}, set())
    assert BeliefHTModel.from_base(m.base, m.distinguished) == m
    with pytest.raises(ValueError):
        BeliefHTModel.from_base(HTModel(m.worlds, [], m.vh, m.vt), m.distinguished)


# ---------------------------------------------------------------------------
# Equilibrium


def test_equilibrium_examples():
    th = [atom("p")]
    assert is_equilibrium(attach_belief_world([{p}], {p}), th)
    assert not is_equilibrium(attach_belief_world([set()], set()), th)
    # {p} is not minimal for the empty theory
    assert not is_equilibrium(attach_belief_world([{p}], {p}), [])
    assert is_equilibrium(attach_belief_world([set()], set()), [])


def test_equilibrium_needs_total_model():
    m = BeliefHTModel(["a", "b"], {"a": set(), "b": set()}, {"a": {p}, "b": set()}, "a")
    with pytest.raises(ValueError):
        is_equilibrium(m, [])


def test_initial_view_worlds_are_equilibria():
    phi0 = textio.load_program("phi0.elp")
    (view,) = world_views(phi0)
    assert len(view) == 2
    for I in view.worlds:
        assert is_equilibrium(attach_belief_world(view, I), phi0)
    assert not is_equilibrium(attach_belief_world(view, frozenset()), phi0)


def test_equilibrium_caps():
    cell = [frozenset({Literal(a)}) for a in ATOMS] + [frozenset(), frozenset({p, q})]
    with pytest.raises(CapExceeded):
        is_equilibrium(attach_belief_world(cell, set()), [])


def _cell(c, atoms, n):
    vals = []
    for _ in range(n):
        v = valuation3(c, atoms)
        if v not in vals:
            vals.append(v)
    return vals


def test_distinguished_world_can_shrink_alone():
    # <{}, {p}> at the distinguished world still satisfies L p | -p
    th = [Or(Belief(atom("p")), neg("p"))]
    m = attach_belief_world([{p}], {p})
    assert not oracles.is_equilibrium([frozenset({p})], frozenset({p}), th)
    assert not is_equilibrium(m, th)
    assert not is_equilibrium(m, th, "same-domain")


@settings(max_examples=300)
@given(st.data())
def test_equilibrium_matches_brute_force(data):
    c = Chooser.from_data(data)
    atoms = ATOMS[: c.int(1, 2)]
    formulas = asp_theory(c, atoms, size=2, max_beliefs=2, depth=3)
    cell = _cell(c, atoms, c.int(1, 2))
    I = c.choice(cell) if c.bool() else valuation3(c, atoms)
    got = is_equilibrium(attach_belief_world(cell, I), formulas)
    assert got == oracles.is_equilibrium(cell, I, formulas)


@given(st.data())
def test_exact_check_implies_same_domain(data):
    c = Chooser.from_data(data)
    atoms = ATOMS[: c.int(1, 3)]
    formulas = asp_theory(c, atoms, size=3, max_beliefs=2, depth=3)
    cell = _cell(c, atoms, c.int(1, 3))
    I = c.choice(cell) if c.bool() else valuation3(c, atoms)
    m = attach_belief_world(cell, I)
    if is_equilibrium(m, formulas, "bisimulation"):
        assert is_equilibrium(m, formulas, "same-domain")
