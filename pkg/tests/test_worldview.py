import pytest
from hypothesis import given, settings, strategies as st

from delasp import textio
from delasp.errors import CapExceeded, LayerError
from delasp.htcore import EpistemicModel, bisimilar
from delasp.syntax import (
    BOT,
    Atom,
    Belief,
    Implies,
    Literal,
    Not,
    Or,
    Theory,
    atom,
    neg,
    prev_lift,
)
from delasp.worldview import (
    UNDEFINED,
    WorldView,
    answer_sets,
    characteristic_formula,
    is_p_classical,
    mod,
    project,
    verify_world_view,
    world_views,
    world_views_oracle,
)

import oracles
from conftest import FLUENTS
from generators import ATOMS, Chooser, asp_theory, info_cell

P = Atom("p")


def L(name, negative=False, prev=False):
    return Literal(Atom(name, prev), negative)


def signed(**values):
    return frozenset(L(k, not v) for k, v in values.items())


def test_initial_theory_has_one_view():
    views = world_views(textio.load_program("phi0.elp"))
    assert views == [
        WorldView((signed(v=0, l=0, r=0, s=0, d=0), signed(v=0, l=0, r=1, s=0, d=0)))
    ]


def test_move_theory_view():
    theta1 = textio.load_program("theta1.elp")
    (view,) = world_views(theta1)
    assert len(view) == 2
    for w in view.worlds:
        assert L("move") in w
        assert {L("v"), L("l", True), L("s", True), L("d", True)} <= w
        assert {L("v", True, True), L("l", True, True), L("s", True, True), L("d", True, True)} <= w
        # the diamond stays where it was
        assert (L("r") in w) == (L("r", prev=True) in w)
    assert is_p_classical([view], list(FLUENTS) + [Atom(f, True) for f in FLUENTS])


def _theta(pink, model, action):
    cell = model.cell_models()
    assert len(cell) == 1
    return pink.with_facts(action).extended([prev_lift(characteristic_formula(cell[0]))])


def test_flick_theory_has_two_views(pink, models):
    theta2 = _theta(pink, models["m1"], "flick")
    views = world_views(theta2)
    assert len(views) == 2
    res = mod(theta2, FLUENTS)
    assert len(res.model.cells) == 2
    assert bisimilar(res.model, models["m2"])
    for v in views:
        assert verify_world_view(theta2, v)


def test_simple_views():
    p, np_ = atom("p"), neg("p")
    assert world_views([p]) == [WorldView((frozenset({L("p")}),))]
    assert world_views([Or(p, np_)]) == [WorldView((frozenset({L("p")}), frozenset({L("p", True)})))]
    assert world_views([BOT]) == []
    assert world_views([]) == [WorldView((frozenset(),))]
    # p <- not L p has no world view
    assert world_views([Implies(Not(Belief(p)), p)]) == []
    assert oracles.world_views([Implies(Not(Belief(p)), p)], [P]) == []


def test_views_agree_with_oracle_on_examples():
    p, q = atom("p"), atom("q")
    examples = [
        [Or(p, neg("p"))],
        [p],
        [BOT],
        [Implies(Belief(p), p)],
        [Or(p, Not(p))],
        [Implies(Not(Belief(neg("p"))), p), Implies(Not(Belief(p)), neg("p"))],
    ]
    for th in examples:
        got = {frozenset(v.worlds) for v in world_views(th, [P])}
        assert got == set(oracles.world_views(th, [P])), th
    assert len(world_views([Or(p, q)])) == 1


@settings(max_examples=150)
@given(st.data())
def test_answer_sets_match_definition(data):
    c = Chooser.from_data(data)
    atoms = ATOMS[: c.int(1, 3)]
    th = asp_theory(c, atoms, size=3, max_beliefs=0, depth=3)
    got = answer_sets(th, atoms)
    assert got == oracles.answer_sets(th, atoms)


def test_answer_sets_rejects_beliefs():
    with pytest.raises(LayerError):
        answer_sets([Belief(atom("p"))])


def test_atom_cap():
    th = [atom(n) for n in "abcdef"]
    with pytest.raises(CapExceeded):
        world_views(th, cap_atoms=5)


@settings(max_examples=120)
@given(st.data())
def test_world_views_match_brute_force(data):
    c = Chooser.from_data(data)
    th = asp_theory(c, [P], size=3, max_beliefs=2, depth=3)
    got = {frozenset(v.worlds) for v in world_views(th, [P])}
    assert got == set(oracles.world_views(th, [P]))


@settings(max_examples=60)
@given(st.data())
def test_generate_and_test_matches_enumeration(data):
    c = Chooser.from_data(data)
    atoms = ATOMS[:2]
    th = asp_theory(c, atoms, size=3, max_beliefs=2, depth=2)
    assert world_views(th, atoms) == world_views_oracle(th, atoms)


@settings(max_examples=60)
@given(st.data())
def test_found_views_verify(data):
    c = Chooser.from_data(data)
    atoms = ATOMS[:2]
    th = asp_theory(c, atoms, size=3, max_beliefs=2, depth=3)
    views = world_views(th, atoms)
    for v in views:
        assert verify_world_view(th, v, atoms)
    for w in [frozenset(), frozenset({Literal(atoms[0])})]:
        if all(v.worlds != (w,) for v in views):
            assert not verify_world_view(th, [w], atoms)


def test_classicality():
    phi0 = textio.load_program("phi0.elp")
    assert is_p_classical(phi0, FLUENTS)
    assert not is_p_classical([], ["p"], ["p"])
    assert not is_p_classical([BOT], [])
    assert is_p_classical([Or(atom("p"), neg("p"))], ["p"])


def test_project():
    view = WorldView((signed(p=1, q=0), signed(p=0, q=0)))
    m = project(view, ["p", "q"])
    assert m.is_cell() and m.atoms == {Atom("p"), Atom("q")}
    assert sorted(m.valuation.values(), key=len) == [frozenset(), frozenset({Atom("p")})]
    with pytest.raises(ValueError):
        project(WorldView((frozenset(),)), ["p"])


def test_mod_examples(models):
    assert mod([BOT], ["p"]) is UNDEFINED
    assert mod([], ["p"], ["p"]) is UNDEFINED
    m0 = mod(textio.load_program("phi0.elp"), FLUENTS)
    assert bisimilar(m0.model, models["m0"])
    assert bisimilar(mod(textio.load_program("phi0prime.elp"), FLUENTS).model, models["m0prime"])
    assert e_ids(m0.model) == ["c0_w0", "c0_w1"]
    assert set(m0.provenance) == set(m0.model.worlds)


def e_ids(m: EpistemicModel) -> list:
    return list(m.worlds)


@given(st.data())
def test_characteristic_formula_round_trip(data):
    cell = info_cell(Chooser.from_data(data), max_worlds=3, max_atoms=3)
    res = mod([characteristic_formula(cell)], sorted(cell.atoms))
    assert res is not UNDEFINED
    assert bisimilar(res.model, cell)


def test_theory_object_and_list_agree():
    th = Theory((Or(atom("p"), neg("p")),))
    assert world_views(th) == world_views(list(th.formulas))


@settings(max_examples=120)
@given(st.data())
def test_verify_matches_definition(data):
    c = Chooser.from_data(data)
    th = asp_theory(c, [P], size=3, max_beliefs=2, depth=3)
    interps = list(oracles.interpretations([P]))
    cell = [I for I in interps if c.bool()] or [interps[0]]
    assert verify_world_view(th, cell, [P]) == (frozenset(cell) in set(oracles.world_views(th, [P])))
