import pytest
from hypothesis import given, settings, strategies as st

from delasp.delcheck import EvaluationRegistry, del_satisfies
from delasp.htcore import EpistemicModel, bisimilar
from delasp.syntax import (
    BOT,
    Atom,
    ClassNeg,
    Implies,
    PointedEvent,
    Theory,
    Update,
    UpdateDual,
    WholeEvent,
    atom,
)
from delasp.textio import inertia_rules
from delasp.update import (
    INCONSISTENT,
    NONCLASSICAL,
    EventModel,
    asp_update,
    cell_views,
    event_product_update,
    event_update_eval,
    product_update_cell,
    whole_event_update_eval,
)
from delasp.worldview import UNDEFINED

from conftest import FLUENTS
from generators import ATOMS, Chooser, asp_formula, del_formula, epistemic_model, event_model

R = Atom("r")


def single(**values):
    """A one-world cell over the domain fluents."""
    v = {Atom(k) for k, x in values.items() if x}
    return EpistemicModel({"w": v}, [["w"]], FLUENTS)


def by_value(res, source, atoms=(R,)):
    """Every source world has one successor, agreeing with it on ``atoms``."""
    for w in source.worlds:
        succ = res.successors(w)
        assert len(succ) == 1, (w, succ)
        for a in atoms:
            assert (a in source.valuation[w]) == (a in res.model.valuation[succ[0]])


def check_relation(res, source):
    assert {x for x, _ in res.relation} <= set(source.worlds)
    assert {y for _, y in res.relation} <= set(res.model.worlds)


# ---------------------------------------------------------------------------
# ASP updates


def test_move_from_m0(pink, models):
    res = asp_update(models["m0"], pink.with_facts("move"), FLUENTS)
    assert bisimilar(res.model, models["m1"])
    by_value(res, models["m0"])
    check_relation(res, models["m0"])


def test_flick_from_m1(pink, models):
    res = asp_update(models["m1"], pink.with_facts("flick"), FLUENTS)
    assert bisimilar(res.model, models["m2"])
    assert len(res.model.cells) == 2 and all(len(c) == 1 for c in res.model.cells)
    by_value(res, models["m1"])


def test_take_right_chain(pink, models):
    res = asp_update(models["m2"], pink.with_facts("take_right"), FLUENTS)
    # not executable in the -r cell, which is dropped
    assert len(res.model.cells) == 1
    assert bisimilar(res.model, single(v=1, l=1, r=1, s=1, d=1))
    (w2,) = [w for w in models["m2"].worlds if R not in models["m2"].valuation[w]]
    assert res.successors(w2) == []
    out = asp_update(res.model, pink.with_facts("move"), FLUENTS)
    assert bisimilar(out.model, single(v=0, l=1, r=1, s=0, d=1))


def test_take_left_chain(pink, models):
    res = asp_update(models["m2"], pink.with_facts("take_left"), FLUENTS)
    assert bisimilar(res.model, single(v=1, l=1, r=0, s=1, d=1))
    out = asp_update(res.model, pink.with_facts("move"), FLUENTS)
    assert bisimilar(out.model, single(v=0, l=1, r=0, s=0, d=1))


def test_world_ids_are_deterministic(pink, models):
    res = asp_update(models["m1"], pink.with_facts("flick"), FLUENTS)
    assert res.model.worlds == ("c0_w0", "c1_w0")


def test_zero_cells_give_empty_model(pink):
    res = asp_update(EpistemicModel({}, [], FLUENTS), pink.with_facts("move"), FLUENTS)
    assert res.model.worlds == () and res.relation == frozenset()


def test_inconsistent_updates_are_undefined(models):
    bot = Theory((BOT,))
    cell = models["m0"].cell_models()[0]
    assert product_update_cell(cell, bot, FLUENTS) is UNDEFINED
    assert asp_update(models["m0"], bot, FLUENTS) is UNDEFINED
    assert cell_views(cell, bot, FLUENTS)[0] == INCONSISTENT


def test_nonclassical_cell_poisons_update():
    m = EpistemicModel({"a": {"p"}, "b": set()}, [["a"], ["b"]], ["p"])
    # no inertia: p is left undecided after the step
    assert cell_views(m.cell_models()[0], Theory(()), ["p"])[0] == NONCLASSICAL
    assert asp_update(m, Theory(()), ["p"]) is UNDEFINED
    # the constraint drops cell a, but cell b is still not classical
    kill = Implies(atom("p", prev=True), BOT)
    assert asp_update(m, Theory((kill,)), ["p"]) is UNDEFINED
    # with inertia cell b survives on its own
    res = asp_update(m, Theory((kill, *inertia_rules("p"))), ["p"])
    assert len(res.model.worlds) == 1 and res.successors("a") == [] and len(res.successors("b")) == 1
    # every cell dropped: undefined
    assert asp_update(m, Theory((BOT,)), ["p"]) is UNDEFINED


def test_product_update_cell_needs_a_cell(models):
    with pytest.raises(ValueError):
        product_update_cell(models["m2"], Theory(()), FLUENTS)
    with pytest.raises(ValueError):
        cell_views(models["m0"].cell_models()[0], Theory(()), ["v"])


def test_cell_cache_matches_fresh(pink, models):
    cache = {}
    th = pink.with_facts("flick")
    first = asp_update(models["m1"], th, FLUENTS, cache)
    again = asp_update(models["m1"], th, FLUENTS, cache)
    fresh = asp_update(models["m1"], th, FLUENTS)
    assert first == again == fresh
    for value in cache.values():
        assert value == cell_views(models["m1"].cell_models()[0], th, FLUENTS)


def _step_theory(c, atoms):
    rules = []
    for a in atoms:
        rules.extend(inertia_rules(a.name))
    pool = list(atoms) + [a.lifted() for a in atoms]
    for _ in range(c.int(0, 2)):
        rules.append(asp_formula(c, pool, depth=2, allow_belief=False))
    return Theory(tuple(rules), frozenset(a.name for a in atoms))


@settings(max_examples=80)
@given(st.data())
def test_asp_update_relation_invariants(data):
    c = Chooser.from_data(data)
    atoms = ATOMS[:2]
    m = epistemic_model(c, max_worlds=3, atoms=atoms)
    res = asp_update(m, _step_theory(c, atoms), atoms)
    if res is UNDEFINED:
        return
    check_relation(res, m)
    # the lifted characteristic formula ties every new world to an old one
    for y in res.model.worlds:
        assert any(y2 == y for _, y2 in res.relation)
    # successors stay inside the image of the source cell
    for x, y in res.relation:
        sources = {x2 for x2, y2 in res.relation if res.model.cell_of(y2) == res.model.cell_of(y)}
        assert sources <= m.cell_of(x)


# ---------------------------------------------------------------------------
# Event updates


def test_flick_event_point(models, events):
    res = event_update_eval(models["m1"], events["flick"], "e1")
    (w1,) = [w for w in models["m1"].worlds if R in models["m1"].valuation[w]]
    assert res.relation == {(w1, f"({w1},e1)")}


def test_take_left_maps_both_worlds(models, events):
    res = event_update_eval(models["m1"], events["take_left"], "e1")
    assert len(res.relation) == 2
    for w, w2 in res.relation:
        assert (Atom("d") in res.model.valuation[w2]) == (R not in models["m1"].valuation[w])


def test_event_examples(models, events):
    assert bisimilar(event_product_update(models["m1"], events["flick"]), models["m2"])
    assert bisimilar(event_product_update(models["m1"], events["flick2"]), models["m2prime"])
    assert bisimilar(event_product_update(models["m3"], events["move"]), models["m4"])


def test_unsatisfiable_point_gives_empty_relation(models):
    em = EventModel(("e", "f"), frozenset(), {"e": BOT, "f": atom("v")}, {}, frozenset())
    res = event_update_eval(models["m1"], em, "e")
    assert res.relation == frozenset()
    assert len(res.model.worlds) == 2


def test_event_model_validation():
    with pytest.raises(ValueError):
        EventModel(("e",), frozenset(), {}, {})
    with pytest.raises(ValueError):
        EventModel(("e",), frozenset({("e", "x")}), {"e": BOT}, {})
    with pytest.raises(ValueError):
        EventModel(("e",), frozenset(), {"e": BOT}, {"e": {Atom("q"): BOT}}, frozenset({Atom("p")}))
    with pytest.raises(ValueError):
        EventModel(("e",), frozenset(), {"e": BOT}, {}, point="f")
    with pytest.raises(ValueError):
        event_product_update(
            EpistemicModel({"w": set()}, [["w"]], ["p"]),
            EventModel(("e",), frozenset(), {"e": BOT}, {"e": {Atom("q"): BOT}}),
        )


def test_relation_closed_to_equivalence():
    em = EventModel(("a", "b", "c"), frozenset({("a", "b"), ("b", "c")}), {e: BOT for e in "abc"}, {})
    assert ("c", "a") in em.relation and ("a", "a") in em.relation
    assert em.classes() == [["a", "b", "c"]]


def _event_case(c):
    atoms = ATOMS[: c.int(1, 4)]
    m = epistemic_model(c, max_worlds=3, atoms=atoms)
    em = event_model(c, atoms, max_events=2)
    reg = EvaluationRegistry().add_event_model("E", em)
    return m, em, reg


def check_prop1(c) -> bool:
    m, em, reg = _event_case(c)
    e = c.choice(em.events)
    phi = del_formula(c, sorted(m.atoms), depth=3)
    out = event_product_update(m, em)
    for w in m.worlds:
        lhs = del_satisfies(m, w, Update(PointedEvent("E", e), phi), reg)
        rhs = (not del_satisfies(m, w, em.pre[e])) or del_satisfies(out, f"({w},{e})", phi)
        if lhs != rhs:
            return False
    return True


def check_prop2(c) -> bool:
    m, em, reg = _event_case(c)
    phi = del_formula(c, sorted(m.atoms), depth=3)
    out = event_product_update(m, em)
    for w in m.worlds:
        live = [e for e in em.events if del_satisfies(m, w, em.pre[e])]
        box = del_satisfies(m, w, Update(WholeEvent("E"), phi), reg)
        dia = del_satisfies(m, w, UpdateDual(WholeEvent("E"), phi), reg)
        if box != all(del_satisfies(out, f"({w},{e})", phi) for e in live):
            return False
        if dia != any(del_satisfies(out, f"({w},{e})", phi) for e in live):
            return False
    return True


@settings(max_examples=200)
@given(st.data())
def test_pointed_event_box(data):
    assert check_prop1(Chooser.from_data(data))


@settings(max_examples=200)
@given(st.data())
def test_whole_event_box_and_diamond(data):
    assert check_prop2(Chooser.from_data(data))


@given(st.data())
def test_event_update_invariants(data):
    m, em, reg = _event_case(Chooser.from_data(data))
    for res in [whole_event_update_eval(m, em)] + [event_update_eval(m, em, e) for e in em.events]:
        check_relation(res, m)
        # (w,e) and (w',e') share a cell iff w~w' and e~e'
        for x in res.model.worlds:
            for y in res.model.worlds:
                (w1, e1), (w2, e2) = (x[1:-1].split(","), y[1:-1].split(","))
                same = res.model.cell_of(x) == res.model.cell_of(y)
                assert same == (m.cell_of(w1) == m.cell_of(w2) and (e1, e2) in em.relation)


def test_asp_and_event_paths_agree(pink, models, events):
    asp = asp_update(models["m1"], pink.with_facts("flick"), FLUENTS)
    ev = event_product_update(models["m1"], events["flick"])
    assert bisimilar(asp.model, ev) and bisimilar(ev, models["m2"])
    asp = asp_update(models["m0"], pink.with_facts("move"), FLUENTS)
    ev = event_product_update(models["m0"], events["move"])
    assert bisimilar(asp.model, ev) and bisimilar(ev, models["m1"])


def test_knowledge_in_preconditions(models):
    from delasp.syntax import Know

    em = EventModel(("e",), frozenset(), {"e": Know(atom("r"))}, {})
    out = event_product_update(models["m2"], em)
    assert len(out.worlds) == 1
    out0 = event_product_update(models["m0"], em)
    assert out0.worlds == ()
    em2 = EventModel(("e",), frozenset(), {"e": ClassNeg(Know(atom("r")))}, {})
    assert len(event_product_update(models["m0"], em2).worlds) == 2
