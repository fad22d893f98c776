"""Conditional plans: AST, translation into dynamic formulas, verification, search.

Plan sizes are measured per branch: ``length`` is the largest number of
actions executed along any run and ``conditionals`` the largest number of
tests met along any run. Search caps refer to these measures.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Optional, Union

from .delcheck import EvaluationRegistry, del_models, del_satisfies
from .errors import NonClassicalInitialState
from .htcore import EpistemicModel
from .syntax import (
    TOP,
    And,
    Atom,
    ClassNeg,
    Formula,
    Implies,
    Know,
    Theory,
    TheoryObject,
    Update,
    UpdateDual,
    atom,
    atoms_of,
    check_del,
    is_objective,
    neg,
)
from .worldview import UNDEFINED, mod

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Action:
    name: str


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Seq:
    first: "Plan"
    second: "Plan"


@dataclass(frozen=True)
class IfK:
    """``if K(cond) then then else orelse``."""

    cond: Formula
    then: "Plan"
    orelse: "Plan" = Skip()

    def __post_init__(self):
        if not is_objective(self.cond):
            raise ValueError("plan condition must be objective")
        check_del(self.cond)


Plan = Union[Action, Skip, Seq, IfK]


def length(plan: Plan) -> int:
    """Most actions executed along a single branch."""
    if isinstance(plan, Action):
        return 1
    if isinstance(plan, Seq):
        return length(plan.first) + length(plan.second)
    if isinstance(plan, IfK):
        return max(length(plan.then), length(plan.orelse))
    return 0


def conditionals(plan: Plan) -> int:
    """Most tests met along a single branch."""
    if isinstance(plan, Seq):
        return conditionals(plan.first) + conditionals(plan.second)
    if isinstance(plan, IfK):
        return 1 + max(conditionals(plan.then), conditionals(plan.orelse))
    return 0


def actions_of(plan: Plan) -> frozenset:
    if isinstance(plan, Action):
        return frozenset([plan.name])
    if isinstance(plan, Seq):
        return actions_of(plan.first) | actions_of(plan.second)
    if isinstance(plan, IfK):
        return actions_of(plan.then) | actions_of(plan.orelse)
    return frozenset()


def is_conformant(plan: Plan) -> bool:
    return conditionals(plan) == 0


def steps(plan: Plan) -> list:
    """Flatten nested sequences; skips vanish."""
    if isinstance(plan, Seq):
        return steps(plan.first) + steps(plan.second)
    if isinstance(plan, Skip):
        return []
    return [plan]


def sequence(items: Iterable[Plan]) -> Plan:
    """Right-nested sequence of the given steps; empty gives skip."""
    items = [p for p in items if not isinstance(p, Skip)]
    if not items:
        return Skip()
    out = items[-1]
    for p in reversed(items[:-1]):
        out = Seq(p, out)
    return out


def plan_key(plan: Plan) -> tuple:
    """Search order: fewer actions, fewer conditionals, then the text."""
    from .textio import format_plan

    return (length(plan), conditionals(plan), format_plan(plan))


# ---------------------------------------------------------------------------
# Planning tasks


@dataclass(frozen=True)
class PlanningTask:
    initial: Theory
    theory: Theory
    goal: Formula
    fluents: tuple
    actions: tuple
    theory_path: Optional[str] = None
    init_path: Optional[str] = None
    name: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "fluents", tuple(self.fluents))
        object.__setattr__(self, "actions", tuple(self.actions))
        acts = {Atom(a) for a in self.actions}
        for a in self.initial.atoms():
            if a.prev:
                raise ValueError(f"initial theory mentions previous-state atom {a}")
            if a.erased() in acts:
                raise ValueError(f"initial theory mentions action atom {a}")
        if not is_objective(self.goal):
            raise ValueError("goal must be an objective formula")
        check_del(self.goal)
        stray = {a.name for a in atoms_of(self.goal)} - set(self.fluents)
        if stray or any(a.prev for a in atoms_of(self.goal)):
            raise ValueError(f"goal mentions atoms outside the fluents: {sorted(stray)}")
        if set(self.fluents) & set(self.actions):
            raise ValueError("fluents and actions must be disjoint")

    def fluent_atoms(self) -> tuple:
        return tuple(sorted(Atom(f) for f in self.fluents))


THEORY_ID = "gamma"


def action_ref(name: str, theory_id: str = THEORY_ID) -> TheoryObject:
    return TheoryObject(theory_id, (name,))


def _theory_id(theory, registry, theory_id, fluents=None) -> str:
    if isinstance(theory, str):
        return theory
    tid = theory_id or THEORY_ID
    if registry is not None:
        registry.add_theory(tid, theory, fluents)
    return tid


def translate(
    plan: Plan,
    theory: Union[Theory, str],
    psi: Formula,
    registry: Optional[EvaluationRegistry] = None,
    *,
    theory_id: Optional[str] = None,
    actions: Optional[Iterable[str]] = None,
) -> Formula:
    """The dynamic formula stating that ``plan`` is executable and ends in ``psi``.

    ``theory`` is either a theory (registered in ``registry`` under
    ``theory_id`` when a registry is given) or the id of a registered one.
    """
    check_del(psi)
    if actions is None and isinstance(theory, Theory) and theory.actions:
        actions = theory.actions
    allowed = None if actions is None else set(actions)
    tid = _theory_id(theory, registry, theory_id)

    def tr(p: Plan, post: Formula) -> Formula:
        if isinstance(p, Action):
            if allowed is not None and p.name not in allowed:
                raise ValueError(f"action {p.name!r} is not an action of the task")
            ref = action_ref(p.name, tid)
            return And(UpdateDual(ref, TOP), Update(ref, post))
        if isinstance(p, Skip):
            return post
        if isinstance(p, Seq):
            return tr(p.first, tr(p.second, post))
        if isinstance(p, IfK):
            k = Know(p.cond)
            return And(Implies(k, tr(p.then, post)), Implies(ClassNeg(k), tr(p.orelse, post)))
        raise TypeError(f"not a plan: {p!r}")

    return tr(plan, psi)


def conformant_formula(names: Iterable[str], psi: Formula, theory_id: str = THEORY_ID) -> Formula:
    """K[a1]...[an]psi without the executability conjuncts."""
    out = psi
    for a in reversed(list(names)):
        out = Update(action_ref(a, theory_id), out)
    return Know(out)


@functools.lru_cache(maxsize=64)
def _initial(initial: Theory, fluents: tuple):
    return mod(initial, fluents, fluents)


def initial_model(task: PlanningTask) -> EpistemicModel:
    res = _initial(task.initial, task.fluent_atoms())
    if res is UNDEFINED:
        raise NonClassicalInitialState("the initial theory has no world view deciding every fluent")
    return res.model


@functools.lru_cache(maxsize=64)
def task_registry(task: PlanningTask) -> EvaluationRegistry:
    """A registry with the task's theory bound under THEORY_ID, shared per task."""
    reg = EvaluationRegistry()
    reg.add_theory(THEORY_ID, task.theory, task.fluent_atoms())
    return reg


def _check_actions(task: PlanningTask, plan: Plan):
    extra = actions_of(plan) - set(task.actions)
    if extra:
        raise ValueError(f"plan uses actions outside the task: {sorted(extra)}")


def is_solution(task: PlanningTask, plan: Plan, registry: Optional[EvaluationRegistry] = None) -> bool:
    _check_actions(task, plan)
    model = initial_model(task)
    reg = registry or task_registry(task)
    if THEORY_ID not in reg.theories:
        reg.add_theory(THEORY_ID, task.theory, task.fluent_atoms())
    return del_models(model, translate(plan, THEORY_ID, task.goal), reg)


def conformant_check(task: PlanningTask, names: Iterable[str], registry=None) -> bool:
    """The nested check K[a1]...[an]goal on the initial model."""
    reg = registry or task_registry(task)
    return del_models(initial_model(task), conformant_formula(list(names), task.goal), reg)


def executed_actions(plan: Plan, model: EpistemicModel, registry: EvaluationRegistry, theory_id: str = THEORY_ID) -> dict:
    """For every world, the set of action sequences some run of the plan performs.

    Runs that hit an undefined update or a world without successor end with
    the marker ``None``.
    """

    def run(p: Plan, m: EpistemicModel, w: str) -> set:
        # pairs (performed actions, final (model, world) or None)
        if isinstance(p, Skip):
            return {((), (m, w))}
        if isinstance(p, Action):
            res = registry.evaluate(m, action_ref(p.name, theory_id))
            succ = [] if res is UNDEFINED else res.successors(w)
            if not succ:
                return {((p.name, None), None)}
            return {((p.name,), (res.model, v)) for v in succ}
        if isinstance(p, IfK):
            branch = p.then if del_satisfies(m, w, Know(p.cond), registry) else p.orelse
            return run(branch, m, w)
        out = set()
        for acts, end in run(p.first, m, w):
            if end is None:
                out.add((acts, None))
                continue
            for more, end2 in run(p.second, *end):
                out.add((acts + more, end2))
        return out

    return {w: frozenset(a for a, _ in run(plan, model, w)) for w in model.worlds}


# ---------------------------------------------------------------------------
# Search


def default_pool(fluents: Iterable[str]) -> list:
    """Literal-knowledge conditions: K f and K -f for every fluent."""
    out = []
    for f in sorted(fluents):
        out.extend([atom(f), neg(f)])
    return out


def normal_form_plans(actions, pool, max_actions: int, max_conditionals: int):
    """All plans shaped a1; ...; an [; if K(c) then P else Q] with P, Q again
    of that shape, within the per-branch caps."""
    actions = sorted(actions)

    @functools.lru_cache(maxsize=None)
    def gen(d, k):
        out = [Skip()]
        if d > 0:
            for a in actions:
                for rest in gen(d - 1, k):
                    out.append(Action(a) if isinstance(rest, Skip) else Seq(Action(a), rest))
        if k > 0:
            sub = gen(d, k - 1)
            for c in pool:
                for p, q in product(sub, sub):
                    out.append(IfK(c, p, q))
        return tuple(out)

    return list(gen(max_actions, max_conditionals))


def factor_suffixes(plan: Plan) -> Plan:
    """Pull a common trailing run of steps out of the two branches of a test."""
    items = steps(plan)
    if not items or not isinstance(items[-1], IfK):
        return sequence(items)
    last = items[-1]
    a = steps(factor_suffixes(last.then))
    b = steps(factor_suffixes(last.orelse))
    tail = []
    while a and b and a[-1] == b[-1]:
        tail.insert(0, a.pop())
        b.pop()
    return sequence(items[:-1] + [IfK(last.cond, sequence(a), sequence(b))] + tail)


@dataclass
class SearchStats:
    nodes: int = 0
    memo_hits: int = 0
    candidates: int = 0


class _Planner:
    """Exact dynamic programming over normal-form plans.

    A state is the current model together with the set of worlds the agent
    may be in; for each state and remaining budget it tabulates, for every
    (length, conditionals) pair, the least plan in search order that reaches
    the goal from every world of the set.
    """

    def __init__(self, task: PlanningTask, pool, registry: EvaluationRegistry):
        from .textio import format_plan

        self.task = task
        self.pool = sorted(pool, key=str)
        self.reg = registry
        self.fmt = format_plan
        self.memo: dict = {}
        self.stats = SearchStats()

    def goal_holds(self, m, U) -> bool:
        return all(del_satisfies(m, w, self.task.goal, self.reg) for w in U)

    def step(self, m, U, a):
        res = self.reg.evaluate(m, action_ref(a))
        if res is UNDEFINED:
            return None
        nxt = set()
        for w in U:
            succ = res.successors(w)
            if not succ:
                return None
            nxt.update(succ)
        return res.model, frozenset(nxt)

    def solve(self, m, U, d, k) -> dict:
        key = (m.fingerprint(), U, d, k)
        hit = self.memo.get(key)
        if hit is not None:
            self.stats.memo_hits += 1
            return hit
        self.stats.nodes += 1
        best: dict = {}

        def offer(plan, slot):
            cur = best.get(slot)
            if cur is None or self.fmt(plan) < self.fmt(cur):
                best[slot] = plan

        if self.goal_holds(m, U):
            offer(Skip(), (0, 0))
        if d > 0:
            for a in sorted(self.task.actions):
                nxt = self.step(m, U, a)
                if nxt is None:
                    continue
                for (dl, kl), rest in self.solve(nxt[0], nxt[1], d - 1, k).items():
                    offer(Action(a) if isinstance(rest, Skip) else Seq(Action(a), rest), (dl + 1, kl))
        if k > 0:
            for c in self.pool:
                yes = frozenset(w for w in U if del_satisfies(m, w, Know(c), self.reg))
                no = U - yes
                if not yes or not no:
                    continue
                then = self.solve(m, yes, d, k - 1)
                if not then:
                    continue
                other = self.solve(m, no, d, k - 1)
                for (dt, kt), p in then.items():
                    for (de, ke), q in other.items():
                        offer(IfK(c, p, q), (max(dt, de), 1 + max(kt, ke)))
        self.memo[key] = best
        return best


def search(
    task: PlanningTask,
    max_actions: int,
    max_conditionals: int = 0,
    pool: Optional[Iterable[Formula]] = None,
    *,
    strategy: str = "dp",
    registry: Optional[EvaluationRegistry] = None,
    stats: Optional[SearchStats] = None,
) -> Optional[Plan]:
    """Least solution within the caps, or None.

    ``strategy="dp"`` tabulates over belief states; ``"enumerate"`` checks
    normal-form candidates one by one in search order. Both return the
    same plan, with common branch suffixes factored out.
    """
    if max_actions < 0 or max_conditionals < 0:
        raise ValueError("caps must be non-negative")
    pool = list(pool) if pool is not None else default_pool(task.fluents)
    for c in pool:
        if not is_objective(c):
            raise ValueError("pool conditions must be objective")
    reg = registry or task_registry(task)
    if THEORY_ID not in reg.theories:
        reg.add_theory(THEORY_ID, task.theory, task.fluent_atoms())
    model = initial_model(task)
    stats = stats if stats is not None else SearchStats()

    if strategy == "enumerate":
        cands = sorted(normal_form_plans(task.actions, pool, max_actions, max_conditionals), key=plan_key)
        found = None
        for p in cands:
            stats.candidates += 1
            if is_solution(task, p, reg):
                found = p
                break
    elif strategy == "dp":
        planner = _Planner(task, pool, reg)
        table = planner.solve(model, frozenset(model.worlds), max_actions, max_conditionals)
        stats.nodes += planner.stats.nodes
        stats.memo_hits += planner.stats.memo_hits
        found = min(table.values(), key=plan_key) if table else None
    else:
        raise ValueError(f"unknown search strategy {strategy!r}")
    if found is None:
        return None
    out = factor_suffixes(found)
    if not is_solution(task, out, reg):  # pragma: no cover - guarded by tests
        raise AssertionError(f"search produced a non-solution {out}")
    return out
