"""Bitmask kernel for here-and-there reasoning over a finite signature.

Formulas in core form are compiled to nested tuples. Literal ``p`` of the
i-th atom is bit ``2*i`` and ``-p`` is bit ``2*i + 1``, so a valuation is
an int. Belief nodes are numbered in post-order (nested ones first) and
evaluated through per-node value vectors.
"""

from __future__ import annotations

from itertools import combinations

from .syntax import And, Belief, Falsum, Implies, Lit, Literal, Or, Top

BOT, TOP, LIT, AND, OR, IMP, BEL = range(7)
N_BOT = (BOT,)
N_TOP = (TOP,)


class Signature:
    def __init__(self, atoms):
        self.atoms = tuple(sorted(set(atoms)))
        self.index = {a: i for i, a in enumerate(self.atoms)}
        n = len(self.atoms)
        self.pos_mask = sum(1 << (2 * i) for i in range(n))
        self.full = (1 << (2 * n)) - 1

    def __len__(self):
        return len(self.atoms)

    def bit(self, literal: Literal) -> int:
        return 1 << (2 * self.index[literal.atom] + literal.negative)

    def mask(self, literals) -> int:
        m = 0
        for l in literals:
            m |= self.bit(l)
        return m

    def literals(self, mask: int) -> frozenset:
        out = []
        for i, a in enumerate(self.atoms):
            if mask >> (2 * i) & 1:
                out.append(Literal(a))
            if mask >> (2 * i + 1) & 1:
                out.append(Literal(a, True))
        return frozenset(out)

    def consistent(self, mask: int) -> bool:
        return not (mask & (mask >> 1) & self.pos_mask)

    def all_consistent(self):
        """Every consistent literal set over the signature (3^n masks)."""
        masks = [0]
        for i in range(len(self.atoms)):
            p, q = 1 << (2 * i), 1 << (2 * i + 1)
            masks = [m | x for m in masks for x in (0, p, q)]
        return masks


class Compiled:
    """A list of core formulas compiled against a signature."""

    def __init__(self, formulas, sig: Signature):
        self.sig = sig
        self.beliefs: list = []
        self.belief_formulas: list = []
        self._index: dict = {}
        self.maximal: list = []
        self.nodes = [self._compile(f, 0) for f in formulas]

    def _compile(self, f, depth):
        if isinstance(f, Lit):
            return (LIT, self.sig.bit(f.literal))
        if isinstance(f, Falsum):
            return N_BOT
        if isinstance(f, Top):
            return N_TOP
        if isinstance(f, (And, Or)):
            parts = []
            stack = [f]
            kind = type(f)
            while stack:
                g = stack.pop()
                if isinstance(g, kind):
                    stack.append(g.right)
                    stack.append(g.left)
                else:
                    parts.append(self._compile(g, depth))
            return (AND if kind is And else OR, tuple(parts))
        if isinstance(f, Implies):
            return (IMP, self._compile(f.left, depth), self._compile(f.right, depth))
        if isinstance(f, Belief):
            idx = self._index.get(f)
            if idx is None:
                body = self._compile(f.body, depth + 1)
                idx = len(self.beliefs)
                self.beliefs.append(body)
                self.belief_formulas.append(f)
                self._index[f] = idx
            if depth == 0 and idx not in self.maximal:
                self.maximal.append(idx)
            return (BEL, idx)
        raise TypeError(f"not a core formula node: {f!r}")


# ---------------------------------------------------------------------------
# Evaluation


def tval(n, T, bt):
    t = n[0]
    if t == LIT:
        return (T & n[1]) != 0
    if t == AND:
        for c in n[1]:
            if not tval(c, T, bt):
                return False
        return True
    if t == OR:
        for c in n[1]:
            if tval(c, T, bt):
                return True
        return False
    if t == IMP:
        return (not tval(n[1], T, bt)) or tval(n[2], T, bt)
    if t == BEL:
        return bt[n[1]]
    return t == TOP


def hval(n, H, T, bh, bt):
    t = n[0]
    if t == LIT:
        return (H & n[1]) != 0
    if t == AND:
        for c in n[1]:
            if not hval(c, H, T, bh, bt):
                return False
        return True
    if t == OR:
        for c in n[1]:
            if hval(c, H, T, bh, bt):
                return True
        return False
    if t == IMP:
        if hval(n[1], H, T, bh, bt) and not hval(n[2], H, T, bh, bt):
            return False
        return tval(n, T, bt)
    if t == BEL:
        return bh[n[1]]
    return t == TOP


def k3(n, tru, fal):
    """Kleene evaluation under a partial assignment; None means unknown."""
    t = n[0]
    if t == LIT:
        b = n[1]
        if tru & b:
            return True
        if fal & b:
            return False
        return None
    if t == AND:
        res = True
        for c in n[1]:
            v = k3(c, tru, fal)
            if v is False:
                return False
            if v is None:
                res = None
        return res
    if t == OR:
        res = False
        for c in n[1]:
            v = k3(c, tru, fal)
            if v is True:
                return True
            if v is None:
                res = None
        return res
    if t == IMP:
        a = k3(n[1], tru, fal)
        if a is False:
            return True
        b = k3(n[2], tru, fal)
        if b is True:
            return True
        if a is True and b is False:
            return False
        return None
    if t == TOP:
        return True
    if t == BOT:
        return False
    raise ValueError("belief node in Kleene evaluation")


def _mk_and(parts):
    out = []
    for p in parts:
        if p[0] == BOT:
            return N_BOT
        if p[0] == TOP:
            continue
        if p[0] == AND:
            out.extend(p[1])
        else:
            out.append(p)
    if not out:
        return N_TOP
    if len(out) == 1:
        return out[0]
    return (AND, tuple(out))


def _mk_or(parts):
    out = []
    for p in parts:
        if p[0] == TOP:
            return N_TOP
        if p[0] == BOT:
            continue
        if p[0] == OR:
            out.extend(p[1])
        else:
            out.append(p)
    if not out:
        return N_BOT
    if len(out) == 1:
        return out[0]
    return (OR, tuple(out))


def _mk_imp(a, b):
    if a[0] == BOT or b[0] == TOP:
        return N_TOP
    if a[0] == TOP:
        return b
    return (IMP, a, b)


def substitute(n, values):
    """Replace belief nodes whose index is in ``values`` by constants."""
    t = n[0]
    if t == BEL:
        if n[1] in values:
            return N_TOP if values[n[1]] else N_BOT
        return n
    if t == AND:
        return _mk_and([substitute(c, values) for c in n[1]])
    if t == OR:
        return _mk_or([substitute(c, values) for c in n[1]])
    if t == IMP:
        return _mk_imp(substitute(n[1], values), substitute(n[2], values))
    return n


def reduct(n, T, bh, bt):
    """Classical formula over bits of T whose models H are exactly the
    h-valuations with <H,T> |= n."""
    t = n[0]
    if t == LIT:
        return n if T & n[1] else N_BOT
    if t == AND:
        return _mk_and([reduct(c, T, bh, bt) for c in n[1]])
    if t == OR:
        return _mk_or([reduct(c, T, bh, bt) for c in n[1]])
    if t == IMP:
        if not tval(n, T, bt):
            return N_BOT
        return _mk_imp(reduct(n[1], T, bh, bt), reduct(n[2], T, bh, bt))
    if t == BEL:
        return N_TOP if (bt[n[1]] and bh[n[1]]) else N_BOT
    return n


def positive_bits(n, positive=True):
    """Literal bits with an occurrence outside an odd number of antecedents."""
    t = n[0]
    if t == LIT:
        return n[1] if positive else 0
    if t in (AND, OR):
        m = 0
        for c in n[1]:
            m |= positive_bits(c, positive)
        return m
    if t == IMP:
        return positive_bits(n[1], not positive) | positive_bits(n[2], positive)
    return 0


def node_bits(n):
    t = n[0]
    if t == LIT:
        return n[1]
    if t in (AND, OR):
        m = 0
        for c in n[1]:
            m |= node_bits(c)
        return m
    if t == IMP:
        return node_bits(n[1]) | node_bits(n[2])
    return 0


def belief_tvalues(comp: Compiled, cell):
    bt = [False] * len(comp.beliefs)
    for i, body in enumerate(comp.beliefs):
        bt[i] = all(tval(body, tau, bt) for tau in cell)
    return bt


# ---------------------------------------------------------------------------
# Search


def _watch(nodes, nslots, slot_of_bit):
    watch = [[] for _ in range(nslots)]
    free = []
    for n in nodes:
        bits = node_bits(n)
        if not bits:
            free.append(n)
            continue
        slots = set()
        while bits:
            low = bits & -bits
            slots.add(slot_of_bit[low])
            bits ^= low
        for s in slots:
            watch[s].append(n)
    return watch, free


def _atom_order(nodes, sig: Signature):
    """Decide atoms that feed rule bodies before those in heads."""
    n = len(sig.atoms)
    score = [0.0] * n
    weight = [0] * n
    for node in nodes:
        for bits, w in _body_head(node):
            while bits:
                low = bits & -bits
                i = low.bit_length() - 1 >> 1
                score[i] += w
                weight[i] += 1
                bits ^= low
    key = []
    for i, a in enumerate(sig.atoms):
        avg = score[i] / weight[i] if weight[i] else 2.0
        key.append((not a.prev, avg, a))
    return [sig.index[a] for _, _, a in sorted(key)]


def _body_head(node):
    if node[0] == IMP:
        return [(node_bits(node[1]), 0.0), (node_bits(node[2]), 1.0)]
    return [(node_bits(node), -1.0)]


def total_models(nodes, sig: Signature, allowed: int):
    """Consistent masks satisfying all (belief-free) nodes classically, with
    true literals restricted to ``allowed``."""
    for n in nodes:
        if n[0] == BOT:
            return
    order = _atom_order(nodes, sig)
    slot_of_bit = {}
    for i in range(len(sig.atoms)):
        slot_of_bit[1 << (2 * i)] = i
        slot_of_bit[1 << (2 * i + 1)] = i
    watch, free = _watch(nodes, len(sig.atoms), slot_of_bit)
    for n in free:
        if k3(n, 0, 0) is False:
            return
    size = len(order)
    out = []

    def rec(k, tru, fal):
        if k == size:
            out.append(tru)
            return
        i = order[k]
        p, q = 1 << (2 * i), 1 << (2 * i + 1)
        ws = watch[i]
        options = [(tru, fal | p | q)]
        if allowed & p:
            options.append((tru | p, fal | q))
        if allowed & q:
            options.append((tru | q, fal | p))
        for t2, f2 in options:
            ok = True
            for n in ws:
                if k3(n, t2, f2) is False:
                    ok = False
                    break
            if ok:
                rec(k + 1, t2, f2)

    rec(0, 0, 0)
    yield from out


def subsets_satisfying(reds, T: int):
    """Yield every H subset of T (smallest-first branching) that satisfies
    all classical formulas in ``reds``."""
    bits = []
    m = T
    while m:
        low = m & -m
        bits.append(low)
        m ^= low
    slot_of_bit = {b: k for k, b in enumerate(bits)}
    live = [r for r in reds if r[0] != TOP]
    for r in live:
        if r[0] == BOT:
            return
    watch, free = _watch(live, len(bits), slot_of_bit)
    for r in free:
        if k3(r, 0, 0) is False:
            return
    size = len(bits)
    # decide bits in the order that completes most nodes early
    stack = [(0, 0, 0)]
    while stack:
        k, tru, fal = stack.pop()
        if k == size:
            yield tru
            continue
        b = bits[k]
        ws = watch[k]
        # push "in" first so "out" is explored first (LIFO)
        for t2, f2 in ((tru | b, fal), (tru, fal | b)):
            ok = True
            for r in ws:
                if k3(r, t2, f2) is False:
                    ok = False
                    break
            if ok:
                stack.append((k + 1, t2, f2))


def has_smaller_model(nodes, I: int) -> bool:
    reds = [reduct(n, I, (), ()) for n in nodes]
    for H in subsets_satisfying(reds, I):
        if H != I:
            return True
    return False


def answer_sets(nodes, sig: Signature):
    """Answer sets (as masks) of belief-free compiled nodes."""
    allowed = 0
    for n in nodes:
        allowed |= positive_bits(n)
    return [I for I in total_models(nodes, sig, allowed) if not has_smaller_model(nodes, I)]


# ---------------------------------------------------------------------------
# Equilibrium check for M + I where M is a total information cell


def is_equilibrium(comp: Compiled, cell, I: int, strategy: str = "bisimulation") -> bool:
    cell = list(cell)
    bt = belief_tvalues(comp, cell)
    for tau in cell + [I]:
        for n in comp.nodes:
            if not tval(n, tau, bt):
                return False
    true_idx = [i for i, v in enumerate(bt) if v]
    for r in range(len(true_idx) + 1):
        for dropped in combinations(true_idx, r):
            bh = list(bt)
            for i in dropped:
                bh[i] = False
            if strategy == "bisimulation":
                found = _smaller_by_pairs(comp, cell, I, bh, bt, dropped)
            elif strategy == "same-domain":
                found = _smaller_same_domain(comp, cell, I, bh, bt, dropped)
            else:
                raise ValueError(f"unknown minimisation strategy {strategy!r}")
            if found:
                return False
    return True


def _world_reducts(comp, tau, bh, bt):
    reds = [reduct(n, tau, bh, bt) for n in comp.nodes]
    for i, v in enumerate(bh):
        if v:
            reds.append(reduct(comp.beliefs[i], tau, bh, bt))
    return reds


def _smaller_by_pairs(comp, cell, I, bh, bt, dropped) -> bool:
    """Is there a belief HT-model M' < M whose successor pairs realise the
    guessed h-values of belief nodes?  M' may use any number of worlds, so
    every admissible pair can be included at once."""
    need = set(dropped)
    proper = False
    distinct = sorted(set(cell))
    for tau in distinct:
        reds = _world_reducts(comp, tau, bh, bt)
        checks = {i: reduct(comp.beliefs[i], tau, bh, bt) for i in dropped}
        any_h = False
        for H in subsets_satisfying(reds, tau):
            any_h = True
            if H != tau:
                proper = True
            for i in [i for i in need if not tval(checks[i], H, ())]:
                need.discard(i)
            if proper and not need:
                break
        if not any_h:
            return False
    # the distinguished world is nobody's successor, so only the theory
    # constrains it; its t-valuation is I, or any cell valuation when I is
    # already carried by an ordinary world
    tops = distinct if I in distinct else [I]
    any_h = False
    for t0 in tops:
        reds0 = [reduct(n, t0, bh, bt) for n in comp.nodes]
        for H in subsets_satisfying(reds0, t0):
            any_h = True
            if H != t0:
                proper = True
                break
        if proper:
            break
    if not any_h:
        return False
    return proper and not need


def _smaller_same_domain(comp, cell, I, bh, bt, dropped) -> bool:
    """Same question restricted to one h-valuation per world."""
    need = frozenset(dropped)
    states = {(frozenset(), False)}
    for tau in cell:
        reds = _world_reducts(comp, tau, bh, bt)
        checks = {i: reduct(comp.beliefs[i], tau, bh, bt) for i in dropped}
        sigs = set()
        for H in subsets_satisfying(reds, tau):
            sigs.add((frozenset(i for i in dropped if not tval(checks[i], H, ())), H != tau))
        if not sigs:
            return False
        states = {(f | f2, p or p2) for f, p in states for f2, p2 in sigs}
    reds0 = [reduct(n, I, bh, bt) for n in comp.nodes]
    w0 = {H != I for H in subsets_satisfying(reds0, I)}
    if not w0:
        return False
    return any(f == need and (p or True in w0) for f, p in states)
