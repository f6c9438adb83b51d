"""Independent reference implementations used by the tests.

Nothing here calls into the reasoner, rewriter or engine: the chase builds a
truncated canonical model with labeled nulls and answers queries by brute
force homomorphism search.
"""
from __future__ import annotations

import itertools
import random

from kabcheck.model import (
    CQ,
    UCQ,
    Atom,
    Concept,
    ConceptInclusion,
    Eq,
    Functional,
    Neg,
    Role,
    RoleInclusion,
    SomeRole,
    TBox,
    Term,
    Var,
    const,
    func,
)


class Null:
    __slots__ = ("n", "depth")

    def __init__(self, n: int, depth: int) -> None:
        self.n = n
        self.depth = depth

    def __repr__(self) -> str:
        return f"_:{self.n}"

    def __lt__(self, other) -> bool:
        return repr(self) < repr(other)


def _key(x):
    return (1, x.n) if isinstance(x, Null) else (0, x.sort_key)


class ChaseModel:
    """Restricted chase of (T, A) truncated at a null depth."""

    def __init__(self, tbox: TBox, abox, depth: int) -> None:
        self.tbox = tbox
        self.parent: dict = {}
        self.concepts: set = set()  # (name, node)
        self.roles: set = set()  # (name, node, node)
        self.named: set = set()
        self.counter = 0
        for a in abox:
            args = (a.left, a.right) if isinstance(a, Eq) else a.args
            for t in args:
                self.named.add(t)
                for s in t.subterms():
                    self.parent.setdefault(s, s)
            if isinstance(a, Eq):
                self.union(a.left, a.right)
            elif len(a.args) == 1:
                self.concepts.add((a.pred, a.args[0]))
            else:
                self.roles.add((a.pred, a.args[0], a.args[1]))
        self.depth = depth
        self._run()

    # union-find over named terms and nulls
    def find(self, x):
        while self.parent[x] != x:
            x = self.parent[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if _key(rb) < _key(ra):
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def _normalize(self) -> None:
        f = self.find
        self.concepts = {(c, f(x)) for c, x in self.concepts}
        self.roles = {(p, f(x), f(y)) for p, x, y in self.roles}

    def pairs(self, role: Role) -> set:
        return {(y, x) if role.inverse else (x, y) for p, x, y in self.roles if p == role.name}

    def has_basic(self, node, basic) -> bool:
        if isinstance(basic, Concept):
            return (basic.name, node) in self.concepts
        name, inverse = basic.role.name, basic.role.inverse
        return any(p == name and (y if inverse else x) == node for p, x, y in self.roles)

    def nodes(self) -> set:
        out = {x for _, x in self.concepts}
        for _, x, y in self.roles:
            out |= {x, y}
        return out

    def _node_depth(self, node) -> int:
        return node.depth if isinstance(node, Null) else 0

    def _add_role(self, role: Role, x, y) -> bool:
        fact = (role.name, y, x) if role.inverse else (role.name, x, y)
        if fact in self.roles:
            return False
        self.roles.add(fact)
        return True

    def _run(self) -> None:
        tbox = list(self.tbox)
        cis = [a for a in tbox if isinstance(a, ConceptInclusion) and not isinstance(a.rhs, Neg)]
        ris = [a for a in tbox if isinstance(a, RoleInclusion) and not isinstance(a.rhs, Neg)]
        funct = [a.role for a in tbox if isinstance(a, Functional)]
        while True:
            changed = False
            self._normalize()
            # congruence over ground terms
            fterms = [t for t in self.parent if isinstance(t, Term) and t.args]
            for s, t in itertools.combinations(fterms, 2):
                if s.name == t.name and len(s.args) == len(t.args):
                    if all(self.find(a) == self.find(b) for a, b in zip(s.args, t.args)):
                        changed |= self.union(s, t)
            # functionality
            for r in funct:
                succ: dict = {}
                for x, y in self.pairs(r):
                    if x in succ:
                        changed |= self.union(succ[x], y)
                    else:
                        succ[x] = y
            if changed:
                continue
            for ri in ris:
                for x, y in self.pairs(ri.lhs):
                    changed |= self._add_role(ri.rhs, x, y)
            for ci in cis:
                lhs = ci.lhs
                if isinstance(lhs, Concept):
                    holders = {x for c, x in self.concepts if c == lhs.name}
                else:
                    holders = {x for x, _ in self.pairs(lhs.role)}
                for node in sorted(holders, key=_key):
                    if isinstance(ci.rhs, Concept):
                        if (ci.rhs.name, node) not in self.concepts:
                            self.concepts.add((ci.rhs.name, node))
                            changed = True
                    elif not self.has_basic(node, ci.rhs):
                        d = self._node_depth(node)
                        if d < self.depth:
                            self.counter += 1
                            y = Null(self.counter, d + 1)
                            self.parent[y] = y
                            self._add_role(ci.rhs.role, node, y)
                            changed = True
            if not changed:
                break

    # -- verdicts

    def consistent(self) -> bool:
        for a in self.tbox:
            if isinstance(a, ConceptInclusion) and isinstance(a.rhs, Neg):
                for node in self.nodes():
                    if self.has_basic(node, a.lhs) and self.has_basic(node, a.rhs.inner):
                        return False
            if isinstance(a, RoleInclusion) and isinstance(a.rhs, Neg):
                if self.pairs(a.lhs) & self.pairs(a.rhs.inner):
                    return False
        return True

    def named_classes(self) -> dict:
        out: dict = {}
        for t in self.named:
            out.setdefault(self.find(t), set()).add(t)
        return out

    def answers(self, q: UCQ) -> set:
        """Certain answers over the named terms, by homomorphism search."""
        classes = self.named_classes()
        out = set()
        for cq in q.cqs:
            for sub in self._homs(cq):
                vals = [sub[v] for v in q.free]
                if not all(v in classes for v in vals):
                    continue
                out.update(itertools.product(*(sorted(classes[v]) for v in vals)))
        return out

    def _homs(self, cq: CQ):
        atoms = list(cq.body)

        def val(a, sub):
            if isinstance(a, Var):
                return sub.get(a)
            return self.find(a) if a in self.parent else a

        def go(i, sub):
            if i == len(atoms):
                yield dict(sub)
                return
            at = atoms[i]
            if len(at.args) == 1:
                cands = [(x,) for c, x in self.concepts if c == at.pred]
            else:
                cands = [(x, y) for p, x, y in self.roles if p == at.pred]
            for cand in cands:
                new = dict(sub)
                ok = True
                for a, c in zip(at.args, cand):
                    v = val(a, new)
                    if v is None:
                        new[a] = c
                    elif v != c:
                        ok = False
                        break
                if ok:
                    yield from go(i + 1, new)

        yield from go(0, {})

    def entails_eq(self, a: Term, b: Term) -> bool:
        if a in self.parent and b in self.parent:
            return self.find(a) == self.find(b)
        return a == b


# ------------------------------------------------------ random instances

CONCEPTS = ("A", "B", "C")
ROLES = ("P", "S")
INDIVIDUALS = ("a", "b", "c", "d")

# Shortest chains to a violation never repeat the role that generated a null.
CONSISTENCY_DEPTH = 2 * len(ROLES) + 1


def random_basic(rng: random.Random):
    if rng.random() < 0.5:
        return Concept(rng.choice(CONCEPTS))
    return SomeRole(Role(rng.choice(ROLES), rng.random() < 0.5))


def random_role(rng: random.Random) -> Role:
    return Role(rng.choice(ROLES), rng.random() < 0.5)


def random_tbox(rng: random.Random) -> TBox:
    while True:
        out = set()
        for _ in range(rng.randint(0, 4)):
            kind = rng.random()
            if kind < 0.55:
                out.add(ConceptInclusion(random_basic(rng), random_basic(rng)))
            elif kind < 0.75:
                out.add(ConceptInclusion(random_basic(rng), Neg(random_basic(rng))))
            elif kind < 0.9:
                out.add(RoleInclusion(random_role(rng), random_role(rng)))
            else:
                out.add(RoleInclusion(random_role(rng), Neg(random_role(rng))))
        if rng.random() < 0.5:
            out.add(Functional(random_role(rng)))
        functional = {a.role.name for a in out if isinstance(a, Functional)}
        if any(isinstance(a, RoleInclusion) and not isinstance(a.rhs, Neg) and a.rhs.name in functional for a in out):
            continue
        return TBox(frozenset(out))


def random_term(rng: random.Random) -> Term:
    c = const(rng.choice(INDIVIDUALS))
    return func("f", c) if rng.random() < 0.15 else c


def random_abox(rng: random.Random) -> frozenset:
    out = set()
    for _ in range(rng.randint(0, 6)):
        kind = rng.random()
        if kind < 0.4:
            out.add(Atom(rng.choice(CONCEPTS), (random_term(rng),)))
        elif kind < 0.8:
            out.add(Atom(rng.choice(ROLES), (random_term(rng), random_term(rng))))
        else:
            out.add(Eq(random_term(rng), random_term(rng)))
    return frozenset(out)


def random_cq(rng: random.Random) -> UCQ:
    names = [Var("x"), Var("y"), Var("z")]

    def arg():
        return const(rng.choice(INDIVIDUALS)) if rng.random() < 0.15 else rng.choice(names)

    while True:
        body = []
        for _ in range(rng.randint(1, 3)):
            if rng.random() < 0.5:
                body.append(Atom(rng.choice(CONCEPTS), (arg(),)))
            else:
                body.append(Atom(rng.choice(ROLES), (arg(), arg())))
        used = sorted({a for at in body for a in at.args if isinstance(a, Var)})
        if not used and rng.random() < 0.7:
            continue
        k = rng.randint(0, len(used))
        free = tuple(sorted(rng.sample(used, k)))
        return UCQ(free, (CQ(free, tuple(body)),))


# ------------------------------------------------------ Turing machines


def simulate_tm(machine: dict, max_steps: int) -> int | None:
    """Run a deterministic single-tape machine; steps to reach the final
    state, or None if it does not within ``max_steps``."""
    delta = {(t["state"], t["read"]): t for t in machine["transitions"]}
    tape: dict = {}
    pos = 0
    state = machine["initial"]
    for step in range(max_steps + 1):
        if state == machine["final"]:
            return step
        t = delta.get((state, tape.get(pos, machine["blank"])))
        if t is None:
            return None
        tape[pos] = t["write"]
        pos += 1 if t["move"] == "R" else -1
        state = t["next"]
    return None


# ------------------------------------------------- explicit-state KAB runs


class ExplicitKab:
    """Brute-force run of a function-free KAB: every query is answered on
    the truncated chase, every ECQ by enumerating assignments over the
    active domain, and states are kept up to their certain facts."""

    def __init__(self, spec, depth: int = 2, max_states: int = 500) -> None:
        self.spec = spec
        self.names = sorted(spec.alphabet)
        self.states: list = []  # ChaseModel per state
        self.keys: dict = {}
        self.succ: list = []
        start = self._intern(frozenset(spec.abox0), depth)
        queue = [start]
        while queue:
            s = queue.pop(0)
            m = self.states[s]
            for rule in spec.process:
                act = spec.action(rule.action)
                for env in self.assignments(m, rule.condition, {}):
                    theta = {p: env[a] for p, a in zip(act.params, rule.args)}
                    nxt = self.step(m, act, theta)
                    probe = ChaseModel(spec.tbox, nxt, depth)
                    if not probe.consistent():
                        continue
                    before = len(self.states)
                    d = self._intern(nxt, depth)
                    self.succ[s].add(d)
                    if len(self.states) > before:
                        assert len(self.states) <= max_states
                        queue.append(d)

    # -- states

    def key(self, m: ChaseModel) -> tuple:
        facts = set()
        for n in self.names:
            for arity in (1, 2):
                vs = (Var("x"), Var("y"))[:arity]
                facts |= {(n, t) for t in m.answers(UCQ(vs, (CQ(vs, (Atom(n, vs),)),)))}
        part = frozenset(frozenset(c) for c in m.named_classes().values())
        return frozenset(facts), part

    def _intern(self, abox, depth: int) -> int:
        m = ChaseModel(self.spec.tbox, abox, depth)
        k = self.key(m)
        if k not in self.keys:
            self.keys[k] = len(self.states)
            self.states.append(m)
            self.succ.append(set())
        return self.keys[k]

    # -- queries

    def truth(self, m: ChaseModel, q, env: dict) -> bool:
        from kabcheck.model import And, EqAtom, Exists, Not, UcqAtom

        if isinstance(q, UcqAtom):
            row = tuple(env[v] for v in q.ucq.free)
            return row in m.answers(q.ucq)
        if isinstance(q, EqAtom):
            a, b = (env.get(t, t) for t in (q.left, q.right))
            return m.entails_eq(a, b)
        if isinstance(q, Not):
            return not self.truth(m, q.body, env)
        if isinstance(q, And):
            return all(self.truth(m, p, env) for p in q.parts)
        if isinstance(q, Exists):
            return any(self.truth(m, q.body, {**env, q.var: t}) for t in sorted(m.named))
        raise TypeError(q)

    def assignments(self, m: ChaseModel, q, env: dict) -> list[dict]:
        from kabcheck.model import free_vars

        open_ = sorted(v for v in free_vars(q) if v not in env)
        out = []
        for combo in itertools.product(sorted(m.named), repeat=len(open_)):
            full = {**env, **dict(zip(open_, combo))}
            if self.truth(m, q, full):
                out.append(full)
        return out

    def step(self, m: ChaseModel, act, theta: dict) -> frozenset:
        from kabcheck.model import And, UcqAtom

        out = set()
        for cls in m.named_classes().values():
            rep = min(cls)
            out |= {Eq(t, rep) for t in cls if t != rep}
        for e in act.all_effects:
            cond = And((UcqAtom(e.q_plus), e.q_minus))
            for env in self.assignments(m, cond, theta):
                for h in e.head:
                    if isinstance(h, Eq):
                        out.add(Eq(env.get(h.left, h.left), env.get(h.right, h.right)))
                    else:
                        assert all(isinstance(a, (Var, Term)) for a in h.args), "function-free only"
                        out.add(Atom(h.pred, tuple(env.get(a, a) for a in h.args)))
        return frozenset(out)

    # -- CTL-style checks on the explicit graph

    def holds(self, s: int, q, env: dict | None = None) -> bool:
        return self.truth(self.states[s], q, env or {})

    def reachable(self, s: int) -> set:
        seen, todo = {s}, [s]
        while todo:
            for d in self.succ[todo.pop()]:
                if d not in seen:
                    seen.add(d)
                    todo.append(d)
        return seen

    def always_globally(self, s: int, pred) -> bool:
        return all(pred(t) for t in self.reachable(s))

    def exists_finally(self, s: int, pred) -> bool:
        return any(pred(t) for t in self.reachable(s))

    def always_finally(self, s: int, pred) -> bool:
        """Fails iff some path avoiding ``pred`` runs forever, that is, it
        reaches a cycle inside the states where ``pred`` is false."""
        bad = {t for t in self.reachable(s) if not pred(t)}
        if s not in bad:
            return True
        # shrink to the states that have a bad successor, until stable
        alive = set(bad)
        while True:
            keep = {t for t in alive if self.succ[t] & alive}
            if keep == alive:
                break
            alive = keep
        # alive states lie on or lead to an infinite bad path
        seen, todo = {s}, [s]
        while todo:
            t = todo.pop()
            if t in alive:
                return False
            for d in self.succ[t] & bad:
                if d not in seen:
                    seen.add(d)
                    todo.append(d)
        return True


# ------------------------------------------------------ random specs


def random_spec(rng: random.Random):
    """A well-formed KAB over the random vocabulary; query constants are
    declared so that the text form reads them back as constants."""
    from dataclasses import replace

    from kabcheck.model import TRUE, FTerm
    from kabcheck.spec import ActionDef, EffectSpec, KabSpec, ProcessRule, copy_effects_for

    tbox, abox = random_tbox(rng), random_abox(rng)
    actions, rules, consts = [], [], set()
    for i in range(rng.randint(1, 3)):
        effects = []
        for _ in range(rng.randint(1, 2)):
            q = random_cq(rng)
            if not q.free:
                continue
            consts |= {a.name for at in q.cqs[0].body for a in at.args if isinstance(a, Term)}
            v = q.free
            if rng.random() < 0.5:
                head = (Atom("A", (v[0],)),)
            else:
                head = (Atom("P", (v[0], FTerm("f", (v[-1],)))),)
            effects.append(EffectSpec(q, TRUE, head))
        actions.append(ActionDef(f"Act{i}", (), tuple(effects), rng.random() < 0.5))
        rules.append(ProcessRule(TRUE, f"Act{i}", ()))
    draft = KabSpec(tbox, abox, tuple(actions), tuple(rules), (("f", 1),), frozenset(consts))
    lam, ar = draft.alphabet, draft.arities
    actions = [replace(a, copy_effects=copy_effects_for(lam, ar) if a.copy_all else ()) for a in actions]
    return replace(draft, actions=tuple(actions))
