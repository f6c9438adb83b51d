"""DL-Lite reasoning without the unique name assumption.

Equality saturation (explicit equalities, functionality, congruence),
consistency, entailment, certain answers of UCQs and evaluation of ECQs
under active-domain semantics.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Iterator

from .errors import InconsistentKB
from .model import (
    UCQ,
    And,
    Atom,
    Concept,
    ConceptInclusion,
    Eq,
    EqAtom,
    Exists,
    Functional,
    Not,
    Role,
    RoleInclusion,
    SomeRole,
    TBox,
    Term,
    UcqAtom,
    Var,
    adom,
    free_vars,
    func,
)
from .rewriting import rewrite_ucq

# ------------------------------------------------------------ TBox views


@dataclass(frozen=True)
class TBoxIndex:
    """Precomputed closures of a TBox used by saturation and consistency."""

    sub_roles: dict  # Role -> frozenset of Roles S with S ⊑* R
    super_roles: dict  # Role -> frozenset of Roles S with R ⊑* S
    closure: dict  # basic -> frozenset of basics it implies (incl. itself)
    concept_nis: frozenset  # frozenset({B1, B2}) pairs
    role_nis: frozenset  # (R1, R2) ordered pairs, closed under inversion and symmetry
    functional: tuple  # Roles
    unsat: frozenset  # unsatisfiable basics

    def basic_closure(self, b) -> frozenset:
        return self.closure.get(b, frozenset((b,)))

    def subs(self, r: Role) -> frozenset:
        return self.sub_roles.get(r, frozenset((r,)))


def _reach(edges: dict, start) -> frozenset:
    seen = {start}
    todo = [start]
    while todo:
        x = todo.pop()
        for y in edges.get(x, ()):
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return frozenset(seen)


@lru_cache(maxsize=256)
def tbox_index(tbox: TBox) -> TBoxIndex:
    role_up: dict = {}
    basic_up: dict = {}
    concept_nis = set()
    role_nis = set()
    roles = set()
    basics = set()
    for name in tbox.role_names:
        roles |= {Role(name), Role(name, True)}
        basics |= {SomeRole(Role(name)), SomeRole(Role(name, True))}
    for name in tbox.concept_names:
        basics.add(Concept(name))
    for a in tbox:
        if isinstance(a, RoleInclusion):
            lhs = a.lhs
            if a.negative:
                rhs = a.rhs.inner
                for x, y in ((lhs, rhs), (lhs.inv(), rhs.inv())):
                    role_nis.add((x, y))
                    role_nis.add((y, x))
            else:
                rhs = a.rhs
                role_up.setdefault(lhs, set()).add(rhs)
                role_up.setdefault(lhs.inv(), set()).add(rhs.inv())
                basic_up.setdefault(SomeRole(lhs), set()).add(SomeRole(rhs))
                basic_up.setdefault(SomeRole(lhs.inv()), set()).add(SomeRole(rhs.inv()))
        elif isinstance(a, ConceptInclusion):
            if a.negative:
                concept_nis.add(frozenset((a.lhs, a.rhs.inner)))
            else:
                basic_up.setdefault(a.lhs, set()).add(a.rhs)
    super_roles = {r: _reach(role_up, r) for r in roles}
    sub_roles: dict = {r: set() for r in roles}
    for r, sups in super_roles.items():
        for s in sups:
            sub_roles.setdefault(s, set()).add(r)
    closure = {b: _reach(basic_up, b) for b in basics}

    def clash(types: frozenset) -> bool:
        return any(pair <= types for pair in concept_nis)

    def role_unsat(r: Role) -> bool:
        sups = super_roles.get(r, frozenset((r,)))
        return any((x, y) in role_nis for x in sups for y in sups)

    unsat = {b for b in basics if clash(closure[b])}
    unsat |= {SomeRole(r) for r in roles if role_unsat(r)}
    changed = True
    while changed:
        changed = False
        for b in basics:
            if b in unsat:
                continue
            cl = closure[b]
            bad = any(c in unsat for c in cl) or any(
                isinstance(c, SomeRole) and SomeRole(c.role.inv()) in unsat for c in cl
            )
            if bad:
                unsat.add(b)
                changed = True
    functional = tuple(sorted(a.role for a in tbox if isinstance(a, Functional)))
    return TBoxIndex(
        sub_roles={r: frozenset(s) for r, s in sub_roles.items()},
        super_roles=super_roles,
        closure=closure,
        concept_nis=frozenset(concept_nis),
        role_nis=frozenset(role_nis),
        functional=functional,
        unsat=frozenset(unsat),
    )


# ------------------------------------------------------------ saturation


class _UnionFind:
    def __init__(self, items: Iterable[Term]) -> None:
        self.parent = {t: t for t in items}

    def find(self, x: Term) -> Term:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: Term, b: Term) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


@dataclass(eq=False)
class SaturatedAbox:
    """An ABox together with its equality closure and a representative-level
    index of its concept and role assertions."""

    tbox: TBox
    abox: frozenset
    adom: frozenset
    _rep: dict = field(repr=False)
    classes: dict = field(repr=False)  # rep -> sorted tuple of adom members
    concepts: dict = field(repr=False)  # pred -> frozenset of reps
    roles: dict = field(repr=False)  # pred -> frozenset of (rep, rep)
    _sig: dict = field(repr=False)  # (fn, rep args) -> rep

    # -- equality

    def rep_of(self, t: Term) -> Term:
        """Canonical representative of ``t``; terms outside the closure are
        normalized by congruence over their arguments."""
        r = self._rep.get(t)
        if r is not None:
            return r
        if not t.args:
            return t
        args = tuple(self.rep_of(a) for a in t.args)
        hit = self._sig.get((t.name, args))
        if hit is not None:
            return hit
        return func(t.name, *args)

    def members(self, rep: Term) -> tuple:
        return self.classes.get(rep, (rep,))

    @cached_property
    def reps(self) -> tuple:
        return tuple(sorted(self.classes))

    @cached_property
    def rep_set(self) -> frozenset:
        return frozenset(self.classes)

    def equal(self, a: Term, b: Term) -> bool:
        return self.rep_of(a) == self.rep_of(b)

    def equalities(self) -> frozenset:
        """EQ(T, A): member = representative for each non-singleton class."""
        out = set()
        for rep, ms in self.classes.items():
            for m in ms:
                if m != rep:
                    out.add(Eq(m, rep))
        return frozenset(out)

    def partition(self) -> frozenset:
        return frozenset(frozenset(ms) for ms in self.classes.values())

    # -- facts

    @cached_property
    def facts(self) -> frozenset:
        """Concept and role assertions rewritten over representatives."""
        out = set()
        for p, xs in self.concepts.items():
            out.update(Atom(p, (x,)) for x in xs)
        for p, xs in self.roles.items():
            out.update(Atom(p, xy) for xy in xs)
        return frozenset(out)

    @cached_property
    def by_first(self) -> dict:
        idx: dict = {}
        for p, pairs in self.roles.items():
            d = idx.setdefault(p, {})
            for a, b in pairs:
                d.setdefault(a, set()).add(b)
        return idx

    @cached_property
    def by_second(self) -> dict:
        idx: dict = {}
        for p, pairs in self.roles.items():
            d = idx.setdefault(p, {})
            for a, b in pairs:
                d.setdefault(b, set()).add(a)
        return idx

    @cached_property
    def index(self) -> TBoxIndex:
        return tbox_index(self.tbox)

    def role_pairs(self, r: Role) -> frozenset:
        """Pairs entailed for role expression ``r`` between representatives."""
        return _role_pairs(self.roles, self.index, r)

    @cached_property
    def types(self) -> dict:
        """rep -> entailed basic concepts (closed under the TBox)."""
        base: dict = {r: set() for r in self.classes}
        for p, xs in self.concepts.items():
            for x in xs:
                base[x].add(Concept(p))
        for p, pairs in self.roles.items():
            for a, b in pairs:
                base[a].add(SomeRole(Role(p)))
                base[b].add(SomeRole(Role(p, True)))
        idx = self.index
        out = {}
        for r, bs in base.items():
            cl: set = set()
            for b in bs:
                cl |= idx.basic_closure(b)
            out[r] = frozenset(cl)
        return out

    @cached_property
    def is_consistent(self) -> bool:
        idx = self.index
        for types in self.types.values():
            if any(b in idx.unsat for b in types):
                return False
            if any(pair <= types for pair in idx.concept_nis):
                return False
        for r1, r2 in idx.role_nis:
            if self.role_pairs(r1) & self.role_pairs(r2):
                return False
        return True

    def entails_atom(self, at: Atom) -> bool:
        if at.is_concept:
            r = self.rep_of(at.args[0])
            return Concept(at.pred) in self.types.get(r, ())
        a, b = (self.rep_of(t) for t in at.args)
        return (a, b) in self.role_pairs(Role(at.pred))


def _role_pairs(roles: dict, idx: TBoxIndex, r: Role) -> frozenset:
    out = set()
    for s in idx.subs(r):
        pairs = roles.get(s.name, ())
        if s.inverse:
            out.update((b, a) for a, b in pairs)
        else:
            out.update(pairs)
    return frozenset(out)


@lru_cache(maxsize=8192)
def saturate(tbox: TBox, abox: frozenset) -> SaturatedAbox:
    """Close the equalities of ``abox`` under functionality and congruence."""
    abox = frozenset(abox)
    dom = adom(abox)
    universe = set()
    for t in dom:
        universe.update(t.subterms())
    uf = _UnionFind(universe)
    for a in abox:
        if isinstance(a, Eq):
            uf.union(a.left, a.right)
    atoms = [a for a in abox if isinstance(a, Atom)]
    fterms = [t for t in universe if t.args]
    idx = tbox_index(tbox)
    while True:
        changed = False
        sig: dict = {}
        for t in fterms:
            key = (t.name, tuple(uf.find(a) for a in t.args))
            other = sig.setdefault(key, t)
            if other is not t and uf.union(other, t):
                changed = True
        if idx.functional:
            roles = _rep_roles(atoms, uf.find)
            for r in idx.functional:
                succ: dict = {}
                for a, b in _role_pairs(roles, idx, r):
                    first = succ.setdefault(a, b)
                    if first != b and uf.union(first, b):
                        changed = True
        if not changed:
            break
    # representatives: least adom member of each class
    by_root: dict = {}
    for t in universe:
        by_root.setdefault(uf.find(t), []).append(t)
    rep: dict = {}
    classes: dict = {}
    for root, ms in by_root.items():
        in_dom = sorted(m for m in ms if m in dom)
        r = in_dom[0] if in_dom else min(ms)
        for m in ms:
            rep[m] = r
        if in_dom:
            classes[r] = tuple(in_dom)
    concepts: dict = {}
    for at in atoms:
        if at.is_concept:
            concepts.setdefault(at.pred, set()).add(rep[at.args[0]])
    roles = _rep_roles(atoms, rep.__getitem__)
    sig = {}
    for t in fterms:
        sig[(t.name, tuple(rep[a] for a in t.args))] = rep[t]
    return SaturatedAbox(
        tbox=tbox,
        abox=abox,
        adom=dom,
        _rep=rep,
        classes=classes,
        concepts={p: frozenset(xs) for p, xs in concepts.items()},
        roles=roles,
        _sig=sig,
    )


def _rep_roles(atoms, find) -> dict:
    roles: dict = {}
    for at in atoms:
        if not at.is_concept:
            roles.setdefault(at.pred, set()).add((find(at.args[0]), find(at.args[1])))
    return {p: frozenset(xs) for p, xs in roles.items()}


def is_consistent(tbox: TBox, abox: Iterable) -> bool:
    return saturate(tbox, frozenset(abox)).is_consistent


def _consistent_sat(tbox: TBox, abox: Iterable) -> SaturatedAbox:
    sat = saturate(tbox, frozenset(abox))
    if not sat.is_consistent:
        raise InconsistentKB("the knowledge base is inconsistent")
    return sat


def entails(tbox: TBox, abox: Iterable, alpha) -> bool:
    """(T, A) ⊨ alpha. An inconsistent KB entails everything; use
    :func:`is_consistent` to tell the two cases apart."""
    sat = saturate(tbox, frozenset(abox))
    if not sat.is_consistent:
        return True
    return sat_entails(sat, alpha)


def sat_entails(sat: SaturatedAbox, alpha) -> bool:
    if isinstance(alpha, Eq):
        return sat.equal(alpha.left, alpha.right)
    return sat.entails_atom(alpha)


def abox_equivalent(a1: Iterable, a2: Iterable, tbox: TBox, lam: Iterable[str]) -> bool:
    """A1 ≡_{T,Λ} A2: each entails the other's Λ-assertions and equalities."""
    s1 = saturate(tbox, frozenset(a1))
    s2 = saturate(tbox, frozenset(a2))
    return sat_equivalent(s1, s2, frozenset(lam))


def sat_equivalent(s1: SaturatedAbox, s2: SaturatedAbox, lam: frozenset) -> bool:
    def covers(s: SaturatedAbox, other: SaturatedAbox) -> bool:
        for a in other.abox:
            if isinstance(a, Atom) and a.pred not in lam:
                continue
            if not sat_entails(s, a):
                return False
        return True

    return covers(s1, s2) and covers(s2, s1)


# ------------------------------------------------------- UCQ evaluation


def _match_cq(sat: SaturatedAbox, cq, free: tuple, env: dict) -> Iterator[tuple]:
    """Evaluate one rewritten CQ over representative facts.

    ``env`` maps some free variables to representatives. Yields tuples of
    representatives aligned with ``free``.
    """
    binding: dict = {}
    for v, h in zip(free, cq.head):
        if v in env:
            val = env[v]
            if isinstance(h, Term):
                if sat.rep_of(h) != val:
                    return
            elif binding.setdefault(h, val) != val:
                return
    body = []
    for at in cq.body:
        body.append((at.pred, tuple(sat.rep_of(a) if isinstance(a, Term) else a for a in at.args)))
    yield from _join(sat, body, binding, cq, free, env)


def _join(sat, atoms, binding, cq, free, env):
    if not atoms:
        out = []
        for v, h in zip(free, cq.head):
            if v in env:
                out.append(env[v])
            elif isinstance(h, Term):
                r = sat.rep_of(h)
                if r not in sat.rep_set:
                    return
                out.append(r)
            else:
                out.append(binding[h])
        yield tuple(out)
        return

    def value(a):
        return binding.get(a) if isinstance(a, Var) else a

    # pick the most constrained atom
    best = max(range(len(atoms)), key=lambda i: sum(value(a) is not None for a in atoms[i][1]))
    pred, args = atoms[best]
    rest = atoms[:best] + atoms[best + 1 :]
    if len(args) == 1:
        (x,) = args
        vx = value(x)
        xs = sat.concepts.get(pred, frozenset())
        if vx is not None:
            if vx in xs:
                yield from _join(sat, rest, binding, cq, free, env)
            return
        for c in sorted(xs):
            binding[x] = c
            yield from _join(sat, rest, binding, cq, free, env)
        binding.pop(x, None)
        return
    x, y = args
    vx, vy = value(x), value(y)
    if vx is not None and vy is not None:
        if (vx, vy) in sat.roles.get(pred, ()):
            yield from _join(sat, rest, binding, cq, free, env)
        return
    if vx is not None:
        cands = [(vx, b) for b in sat.by_first.get(pred, {}).get(vx, ())]
    elif vy is not None:
        cands = [(a, vy) for a in sat.by_second.get(pred, {}).get(vy, ())]
    else:
        cands = sat.roles.get(pred, ())
    for a, b in sorted(cands):
        saved = dict(binding)
        if x == y:
            if a != b:
                continue
            binding[x] = a
        else:
            if vx is None:
                binding[x] = a
            if vy is None:
                binding[y] = b
        yield from _join(sat, rest, binding, cq, free, env)
        binding.clear()
        binding.update(saved)


def ucq_rep_answers(sat: SaturatedAbox, q: UCQ, env: dict) -> set:
    """Certain answers of ``q`` as representative tuples aligned with
    ``q.free``; env-bound positions carry the env value."""
    rq = rewrite_ucq(sat.tbox, q)
    out: set = set()
    for cq in rq.cqs:
        out.update(_match_cq(sat, cq, rq.free, env))
    return out


def certain_answers_ucq(q: UCQ, tbox: TBox, abox: Iterable) -> set:
    """ANS(q, T, A) as a set of tuples over adom(A), aligned with ``q.free``."""
    sat = _consistent_sat(tbox, abox)
    out = set()
    for row in ucq_rep_answers(sat, q, {}):
        out.update(itertools.product(*(sat.members(r) for r in row)))
    return out


# ------------------------------------------------------- ECQ evaluation


@dataclass(frozen=True)
class Rel:
    """A relation over representatives with named columns."""

    cols: tuple
    rows: frozenset


_UNIT = Rel((), frozenset({()}))
_EMPTY_UNIT = Rel((), frozenset())


def _project(rel: Rel, cols: tuple) -> Rel:
    pos = [rel.cols.index(c) for c in cols]
    return Rel(cols, frozenset(tuple(r[i] for i in pos) for r in rel.rows))


def _join_rel(a: Rel, b: Rel) -> Rel:
    shared = [c for c in a.cols if c in b.cols]
    extra = [c for c in b.cols if c not in a.cols]
    bi_shared = [b.cols.index(c) for c in shared]
    bi_extra = [b.cols.index(c) for c in extra]
    ai_shared = [a.cols.index(c) for c in shared]
    table: dict = {}
    for r in b.rows:
        table.setdefault(tuple(r[i] for i in bi_shared), []).append(tuple(r[i] for i in bi_extra))
    rows = set()
    for r in a.rows:
        for ext in table.get(tuple(r[i] for i in ai_shared), ()):
            rows.add(r + ext)
    return Rel(a.cols + tuple(extra), frozenset(rows))


def _complement(sat: SaturatedAbox, rel: Rel) -> Rel:
    every = itertools.product(sat.reps, repeat=len(rel.cols))
    return Rel(rel.cols, frozenset(r for r in every if r not in rel.rows))


def _ordered_cols(vars_: Iterable[Var]) -> tuple:
    return tuple(sorted(set(vars_)))


def eval_rel(sat: SaturatedAbox, q, env: dict) -> Rel:
    """Evaluate ECQ ``q`` with ``env`` (var -> representative)."""
    if isinstance(q, UcqAtom):
        cols = _ordered_cols(v for v in q.ucq.free if v not in env)
        rows = ucq_rep_answers(sat, q.ucq, env)
        rel = Rel(q.ucq.free, frozenset(rows))
        return _project(rel, cols)
    if isinstance(q, EqAtom):
        return _eval_eq(sat, q, env)
    if isinstance(q, Not):
        return _complement(sat, eval_rel(sat, q.body, env))
    if isinstance(q, And):
        return _eval_and(sat, q.parts, env)
    if isinstance(q, Exists):
        inner_env = {k: v for k, v in env.items() if k != q.var}
        rel = eval_rel(sat, q.body, inner_env)
        if q.var not in rel.cols:
            if not sat.reps:
                return Rel(rel.cols, frozenset())
            return rel
        return _project(rel, tuple(c for c in rel.cols if c != q.var))
    raise TypeError(f"not an ECQ node: {q!r}")


def _eval_eq(sat: SaturatedAbox, q: EqAtom, env: dict) -> Rel:
    def side(a):
        if isinstance(a, Var):
            return (a, None) if a not in env else (None, env[a])
        return (None, sat.rep_of(a))

    (lv, lval), (rv, rval) = side(q.left), side(q.right)
    if lv is None and rv is None:
        return _UNIT if lval == rval else _EMPTY_UNIT
    if lv is not None and rv is not None:
        if lv == rv:
            return Rel((lv,), frozenset((r,) for r in sat.reps))
        cols = _ordered_cols((lv, rv))
        return Rel(cols, frozenset((r, r) for r in sat.reps))
    var, val = (lv, rval) if lv is not None else (rv, lval)
    if val in sat.rep_set:
        return Rel((var,), frozenset({(val,)}))
    return Rel((var,), frozenset())


def _eval_and(sat: SaturatedAbox, parts: tuple, env: dict) -> Rel:
    positive = [p for p in parts if not isinstance(p, Not)]
    negative = [p for p in parts if isinstance(p, Not)]
    rel = _UNIT
    # positive conjuncts, cheapest-looking first
    for p in sorted(positive, key=lambda p: isinstance(p, EqAtom)):
        rel = _join_rel(rel, eval_rel(sat, p, env))
        if not rel.rows:
            break
    for p in negative:
        needed = free_vars(p) - set(env)
        if not rel.rows:
            break
        if needed <= set(rel.cols):
            body = eval_rel(sat, p.body, env)
            pos = [rel.cols.index(c) for c in body.cols]
            rel = Rel(rel.cols, frozenset(r for r in rel.rows if tuple(r[i] for i in pos) not in body.rows))
        else:
            rel = _join_rel(rel, eval_rel(sat, p, env))
    cols = _ordered_cols(set(rel.cols))
    return _project(rel, cols)


def eval_ecq(q, tbox: TBox, abox: Iterable, sigma: dict | None = None) -> list[dict]:
    """All completions of ``sigma`` over adom(A) under which ``q`` holds."""
    sat = _consistent_sat(tbox, abox)
    return sat_eval_ecq(sat, q, sigma or {})


def sat_eval_ecq(sat: SaturatedAbox, q, sigma: dict) -> list[dict]:
    env = {v: sat.rep_of(t) for v, t in sigma.items()}
    rel = eval_rel(sat, q, env)
    out = []
    for row in sorted(rel.rows):
        for combo in itertools.product(*(sat.members(r) for r in row)):
            d = dict(sigma)
            d.update(zip(rel.cols, combo))
            out.append(d)
    return out


def holds(sat: SaturatedAbox, q, sigma: dict) -> bool:
    """Boolean evaluation of ``q`` whose free variables are all bound."""
    env = {v: sat.rep_of(t) for v, t in sigma.items()}
    return bool(eval_rel(sat, q, env).rows)
