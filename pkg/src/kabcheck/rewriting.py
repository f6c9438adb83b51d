"""UCQ reformulation w.r.t. the positive inclusions of a DL-Lite TBox.

The algorithm is the classic PerfectRef scheme: atoms are rewritten
right-to-left through positive inclusions and pairs of unifiable atoms are
reduced, until no new conjunctive query appears. Queries are deduplicated up
to renaming of their existential variables and CQs subsumed by another CQ of
the result are dropped.
"""
from __future__ import annotations

import itertools
from functools import lru_cache

from .model import (
    CQ,
    UCQ,
    Atom,
    Concept,
    ConceptInclusion,
    Role,
    RoleInclusion,
    SomeRole,
    TBox,
    Term,
    Var,
)

_PERMUTATION_LIMIT = 6


def role_atom(role: Role, a, b) -> Atom:
    """Atom stating that (a, b) is in ``role``."""
    return Atom(role.name, (b, a) if role.inverse else (a, b))


class _Fresh:
    def __init__(self) -> None:
        self.n = 0

    def __call__(self) -> Var:
        self.n += 1
        return Var(f"_r{self.n}")


def _basic_atom(basic, t, fresh: _Fresh) -> Atom:
    if isinstance(basic, Concept):
        return Atom(basic.name, (t,))
    return role_atom(basic.role, t, fresh())


def _positive_inclusions(tbox: TBox):
    cis = [a for a in tbox if isinstance(a, ConceptInclusion) and not a.negative]
    ris = [a for a in tbox if isinstance(a, RoleInclusion) and not a.negative]
    return cis, ris


def _occurrences(head: tuple, body: frozenset) -> dict:
    counts: dict = {}
    for at in body:
        for a in at.args:
            if isinstance(a, Var):
                counts[a] = counts.get(a, 0) + 1
    for a in head:
        if isinstance(a, Var):
            counts[a] = counts.get(a, 0) + 2
    return counts


def _atom_rewrites(atom: Atom, counts: dict, cis, ris, fresh: _Fresh):
    def unbound(a) -> bool:
        return isinstance(a, Var) and counts.get(a, 0) == 1

    if len(atom.args) == 1:
        (x,) = atom.args
        for ci in cis:
            if ci.rhs == Concept(atom.pred):
                yield _basic_atom(ci.lhs, x, fresh)
        return
    x1, x2 = atom.args
    if unbound(x2):
        for ci in cis:
            if ci.rhs == SomeRole(Role(atom.pred)):
                yield _basic_atom(ci.lhs, x1, fresh)
    if unbound(x1):
        for ci in cis:
            if ci.rhs == SomeRole(Role(atom.pred, True)):
                yield _basic_atom(ci.lhs, x2, fresh)
    for ri in ris:
        if ri.rhs == Role(atom.pred):
            yield role_atom(ri.lhs, x1, x2)
        elif ri.rhs == Role(atom.pred, True):
            yield role_atom(ri.lhs, x2, x1)


def _unify(a1: Atom, a2: Atom, head_vars: set):
    """Most general unifier of two atoms, or None."""
    if a1.pred != a2.pred or len(a1.args) != len(a2.args):
        return None
    parent: dict = {}

    def find(x):
        while parent.get(x, x) != x:
            x = parent[x]
        return x

    for s, t in zip(a1.args, a2.args):
        rs, rt = find(s), find(t)
        if rs == rt:
            continue
        if isinstance(rs, Term) and isinstance(rt, Term):
            return None
        # prefer ground terms, then head variables, as class representative
        def rank(x):
            if isinstance(x, Term):
                return (0, x.sort_key)
            return (1 if x in head_vars else 2, x.name)

        keep, drop = (rs, rt) if rank(rs) <= rank(rt) else (rt, rs)
        parent[drop] = keep
    return {x: find(x) for x in parent}


def _apply(sub: dict, args: tuple) -> tuple:
    return tuple(sub.get(a, a) if isinstance(a, Var) else a for a in args)


def canonical(head: tuple, body) -> CQ:
    """Rename existential variables deterministically; sort atoms."""
    head_vars = {a for a in head if isinstance(a, Var)}
    evars = sorted({a for at in body for a in at.args if isinstance(a, Var)} - head_vars)

    def key_of(atoms) -> tuple:
        return tuple(sorted((at.pred, tuple(_arg_key(a) for a in at.args)) for at in atoms))

    def render(mapping):
        atoms = frozenset(Atom(at.pred, _apply(mapping, at.args)) for at in body)
        return key_of(atoms), atoms

    if len(evars) <= _PERMUTATION_LIMIT:
        names = [Var(f"_e{i}") for i in range(len(evars))]
        best = None
        for perm in itertools.permutations(names):
            k, atoms = render(dict(zip(evars, perm)))
            if best is None or k < best[0]:
                best = (k, atoms)
        atoms = best[1]
    else:
        # first-occurrence renaming over a wildcard ordering
        wild = sorted(body, key=lambda at: (at.pred, tuple(_arg_key(a, evars) for a in at.args)))
        mapping: dict = {}
        for at in wild:
            for a in at.args:
                if isinstance(a, Var) and a not in head_vars and a not in mapping:
                    mapping[a] = Var(f"_e{len(mapping)}")
        _, atoms = render(mapping)
    ordered = tuple(sorted(atoms, key=lambda at: (at.pred, tuple(_arg_key(a) for a in at.args))))
    return CQ(tuple(head), ordered)


def _arg_key(a, wild=()) -> tuple:
    if isinstance(a, Term):
        return (0,) + a.sort_key
    if a in wild:
        return (2, "?")
    return (1, a.name)


def _homomorphism(src: CQ, dst: CQ) -> bool:
    """True if ``src`` maps into ``dst`` fixing the head (dst ⊆ src)."""
    sub: dict = {}
    for s, d in zip(src.head, dst.head):
        if isinstance(s, Var):
            if sub.get(s, d) != d:
                return False
            sub[s] = d
        elif s != d:
            return False
    by_pred: dict = {}
    for at in dst.body:
        by_pred.setdefault(at.pred, []).append(at)
    atoms = sorted(src.body, key=lambda at: len(by_pred.get(at.pred, ())))

    def go(i: int, sub: dict) -> bool:
        if i == len(atoms):
            return True
        at = atoms[i]
        for cand in by_pred.get(at.pred, ()):
            new = dict(sub)
            ok = True
            for a, b in zip(at.args, cand.args):
                if isinstance(a, Var):
                    if new.get(a, b) != b:
                        ok = False
                        break
                    new[a] = b
                elif a != b:
                    ok = False
                    break
            if ok and go(i + 1, new):
                return True
        return False

    return go(0, sub)


def prune_subsumed(cqs: list[CQ]) -> list[CQ]:
    ordered = sorted(cqs, key=lambda c: (len(c.body), _cq_key(c)))
    kept: list[CQ] = []
    for c in ordered:
        if any(_homomorphism(k, c) for k in kept):
            continue
        kept.append(c)
    return sorted(kept, key=_cq_key)


def _cq_key(c: CQ) -> tuple:
    return (
        tuple(_arg_key(a) for a in c.head),
        tuple((at.pred, tuple(_arg_key(a) for a in at.args)) for at in c.body),
    )


def rewrite_cq_set(tbox: TBox, cqs) -> list[CQ]:
    cis, ris = _positive_inclusions(tbox)
    fresh = _Fresh()
    seen: dict = {}
    todo = []
    for c in cqs:
        cc = canonical(c.head, frozenset(c.body))
        if cc not in seen:
            seen[cc] = None
            todo.append(cc)
    while todo:
        q = todo.pop()
        head_vars = {a for a in q.head if isinstance(a, Var)}
        body = frozenset(q.body)
        counts = _occurrences(q.head, body)
        produced = []
        for g in body:
            rest = body - {g}
            for new_atom in _atom_rewrites(g, counts, cis, ris, fresh):
                produced.append(canonical(q.head, rest | {new_atom}))
        atoms = sorted(body, key=lambda at: (at.pred, tuple(_arg_key(a) for a in at.args)))
        for g1, g2 in itertools.combinations(atoms, 2):
            sub = _unify(g1, g2, head_vars)
            if sub is None:
                continue
            new_body = frozenset(Atom(at.pred, _apply(sub, at.args)) for at in body)
            produced.append(canonical(_apply(sub, q.head), new_body))
        for cc in produced:
            if cc not in seen:
                seen[cc] = None
                todo.append(cc)
    return prune_subsumed(list(seen))


@lru_cache(maxsize=4096)
def rewrite_ucq(tbox: TBox, q: UCQ) -> UCQ:
    """Reformulate ``q`` so that plain evaluation over an equality-saturated
    ABox yields the certain answers w.r.t. ``tbox``."""
    if not any(isinstance(a, (ConceptInclusion, RoleInclusion)) for a in tbox):
        return UCQ(q.free, tuple(prune_subsumed([canonical(c.head, frozenset(c.body)) for c in q.cqs])))
    return UCQ(q.free, tuple(rewrite_cq_set(tbox, q.cqs)))
