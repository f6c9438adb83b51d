"""KAB normal form and the normalized step.

Normalizing an effect rewrites its condition against the TBox, splits the
resulting union into one effect per disjunct and then makes every join and
constant of the positive part explicit: each variable occurs once in
``q++`` and the removed identifications are collected in ``q=`` as equality
atoms. The Dummy concept keeps terms that only occur in equalities inside
the active domain.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from .model import (
    CQ,
    TRUE,
    UCQ,
    And,
    Atom,
    Eq,
    EqAtom,
    Exists,
    Not,
    TBox,
    UcqAtom,
    Var,
    substitute_atom,
)
from .reasoner import SaturatedAbox, _consistent_sat, sat_eval_ecq
from .rewriting import rewrite_ucq
from .spec import DUMMY, ActionDef, EffectSpec, KabSpec, head_terms
from .engine import GroundAction

_X = Var("x")
DUMMY_COPY = EffectSpec(UCQ((_X,), (CQ((_X,), (Atom(DUMMY, (_X,)),)),)), TRUE, (Atom(DUMMY, (_X,)),))


@dataclass(frozen=True)
class NormalizedKab:
    """The normalized spec plus, for every normalized effect, the index of
    the source effect in ``all_effects`` (None for the Dummy copy) and of
    the disjunct of its rewritten condition."""

    spec: KabSpec
    original: KabSpec
    provenance: dict = field(compare=False, hash=False)

    @property
    def alphabet(self) -> frozenset:
        return self.original.alphabet


# ---------------------------------------------------------------- renaming


def _safe(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_]", "_", text)


class _Names:
    def __init__(self, taken: Iterable[str]) -> None:
        self.taken = set(taken)

    def fresh(self, base: str) -> Var:
        name = base
        while name in self.taken:
            name += "_"
        self.taken.add(name)
        return Var(name)


def split_joins(free: tuple, cq: CQ) -> tuple:
    """Turn one rewritten CQ into ``(q++ as UCQ, q= atoms)``.

    The CQ's head is first aligned with ``free``: a head variable is renamed
    to the free variable at its first position; later repeats and head
    constants become equality atoms.
    """
    names = _Names({v.name for v in cq.vars()} | {v.name for v in free})
    ren: dict = {}
    eqs: list = []
    targets = set(free)
    for f, h in zip(free, cq.head):
        if isinstance(h, Var) and h not in ren:
            ren[h] = f
        else:
            eqs.append(EqAtom(f, ren.get(h, h)))
    # body variables that would collide with a target name move aside
    for v in sorted(cq.vars()):
        if v not in ren and v in targets:
            ren[v] = names.fresh(v.name)
    body = [substitute_atom(a, ren) for a in cq.body]
    head_vars = {ren.get(h, h) for h in cq.head if isinstance(h, Var)}
    existential = {ren.get(v, v) for v in cq.existential()}

    seen: dict = {}
    out: list = []
    answer: set = set()
    for at in body:
        args = []
        for a in at.args:
            if isinstance(a, Var):
                seen[a] = seen.get(a, 0) + 1
                if seen[a] == 1:
                    args.append(a)
                    continue
                nv = names.fresh(f"{a.name}__{seen[a]}")
                eqs.append(EqAtom(a, nv))
                answer |= {a, nv}
                args.append(nv)
            else:
                nv = names.fresh(f"c__{_safe(str(a))}")
                eqs.append(EqAtom(nv, a))
                answer.add(nv)
                args.append(nv)
        out.append(Atom(at.pred, tuple(args)))
    answer |= {v for v in seen if v not in existential}
    answer |= head_vars & set(seen)
    fv = tuple(sorted(answer))
    return UCQ(fv, (CQ(fv, tuple(out)),)), tuple(eqs)


def rewrite_ecq(tbox: TBox, q):
    if isinstance(q, UcqAtom):
        return UcqAtom(rewrite_ucq(tbox, q.ucq))
    if isinstance(q, Not):
        return Not(rewrite_ecq(tbox, q.body))
    if isinstance(q, And):
        return And(tuple(rewrite_ecq(tbox, p) for p in q.parts))
    if isinstance(q, Exists):
        return Exists(q.var, rewrite_ecq(tbox, q.body))
    return q


def _dummy_heads(head: tuple) -> tuple:
    extra = []
    for h in head:
        if isinstance(h, Eq):
            for t in head_terms(h):
                at = Atom(DUMMY, (t,))
                if at not in extra:
                    extra.append(at)
    return tuple(head) + tuple(extra)


def normalize_effect(tbox: TBox, e: EffectSpec) -> list[EffectSpec]:
    rew = rewrite_ucq(tbox, e.q_plus)
    qm = rewrite_ecq(tbox, e.q_minus)
    head = _dummy_heads(e.head)
    out = []
    for cq in rew.cqs:
        qpp, eqs = split_joins(e.q_plus.free, cq)
        parts = eqs + (qm.parts if isinstance(qm, And) else (qm,))
        cond = parts[0] if len(parts) == 1 else And(parts)
        out.append(EffectSpec(qpp, cond, head))
    return out


def normalized_abox0(spec: KabSpec) -> frozenset:
    sat = _consistent_sat(spec.tbox, spec.abox0)
    eqs = {a for a in spec.abox0 if isinstance(a, Eq)} | sat.equalities()
    dummies = {Atom(DUMMY, (t,)) for a in eqs for t in (a.left, a.right)}
    return frozenset(spec.abox0 | sat.equalities() | dummies)


def normalize(spec: KabSpec) -> NormalizedKab:
    actions = []
    prov: dict = {}
    for act in spec.actions:
        effects = []
        for i, e in enumerate(act.all_effects):
            for j, ne in enumerate(normalize_effect(spec.tbox, e)):
                prov[(act.name, len(effects))] = (i, j)
                effects.append(ne)
        prov[(act.name, len(effects))] = (None, 0)
        effects.append(DUMMY_COPY)
        actions.append(ActionDef(act.name, act.params, tuple(effects)))
    nspec = KabSpec(
        tbox=spec.tbox,
        abox0=normalized_abox0(spec),
        actions=tuple(actions),
        process=spec.process,
        functions=spec.functions,
        constants=spec.constants,
    )
    return NormalizedKab(nspec, spec, prov)


# ------------------------------------------------------------ DO_NORM


def _plain_facts(sat: SaturatedAbox) -> dict:
    """pred -> set of representative tuples of the stored assertions, with
    no TBox inference (the equality-free view of the ABox)."""
    out = sat.__dict__.get("_plain")
    if out is None:
        out = {}
        for a in sat.abox:
            if isinstance(a, Atom):
                out.setdefault(a.pred, set()).add(tuple(sat.rep_of(t) for t in a.args))
        sat.__dict__["_plain"] = out
    return out


def plain_match(sat: SaturatedAbox, q: UCQ, env: dict) -> set:
    """Answers of a constant-free CQ by plain matching over representative
    facts; rows list the non-``env`` free variables in order."""
    facts = _plain_facts(sat)
    cols = tuple(v for v in q.free if v not in env)
    rows: set = set()
    for cq in q.cqs:
        atoms = sorted(cq.body, key=lambda a: len(facts.get(a.pred, ())))

        def go(i: int, b: dict) -> None:
            if i == len(atoms):
                rows.add(tuple(b[v] for v in cols))
                return
            at = atoms[i]
            for tup in facts.get(at.pred, ()):
                nb = b
                ok = True
                for arg, val in zip(at.args, tup):
                    cur = nb.get(arg)
                    if cur is None:
                        if nb is b:
                            nb = dict(b)
                        nb[arg] = val
                    elif cur != val:
                        ok = False
                        break
                if ok:
                    go(i + 1, nb)

        go(0, dict(env))
    return rows


def apply_norm(sat: SaturatedAbox, e: EffectSpec, theta: dict) -> set:
    env = {v: sat.rep_of(t) for v, t in theta.items()}
    cols = tuple(v for v in e.q_plus.free if v not in env)
    out = set()
    for row in plain_match(sat, e.q_plus, env):
        sigma = dict(theta)
        sigma.update(zip(cols, row))
        for sub in sat_eval_ecq(sat, e.q_minus, sigma):
            for h in e.head:
                out.add(substitute_atom(h, sub))
    return out


def norm_step_in(sat: SaturatedAbox, action: ActionDef, theta: dict) -> frozenset:
    out = set(sat.equalities())
    for e in action.all_effects:
        out |= apply_norm(sat, e, theta)
    return frozenset(out)


def do_norm(tbox: TBox, a_hat: Iterable, g: GroundAction) -> frozenset:
    """DO_NORM: ``q++`` is matched over the equality-canonical stored
    assertions (no TBox), joined with ``q= & Q-`` evaluated on (T, Â)."""
    return norm_step_in(_consistent_sat(tbox, a_hat), g.action, g.substitution)


def normalized_action(nk: NormalizedKab, g: GroundAction) -> GroundAction:
    return GroundAction(nk.spec.action(g.action.name), g.theta, g.rule)
