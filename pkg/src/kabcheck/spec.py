"""Knowledge and action base specifications."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .model import (
    CQ,
    TRUE,
    UCQ,
    Atom,
    Eq,
    FTerm,
    TBox,
    UcqAtom,
    Var,
    abox_alphabet,
    arg_vars,
    ecq_preds,
    free_vars,
)

DUMMY = "Dummy"


@dataclass(frozen=True)
class EffectSpec:
    """``[q_plus] & q_minus -> {head}``; head atoms may hold variables and
    non-ground function terms."""

    q_plus: UCQ
    q_minus: object = TRUE
    head: tuple = ()

    def head_vars(self) -> set[Var]:
        out: set[Var] = set()
        for h in self.head:
            args = (h.left, h.right) if isinstance(h, Eq) else h.args
            for a in args:
                out |= arg_vars(a)
        return out

    def preds(self) -> set[str]:
        return self.q_plus.preds() | ecq_preds(self.q_minus)

    def head_preds(self) -> set[str]:
        return {h.pred for h in self.head if isinstance(h, Atom)}


@dataclass(frozen=True)
class ActionDef:
    name: str
    params: tuple = ()
    effects: tuple = ()
    copy_all: bool = False
    # COPYALL expanded over the alphabet of the enclosing KAB
    copy_effects: tuple = field(default=(), compare=True)

    @property
    def all_effects(self) -> tuple:
        return self.effects + self.copy_effects


@dataclass(frozen=True)
class ProcessRule:
    """``condition -> action(args)``; ``args`` map positionally onto the
    action's parameters."""

    condition: object
    action: str
    args: tuple = ()


@dataclass(frozen=True)
class KabSpec:
    tbox: TBox
    abox0: frozenset
    actions: tuple = ()
    process: tuple = ()
    functions: tuple = ()  # sorted (name, arity) pairs
    constants: frozenset = frozenset()  # declared constant names

    def action(self, name: str) -> ActionDef:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    @cached_property
    def alphabet(self) -> frozenset[str]:
        """ALPH(K): every concept and role name occurring in the KAB."""
        return spec_alphabet(self.tbox, self.abox0, self.actions, self.process)

    @cached_property
    def arities(self) -> dict:
        return predicate_arities(self)


def spec_alphabet(tbox, abox0, actions, process) -> frozenset[str]:
    names = set(tbox.names) | set(abox_alphabet(abox0))
    for act in actions:
        for e in act.all_effects:
            names |= e.preds() | e.head_preds()
    for r in process:
        names |= ecq_preds(r.condition)
    return frozenset(names)


def predicate_arities(spec: KabSpec) -> dict:
    out: dict = {}
    for name in spec.tbox.concept_names:
        out[name] = 1
    for name in spec.tbox.role_names:
        out[name] = 2

    def atoms_of_ecq(q):
        if isinstance(q, UcqAtom):
            for cq in q.ucq.cqs:
                yield from cq.body
        elif hasattr(q, "parts"):
            for p in q.parts:
                yield from atoms_of_ecq(p)
        elif hasattr(q, "body"):
            yield from atoms_of_ecq(q.body)

    for a in spec.abox0:
        if isinstance(a, Atom):
            out[a.pred] = len(a.args)
    for act in spec.actions:
        for e in act.all_effects:
            for at in atoms_of_ecq(UcqAtom(e.q_plus)):
                out[at.pred] = len(at.args)
            for at in atoms_of_ecq(e.q_minus):
                out[at.pred] = len(at.args)
            for h in e.head:
                if isinstance(h, Atom):
                    out[h.pred] = len(h.args)
    for r in spec.process:
        for at in atoms_of_ecq(r.condition):
            out[at.pred] = len(at.args)
    return out


def copy_effect(name: str, arity: int) -> EffectSpec:
    vs = (Var("x"),) if arity == 1 else (Var("x"), Var("y"))
    atom = Atom(name, vs)
    return EffectSpec(UCQ(vs, (CQ(vs, (atom,)),)), TRUE, (atom,))


def copy_effects_for(alphabet, arities: dict) -> tuple:
    return tuple(copy_effect(n, arities.get(n, 1)) for n in sorted(alphabet))


def rule_free_vars(rule: ProcessRule) -> frozenset:
    return free_vars(rule.condition)


def head_terms(h) -> tuple:
    return (h.left, h.right) if isinstance(h, Eq) else h.args


def is_function_head(arg) -> bool:
    return isinstance(arg, FTerm)
