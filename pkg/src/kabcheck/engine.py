"""One step of a KAB: enabled actions, effect application, DO."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .model import And, TBox, UcqAtom, substitute_atom, term_sort_key
from .reasoner import SaturatedAbox, _consistent_sat, sat_eval_ecq
from .spec import ActionDef, EffectSpec, KabSpec


@dataclass(frozen=True)
class GroundAction:
    """An action with actual parameters; ``rule`` is the index of the
    process rule that enabled it."""

    action: ActionDef
    theta: tuple  # ((Var, Term), ...) in parameter order
    rule: int = -1

    @property
    def substitution(self) -> dict:
        return dict(self.theta)

    @property
    def label(self) -> tuple:
        return (self.rule, self.action.name, self.theta)

    def __str__(self) -> str:
        return f"{self.action.name}({', '.join(str(t) for _, t in self.theta)})"


def enabled_in(spec: KabSpec, sat: SaturatedAbox) -> list[GroundAction]:
    out: dict = {}
    for i, rule in enumerate(spec.process):
        act = spec.action(rule.action)
        for ans in sat_eval_ecq(sat, rule.condition, {}):
            theta = tuple((p, ans[a]) for p, a in zip(act.params, rule.args))
            g = GroundAction(act, theta, i)
            out.setdefault((i, act.name, theta), g)
    return [out[k] for k in sorted(out, key=_label_key)]


def _label_key(label) -> tuple:
    rule, name, theta = label
    return (rule, name, tuple(term_sort_key(t) for _, t in theta))


def enabled_actions(spec: KabSpec, tbox: TBox, abox: Iterable) -> list[GroundAction]:
    """Every ground action some process rule allows in ``abox``."""
    return enabled_in(spec, _consistent_sat(tbox, abox))


def effect_condition(e: EffectSpec):
    return And((UcqAtom(e.q_plus), e.q_minus))


def apply_in(sat: SaturatedAbox, e: EffectSpec, theta: dict) -> set:
    out = set()
    for sub in sat_eval_ecq(sat, effect_condition(e), theta):
        for h in e.head:
            out.add(substitute_atom(h, sub))
    return out


def apply_effect(tbox: TBox, abox: Iterable, e: EffectSpec, theta: dict) -> frozenset:
    """e θ(A): the head instantiated for every certain answer of the
    effect condition under θ."""
    return frozenset(apply_in(_consistent_sat(tbox, abox), e, dict(theta)))


def step_in(sat: SaturatedAbox, action: ActionDef, theta: dict) -> frozenset:
    out = set(sat.equalities())
    for e in action.all_effects:
        out |= apply_in(sat, e, theta)
    return frozenset(out)


def do_step(tbox: TBox, abox: Iterable, g: GroundAction) -> frozenset:
    """DO(T, A, γθ) = EQ(T, A) ∪ the union of all effect outputs. The result
    is not checked for consistency."""
    return step_in(_consistent_sat(tbox, abox), g.action, g.substitution)
