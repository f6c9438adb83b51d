"""Encoding of a deterministic single-tape Turing machine as a KAB whose
transition system reaches ``Stop(0)`` iff the machine halts."""
from __future__ import annotations

import re

from .model import CQ, EMPTY_TBOX, UCQ, Atom, FTerm, Var, const
from .spec import ActionDef, EffectSpec, KabSpec, ProcessRule
from .model import TRUE

_NAME = re.compile(r"^[A-Za-z0-9_]+$")

HASH = const("hash")
ZERO = const("0")
C, X, CR, CL = Var("c"), Var("x"), Var("cr"), Var("cl")


def state_const(q: str):
    return const(f"q_{q}")


def symbol_const(v: str):
    return const(f"v_{v}")


def _effect(body: list, head: list) -> EffectSpec:
    free = tuple(sorted({a for at in body for a in at.args if isinstance(a, Var)}))
    return EffectSpec(UCQ(free, (CQ(free, tuple(body)),)), TRUE, tuple(head))


def _check(machine: dict) -> None:
    for key in ("states", "alphabet", "blank", "initial", "final", "transitions"):
        if key not in machine:
            raise ValueError(f"machine description lacks {key!r}")
    names = list(machine["states"]) + list(machine["alphabet"])
    for n in names:
        if not _NAME.match(str(n)):
            raise ValueError(f"state/symbol name {n!r} must match [A-Za-z0-9_]+")
    if machine["blank"] not in machine["alphabet"]:
        raise ValueError(f"blank {machine['blank']!r} is not in the alphabet")
    for key in ("initial", "final"):
        if machine[key] not in machine["states"]:
            raise ValueError(f"{key} state {machine[key]!r} is not a declared state")
    for t in machine["transitions"]:
        if t["move"] not in ("L", "R"):
            raise ValueError(f"move must be L or R, got {t['move']!r}")
        if t["state"] not in machine["states"] or t["next"] not in machine["states"]:
            raise ValueError(f"transition {t} uses an unknown state")
        if t["read"] not in machine["alphabet"] or t["write"] not in machine["alphabet"]:
            raise ValueError(f"transition {t} uses an unknown symbol")


def transition_effects(t: dict, blank: str, final: str) -> tuple:
    q, v = state_const(t["state"]), symbol_const(t["read"])
    q2, v2 = state_const(t["next"]), symbol_const(t["write"])
    b = symbol_const(blank)
    head_here = [Atom("cell", (C, q)), Atom("value", (C, v))]
    common = [
        # untouched cells keep their value, the head cell gets the new one
        _effect([Atom("cell", (C, HASH)), Atom("value", (C, X))], [Atom("value", (C, X))]),
        _effect(head_here, [Atom("value", (C, v2))]),
        _effect([Atom("next", (C, X))], [Atom("next", (C, X))]),
        _effect([Atom("cell", (C, state_const(final)))], [Atom("Stop", (ZERO,))]),
    ]
    if t["move"] == "R":
        new = FTerm("n", (C,))
        moves = [
            _effect([Atom("First", (C,))], [Atom("First", (C,))]),
            _effect(head_here + [Atom("next", (C, CR))], [Atom("cell", (CR, q2))]),
            _effect(
                head_here + [Atom("Last", (C,))],
                [Atom("cell", (new, q2)), Atom("next", (C, new)), Atom("Last", (new,)), Atom("value", (new, b))],
            ),
            _effect([Atom("cell", (C, HASH)), Atom("Last", (C,))], [Atom("Last", (C,))]),
            _effect([Atom("cell", (C, HASH)), Atom("First", (C,))], [Atom("cell", (C, HASH))]),
            _effect(head_here + [Atom("First", (C,))], [Atom("cell", (C, HASH))]),
            _effect([Atom("cell", (C, HASH)), Atom("next", (C, CR))], [Atom("cell", (CR, HASH))]),
        ]
    else:
        new = FTerm("p", (C,))
        moves = [
            _effect([Atom("Last", (C,))], [Atom("Last", (C,))]),
            _effect(head_here + [Atom("next", (CL, C))], [Atom("cell", (CL, q2))]),
            _effect(
                head_here + [Atom("First", (C,))],
                [Atom("cell", (new, q2)), Atom("next", (new, C)), Atom("First", (new,)), Atom("value", (new, b))],
            ),
            _effect([Atom("cell", (C, HASH)), Atom("First", (C,))], [Atom("First", (C,))]),
            _effect([Atom("cell", (C, HASH)), Atom("Last", (C,))], [Atom("cell", (C, HASH))]),
            _effect(head_here + [Atom("Last", (C,))], [Atom("cell", (C, HASH))]),
            _effect([Atom("cell", (C, HASH)), Atom("next", (CL, C))], [Atom("cell", (CL, HASH))]),
        ]
    return tuple(common[:1] + common[1:2] + moves + common[2:])


def tm_encode(machine: dict) -> KabSpec:
    """KAB with empty TBox, a four-assertion initial ABox, one parameterless
    action per transition and a process allowing every action always."""
    _check(machine)
    blank, final = machine["blank"], machine["final"]
    abox0 = frozenset(
        {
            Atom("cell", (ZERO, state_const(machine["initial"]))),
            Atom("value", (ZERO, symbol_const(blank))),
            Atom("First", (ZERO,)),
            Atom("Last", (ZERO,)),
        }
    )
    actions = []
    for i, t in enumerate(machine["transitions"]):
        name = f"d{i}_{t['state']}_{t['read']}"
        actions.append(ActionDef(name, (), transition_effects(t, blank, final)))
    process = tuple(ProcessRule(TRUE, a.name, ()) for a in actions)
    constants = {state_const(q).name for q in machine["states"]}
    constants |= {symbol_const(v).name for v in machine["alphabet"]}
    constants |= {HASH.name, ZERO.name}
    return KabSpec(
        tbox=EMPTY_TBOX,
        abox0=abox0,
        actions=tuple(actions),
        process=process,
        functions=(("n", 1), ("p", 1)),
        constants=frozenset(constants),
    )
