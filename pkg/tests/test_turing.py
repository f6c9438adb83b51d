import json

import pytest
from conftest import FIXTURES
from oracles import simulate_tm
from suites import tm_spec

from kabcheck.errors import BudgetExceeded
from kabcheck.model import Atom, const
from kabcheck.mu import check
from kabcheck.parser import parse_formula, parse_kab
from kabcheck.serialize import serialize_kab
from kabcheck.transition import build
from kabcheck.turing import tm_encode

HALTS = parse_formula("mu Z. [Stop(0)] | <->Z")


def machine(name):
    return json.loads((FIXTURES / "tm" / f"{name}.json").read_text())


def test_simulation_of_the_fixture_machines():
    assert simulate_tm(machine("halt_short"), 100) == 2
    assert simulate_tm(machine("halt_bounce"), 100) == 8
    assert simulate_tm(machine("loop"), 1000) is None


def test_initial_tape():
    spec = tm_spec("halt_short")
    zero = const("0")
    assert spec.abox0 == {
        Atom("cell", (zero, const("q_s0"))),
        Atom("value", (zero, const("v_0"))),
        Atom("First", (zero,)),
        Atom("Last", (zero,)),
    }
    assert [a.name for a in spec.actions] == ["d0_s0_0", "d1_s1_0"]


def test_encoding_survives_the_text_form():
    spec = tm_spec("halt_bounce")
    assert parse_kab(serialize_kab(spec)) == spec


@pytest.mark.parametrize("name", ["halt_short", "halt_bounce"])
def test_halting_machines_reach_stop(name):
    ts = build(tm_spec(name), max_states=500)
    res = check(HALTS, ts)
    assert res.verdict
    # the witness runs the machine and then writes Stop
    assert len(res.witness) == simulate_tm(machine(name), 100) + 1


def test_looping_machine_is_cut_by_the_budget():
    with pytest.raises(BudgetExceeded) as info:
        build(tm_spec("loop"), max_states=40)
    assert info.value.weakly_acyclic is False


def test_machine_without_stop_never_halts():
    m = machine("halt_short")
    m["transitions"] = m["transitions"][:1]  # stuck in s1
    ts = build(tm_encode(m), max_states=100)
    assert not check(HALTS, ts).verdict
    assert simulate_tm(m, 100) is None


@pytest.mark.parametrize(
    "patch",
    [
        {"blank": "2"},
        {"initial": "zz"},
        {"transitions": [{"state": "s0", "read": "0", "next": "h", "write": "1", "move": "U"}]},
        {"states": ["s 0"]},
    ],
)
def test_malformed_machines_are_rejected(patch):
    m = {**machine("halt_short"), **patch}
    with pytest.raises(ValueError):
        tm_encode(m)
