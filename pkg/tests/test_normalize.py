from conftest import KAB_FIXTURES, load
from suites import do_suite, do_violations, reachable_pairs

from kabcheck.model import CQ, Atom, EqAtom, Var, const, ecq_preds
from kabcheck.normalize import DUMMY_COPY, normalize, split_joins
from kabcheck.spec import DUMMY

x, y = Var("x"), Var("y")


def test_join_and_constant_splitting_golden():
    # N(x) & P1(x, y) & P2(c, x)
    cq = CQ((x, y), (Atom("N", (x,)), Atom("P1", (x, y)), Atom("P2", (const("c"), x))))
    qpp, eqs = split_joins((x, y), cq)
    x2, x3, xc = Var("x__2"), Var("x__3"), Var("c__c")
    assert qpp.cqs[0].body == (Atom("N", (x,)), Atom("P1", (x2, y)), Atom("P2", (xc, x3)))
    assert set(eqs) == {EqAtom(x, x2), EqAtom(x, x3), EqAtom(xc, const("c"))}


def test_every_variable_occurs_once_in_the_positive_part():
    for name in KAB_FIXTURES:
        for act in normalize(load(name)).spec.actions:
            for e in act.all_effects:
                for cq in e.q_plus.cqs:
                    args = [a for at in cq.body for a in at.args]
                    assert all(isinstance(a, Var) for a in args)
                    assert len(args) == len(set(args))


def test_dummy_is_only_read_by_its_own_copy():
    for name in KAB_FIXTURES:
        nk = normalize(load(name))
        for rule in nk.spec.process:
            assert DUMMY not in ecq_preds(rule.condition)
        for act in nk.spec.actions:
            assert act.all_effects[-1] == DUMMY_COPY
            for e in act.all_effects[:-1]:
                assert DUMMY not in e.preds()


def test_equality_heads_mark_their_terms():
    nk = normalize(load("superhero"))
    heads = [h for e in nk.spec.action("Unmask").all_effects for h in e.head]
    assert Atom(DUMMY, (Var("s"),)) in heads and Atom(DUMMY, (Var("p"),)) in heads


def test_provenance_points_back_to_source_effects(superhero):
    nk = normalize(superhero)
    for act in nk.spec.actions:
        src = superhero.action(act.name).all_effects
        for i in range(len(act.all_effects)):
            orig, disjunct = nk.provenance[(act.name, i)]
            assert orig is None or 0 <= orig < len(src)
            assert disjunct >= 0


def test_normalization_is_deterministic(superhero):
    assert normalize(superhero) == normalize(superhero)


def test_normalized_steps_agree_on_superhero(superhero):
    assert do_violations(superhero, reachable_pairs(superhero)[:150]) == []


def test_normalized_steps_agree_on_sampled_pairs(rng):
    checked, bad = do_suite(rng, 100)
    assert checked >= 100 and bad == []
