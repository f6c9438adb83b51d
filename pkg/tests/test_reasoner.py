import itertools

import pytest
from oracles import random_abox, random_cq, random_tbox
from suites import rewriting_mismatches

from kabcheck.errors import InconsistentKB
from kabcheck.model import (
    CQ,
    UCQ,
    And,
    Atom,
    Concept,
    ConceptInclusion,
    Eq,
    EqAtom,
    Exists,
    Functional,
    Neg,
    Not,
    Role,
    TBox,
    UcqAtom,
    Var,
    const,
    func,
)
from kabcheck.reasoner import (
    abox_equivalent,
    certain_answers_ucq,
    entails,
    eval_ecq,
    holds,
    is_consistent,
    saturate,
)

a, b, c, d = (const(n) for n in "abcd")
x, y = Var("x"), Var("y")
FUNCT_P = TBox(frozenset({Functional(Role("P"))}))


def q1(pred, *args):
    vs = tuple(sorted({v for v in args if isinstance(v, Var)}))
    return UCQ(vs, (CQ(vs, (Atom(pred, args),)),))


def test_answers_agree_with_chase_oracle(rng):
    assert rewriting_mismatches(rng, 300) == []


def test_functionality_merges_fillers():
    abox = {Atom("P", (a, b)), Atom("P", (a, c)), Atom("A", (b,))}
    assert entails(FUNCT_P, abox, Eq(b, c))
    assert certain_answers_ucq(q1("A", x), FUNCT_P, abox) == {(b,), (c,)}


def test_congruence_applies_to_function_terms_in_adom():
    abox = {Eq(a, b), Atom("A", (func("f", a),)), Atom("B", (func("f", b),))}
    sat = saturate(TBox(), frozenset(abox))
    assert sat.equal(func("f", a), func("f", b))
    assert certain_answers_ucq(
        UCQ((x,), (CQ((x,), (Atom("A", (x,)), Atom("B", (x,)))),)), TBox(), abox
    ) == {(func("f", a),), (func("f", b),)}


def test_out_of_adom_terms_follow_congruence_only():
    sat = saturate(TBox(), frozenset({Eq(a, b), Atom("A", (a,))}))
    assert sat.rep_of(func("g", a)) == sat.rep_of(func("g", b))
    assert not holds(sat, UcqAtom(q1("A", x)), {x: d})
    assert holds(sat, EqAtom(x, y), {x: d, y: d})


def test_inconsistent_kb_is_reported():
    tbox = TBox(frozenset({ConceptInclusion(Concept("A"), Neg(Concept("B")))}))
    abox = {Atom("A", (a,)), Atom("B", (b,)), Eq(a, b)}
    assert not is_consistent(tbox, abox)
    assert entails(tbox, abox, Atom("C", (d,)))
    with pytest.raises(InconsistentKB):
        certain_answers_ucq(q1("A", x), tbox, abox)


def test_negation_ranges_over_the_active_domain():
    abox = {Atom("A", (a,)), Atom("B", (b,))}
    q = And((UcqAtom(q1("B", x)), Not(UcqAtom(q1("A", x)))))
    assert [s[x] for s in eval_ecq(q, TBox(), abox)] == [b]
    q = Not(Exists(x, UcqAtom(q1("C", x))))
    assert eval_ecq(q, TBox(), abox) == [{}]


def test_answers_expand_over_class_members():
    abox = {Atom("P", (a, b)), Eq(b, c)}
    got = {(s[x], s[y]) for s in eval_ecq(UcqAtom(q1("P", x, y)), TBox(), abox)}
    assert got == {(a, b), (a, c)}


def test_saturation_is_idempotent(rng):
    for _ in range(200):
        tbox, abox = random_tbox(rng), random_abox(rng)
        s1 = saturate(tbox, abox)
        s2 = saturate(tbox, frozenset(s1.abox | s1.equalities()))
        assert s1.partition() == s2.partition()


def test_facts_mention_only_representatives(rng):
    for _ in range(200):
        sat = saturate(random_tbox(rng), random_abox(rng))
        for at in sat.facts:
            assert all(t in sat.rep_set for t in at.args)


def test_equivalence_is_an_equivalence_relation(rng):
    lam = {"A", "B", "C", "P", "S"}
    for _ in range(150):
        tbox = random_tbox(rng)
        boxes = [random_abox(rng) for _ in range(3)]
        # mix in syntactic variants that are equivalent by construction
        boxes.append(boxes[0] | {Eq(a, a)})
        boxes = [x for x in boxes if is_consistent(tbox, x)]
        for p in boxes:
            assert abox_equivalent(p, p, tbox, lam)
        for p, q in itertools.permutations(boxes, 2):
            assert abox_equivalent(p, q, tbox, lam) == abox_equivalent(q, p, tbox, lam)
        for p, q, r in itertools.permutations(boxes, 3):
            if abox_equivalent(p, q, tbox, lam) and abox_equivalent(q, r, tbox, lam):
                assert abox_equivalent(p, r, tbox, lam)


def test_equivalent_aboxes_answer_alike(rng):
    lam = {"A", "B", "C", "P", "S"}
    hits = 0
    for _ in range(400):
        tbox = random_tbox(rng)
        a1 = random_abox(rng)
        if not is_consistent(tbox, a1):
            continue
        # a syntactically different presentation of the same knowledge
        sat = saturate(tbox, a1)
        a2 = frozenset(sat.facts | sat.equalities())
        assert abox_equivalent(a1, a2, tbox, lam)
        q = random_cq(rng)
        assert certain_answers_ucq(q, tbox, a1) == certain_answers_ucq(q, tbox, a2)
        hits += 1
    assert hits > 100

