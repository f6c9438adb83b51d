import pytest
from conftest import FIXTURES, KAB_FIXTURES, load, load_formulas
from oracles import random_spec

from kabcheck.errors import Location, ParseError, ValidationError
from kabcheck.normalize import normalize
from kabcheck.parser import parse_formula, parse_formulas, parse_kab
from kabcheck.serialize import format_formula, serialize_kab


def diagnostics(text, parse=parse_kab):
    try:
        parse(text)
    except ValidationError as e:
        return [(i.category, str(i.location)) for i in e.issues]
    except ParseError as e:
        return [(e.category, str(e.location))]
    return []


@pytest.mark.parametrize("name", KAB_FIXTURES + ["infinite"])
def test_fixture_round_trip(name):
    spec = load(name)
    assert parse_kab(serialize_kab(spec)) == spec


def test_random_specs_round_trip(rng):
    for _ in range(200):
        spec = random_spec(rng)
        assert parse_kab(serialize_kab(spec)) == spec


def test_normalized_spec_round_trips_with_reserved_names(superhero):
    nspec = normalize(superhero).spec
    text = serialize_kab(nspec)
    assert parse_kab(text, allow_reserved=True) == nspec
    assert ("reserved", "") in [(c, "") for c, _ in diagnostics(text)]


@pytest.mark.parametrize("name", ["superhero", "copyall", "forget"])
def test_formula_round_trip(name):
    for _, phi in load_formulas(name):
        assert parse_formula(format_formula(phi)) == phi


def test_copyall_expands_over_the_alphabet():
    spec = load("copyall")
    touch = spec.action("Touch")
    assert touch.copy_all
    assert {e.head[0].pred for e in touch.copy_effects} == {"A", "B", "P"}


def test_unknown_identifiers_in_conditions_are_variables(superhero):
    challenge = superhero.action("Challenge")
    (effect,) = challenge.effects
    assert "sc" in {v.name for v in effect.q_plus.free}


@pytest.mark.parametrize(
    "text, expected",
    [
        ("TBOX { A ISA }", [("syntax", "1:14")]),
        ("ABOX { A(a) }", [("syntax", "1:13")]),
        ("ABOX { Dummy(a); }", [("reserved", "1:8")]),
        ("PROCESS { [A(x)] -> G(x); }", [("unknown symbol", "1:21")]),
        ("ABOX { A(f(a)); }", [("unknown symbol", "1:10")]),
        ("TBOX { FUNCT P; Q ISA P; }", [("functionality specialization", "1:8")]),
        ("ABOX { P(a); P(a, b); }", [("arity", "1:14")]),
        ("ACTION F() { [A(x)] -> {B(x)}; }\nACTION F() { [A(x)] -> {B(x)}; }", [("duplicate", "2:8")]),
        (b"ABOX {\n  A(\xff);\n}", [("encoding", "2:5")]),
    ],
)
def test_rejections_carry_category_and_location(text, expected):
    assert diagnostics(text) == expected


def test_every_violation_is_reported():
    text = (
        "ABOX { Dummy(a); P(a); P(a, b); }\n"
        "ACTION F(p) { [A(x)] -> {B(y)}; }\n"
        "PROCESS { [A(x)] -> G(x); }\n"
    )
    cats = [c for c, _ in diagnostics(text)]
    assert {"reserved", "arity", "free-variable mismatch", "unknown symbol"} <= set(cats)


def test_rule_arguments_must_match_condition():
    text = "ACTION F(p) { [A(p)] -> {B(p)}; }\nPROCESS { [A(x)] -> F(y); }"
    assert diagnostics(text) == [("free-variable mismatch", "2:1")]


@pytest.mark.parametrize(
    "text, category",
    [
        ("mu Z. !Z", "monotonicity"),
        ("mu Z. Y", "unbound variable"),
        ("mu Z. Z -> [A(a)]", "monotonicity"),
        ("EX x. [A(x)] &", "syntax"),
    ],
)
def test_formula_diagnostics(text, category):
    ((cat, loc),) = diagnostics(text, parse_formula)
    assert cat == category and loc.count(":") == 1


def test_formula_files_name_their_entries():
    names = [n for n, _ in parse_formulas("a: [A(c)]; [B(c)]")]
    assert names == ["a", "phi2"]


def test_implication_and_box_desugar():
    assert parse_formula("[A(a)] -> [-][B(a)]") == parse_formula("!([A(a)] & !(!<->![B(a)]))")


def test_fuzz_random_bytes(rng):
    for _ in range(3000):
        data = bytes(rng.randrange(256) for _ in range(rng.randint(0, 60)))
        for parse in (parse_kab, parse_formulas):
            try:
                parse(data)
            except (ParseError, ValidationError) as e:
                assert isinstance(e.location, Location) and e.location.line >= 1


def test_fuzz_mutated_fixtures(rng):
    texts = [(FIXTURES / f"{n}.kab").read_bytes() for n in KAB_FIXTURES]
    for _ in range(1500):
        data = bytearray(rng.choice(texts))
        for _ in range(rng.randint(1, 4)):
            i = rng.randrange(len(data))
            op = rng.random()
            if op < 0.4:
                del data[i : i + rng.randint(1, 5)]
            elif op < 0.7:
                data[i] = rng.choice(b"{}()[];,.&|!=-<>EX x")
            else:
                data[i:i] = data[rng.randrange(len(data)) :][:8]
        try:
            parse_kab(bytes(data))
        except (ParseError, ValidationError) as e:
            assert isinstance(e.location, Location) and e.location.line >= 1
