"""The eight acceptance criteria, each printing one PASS/FAIL line."""
import json
import random
import time

import pytest
from conftest import FIXTURES, KAB_FIXTURES, load
from oracles import simulate_tm
from suites import (
    SMALL_SUPERHERO_VERDICTS,
    bisim_suite,
    chase_coverage_failures,
    do_suite,
    explicit_superhero_verdicts,
    rewriting_mismatches,
    superhero_small_verdicts,
    tm_spec,
)

from kabcheck.acyclicity import chase_dominant, check_spec, positive_dominant
from kabcheck.cli import main
from kabcheck.engine import GroundAction, do_step
from kabcheck.errors import BudgetExceeded, Location, ParseError, ValidationError
from kabcheck.model import Atom, Eq, const
from kabcheck.mu import check
from kabcheck.normalize import normalize
from kabcheck.parser import parse_formula, parse_formulas, parse_kab
from kabcheck.reasoner import entails
from kabcheck.transition import build


@pytest.fixture
def verdict(capsys):
    def emit(n: int, ok: bool, detail: str, elapsed: float) -> None:
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f} s) {detail}")
        assert ok, detail

    return emit


def test_criterion_1_superhero_golden(verdict):
    start = time.perf_counter()
    spec = load("superhero")
    act = spec.action("Challenge")
    g = GroundAction(act, tuple(zip(act.params, (const("joker"), const("batman")))))
    nxt = do_step(spec.tbox, spec.abox0, g)
    wanted = [
        Atom("enemy", (const("joker"), const("batman"))),
        Atom("livesIn", (const("joker"), const("gotham"))),
        Eq(const("gotham"), const("city1")),
    ]
    missing = [str(a) for a in wanted if not entails(spec.tbox, nxt, a)]
    elapsed = time.perf_counter() - start
    verdict(1, not missing and elapsed < 1.0, f"missing={missing}", elapsed)


def test_criterion_2_acyclicity_goldens(verdict):
    t0 = time.perf_counter()
    hero = check_spec(load("superhero"))
    t1 = time.perf_counter()
    tm = check_spec(tm_spec("halt_short"))
    t2 = time.perf_counter()
    via_n = bool(tm.cycle) and tm.cycle[0].special and tm.cycle[0].provenance[3] == "n(c)"
    ok = hero.weakly_acyclic and not tm.weakly_acyclic and via_n and t1 - t0 < 1.0 and t2 - t1 < 1.0
    cycle = " ; ".join(e.describe() for e in tm.cycle)
    verdict(2, ok, f"superhero={hero.weakly_acyclic} tm_cycle=[{cycle}]", t2 - t0)


def test_criterion_3_rewriting_oracle(verdict, seed):
    start = time.perf_counter()
    n = 1000
    bad = rewriting_mismatches(random.Random(seed), n)
    elapsed = time.perf_counter() - start
    verdict(3, not bad and elapsed < 30.0, f"instances={n} mismatches={len(bad)}", elapsed)


def test_criterion_4_do_agreement(verdict, seed):
    start = time.perf_counter()
    checked, bad = do_suite(random.Random(seed), 250)
    elapsed = time.perf_counter() - start
    verdict(4, checked >= 200 and not bad, f"pairs={checked} violations={len(bad)}", elapsed)


def test_criterion_5_bisimulation_and_verdicts(verdict):
    start = time.perf_counter()
    failures = bisim_suite()
    oracle = explicit_superhero_verdicts()
    direct = superhero_small_verdicts("direct")
    norm = superhero_small_verdicts("normalized")
    ok = not failures and oracle == SMALL_SUPERHERO_VERDICTS == direct == norm
    detail = f"failures={failures} oracle={oracle} direct={direct} normalized={norm}"
    verdict(5, ok, detail, time.perf_counter() - start)


def test_criterion_6_dominant_chase(verdict):
    start = time.perf_counter()
    sizes = {}
    for name in KAB_FIXTURES:
        spec = load(name)
        if check_spec(spec):
            sizes[name] = chase_dominant(positive_dominant(normalize(spec))).adom_size
    uncovered = chase_coverage_failures()
    generator = load("infinite")
    escapes = []
    for budget in (10, 100, 400):
        try:
            build(generator, max_states=budget)
            escapes.append(f"states<={budget}")
        except BudgetExceeded:
            pass
        try:
            chase_dominant(positive_dominant(normalize(generator)), budget)
            escapes.append(f"chase<={budget}")
        except BudgetExceeded:
            pass
    ok = len(sizes) == len(KAB_FIXTURES) and not uncovered and not escapes
    verdict(6, ok, f"bounds={sizes} uncovered={uncovered} escapes={escapes}", time.perf_counter() - start)


def test_criterion_7_turing_round_trip(verdict, tmp_path, capsys):
    start = time.perf_counter()
    halts = parse_formula("mu Z. [Stop(0)] | <->Z")
    rows = []
    for name, limit in (("halt_short", 5), ("halt_bounce", 20)):
        machine = json.loads((FIXTURES / "tm" / f"{name}.json").read_text())
        steps = simulate_tm(machine, limit)
        got = check(halts, build(tm_spec(name), max_states=500)).verdict
        rows.append((name, steps is not None, got))
    loop = FIXTURES / "tm" / "loop.json"
    kab = tmp_path / "loop.kab"
    main(["tm-encode", str(loop), "-o", str(kab)])
    code = main(["verify", str(kab), "--formula", "mu Z. [Stop(0)] | <->Z", "--max-states", "60"])
    capsys.readouterr()
    simulated = simulate_tm(json.loads(loop.read_text()), 10_000)
    rows.append(("loop", simulated is not None, f"exit {code}"))
    elapsed = time.perf_counter() - start
    ok = all(sim and got is True for _, sim, got in rows[:2]) and simulated is None and code == 3 and elapsed < 10.0
    verdict(7, ok, f"runs={rows}", elapsed)


def _fuzz_inputs(rng: random.Random, n: int):
    texts = [(FIXTURES / f"{name}.kab").read_bytes() for name in KAB_FIXTURES]
    alphabet = b" \n{}()[];,.:&|!=-<>/ISAEXnotmuZxyabcABTOXFUNCTPROESI01_"
    for i in range(n):
        kind = i % 3
        if kind == 0:
            yield rng.randbytes(rng.randint(0, 80))
        elif kind == 1:
            yield bytes(rng.choice(alphabet) for _ in range(rng.randint(0, 80)))
        else:
            data = bytearray(rng.choice(texts))
            for _ in range(rng.randint(1, 3)):
                j = rng.randrange(len(data))
                data[j : j + rng.randint(0, 4)] = rng.randbytes(rng.randint(0, 3))
            yield bytes(data)


def test_criterion_8_parser_fuzz(verdict, seed):
    start = time.perf_counter()
    n = 100_000
    crashes, unlocated, rejected = [], 0, 0
    for i, data in enumerate(_fuzz_inputs(random.Random(seed), n)):
        parse = parse_kab if i % 2 == 0 else parse_formulas
        try:
            parse(data)
        except (ParseError, ValidationError) as e:
            rejected += 1
            issues = e.issues if isinstance(e, ValidationError) else [e]
            if not all(isinstance(x.location, Location) and x.location.line >= 1 for x in issues):
                unlocated += 1
        except Exception as e:  # anything else is a crash
            crashes.append((data, repr(e)))
    ok = not crashes and not unlocated
    detail = f"inputs={n} rejected={rejected} crashes={len(crashes)} unlocated={unlocated}"
    verdict(8, ok, detail, time.perf_counter() - start)
