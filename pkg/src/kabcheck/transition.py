"""Breadth-first construction of the quotient transition system of a KAB
and bisimulation checking between two such systems."""
from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field

from .engine import enabled_in, step_in
from .errors import AlphabetMismatch, BudgetExceeded, InconsistentInitialState
from .model import Atom, Concept, Eq, Role, Term, adom, func
from .normalize import normalize, norm_step_in
from .reasoner import SaturatedAbox, sat_equivalent, saturate
from .spec import DUMMY, KabSpec

DEFAULT_MAX_STATES = 10_000
MODES = ("direct", "normalized")


def default_max_states() -> int:
    raw = os.environ.get("KABCHECK_MAX_STATES")
    return int(raw) if raw else DEFAULT_MAX_STATES


@dataclass
class TransitionSystem:
    spec: KabSpec  # the spec that was stepped (normalized in that mode)
    mode: str
    alphabet: frozenset
    states: list = field(default_factory=list)  # canonical ABoxes
    sats: list = field(default_factory=list)
    initial: int = 0
    edges: list = field(default_factory=list)  # (src, label, dst)

    @property
    def tbox(self):
        return self.spec.tbox

    def successors(self) -> list[set]:
        out = [set() for _ in self.states]
        for src, _, dst in self.edges:
            out[src].add(dst)
        return out

    def adom(self) -> frozenset:
        out: set = set()
        for s in self.states:
            out |= adom(s)
        return frozenset(out)

    def __len__(self) -> int:
        return len(self.states)


# ------------------------------------------------------------ canonical form


def canonical_abox(sat: SaturatedAbox) -> frozenset:
    """Stored assertions rewritten over representatives plus member = rep
    equalities. Dummy assertions keep their terms so that equality-only
    terms stay in the active domain."""
    out = set(sat.equalities())
    for a in sat.abox:
        if isinstance(a, Atom):
            if a.pred == DUMMY:
                out.add(a)
            else:
                out.add(Atom(a.pred, tuple(sat.rep_of(t) for t in a.args)))
    return frozenset(out)


def _normal_forms(sat: SaturatedAbox) -> dict:
    """rep -> structural normal form of its class: the least of its constant
    members and of f(nf(args)) over its function-term members. Two ABoxes
    with the same models name their classes alike even when they hold
    different congruent function terms."""
    memo: dict = {}

    def nf(r: Term, visiting: frozenset) -> Term:
        if r in memo:
            return memo[r]
        if r in visiting:
            return r
        cands = []
        for m in set(sat.members(r)) | {r}:
            if not m.args:
                cands.append(m)
            else:
                args = tuple(nf(sat.rep_of(a), visiting | {r}) for a in m.args)
                cands.append(func(m.name, *args))
        out = min(cands)
        memo[r] = out
        return out

    return {r: nf(r, frozenset()) for r in sat.reps}


def state_key(sat: SaturatedAbox, lam: frozenset) -> tuple:
    """A hash key that coincides for ABoxes with the same models over the
    same named classes; collisions are confirmed semantically."""
    nf = _normal_forms(sat)
    concepts = []
    for r, types in sat.types.items():
        for b in types:
            if isinstance(b, Concept) and b.name in lam:
                concepts.append((b.name, nf[r]))
    roles = []
    for p in sorted(sat.roles.keys() | {n for n in lam if n in sat.tbox.role_names}):
        if p not in lam:
            continue
        for a, b in sat.role_pairs(Role(p)):
            roles.append((p, nf[a], nf[b]))
    return (frozenset(nf.values()), frozenset(concepts), frozenset(roles))


# ---------------------------------------------------------------- reuse


def reuse_terms(tbox, pre_adom: frozenset, abox: frozenset) -> frozenset:
    """Replace every freshly created function term that is provably equal to
    a term of the previous state by that term."""
    fresh = [t for t in adom(abox) if t.args and t not in pre_adom]
    if not fresh:
        return abox
    sat = saturate(tbox, abox)
    mapping = {}
    for t in fresh:
        old = [m for m in sat.members(sat.rep_of(t)) if m in pre_adom]
        if old:
            mapping[t] = min(old)
    if not mapping:
        return abox
    out = set()
    for a in abox:
        if isinstance(a, Eq):
            left, right = mapping.get(a.left, a.left), mapping.get(a.right, a.right)
            if left != right:
                out.add(Eq(left, right))
        else:
            out.add(Atom(a.pred, tuple(mapping.get(t, t) for t in a.args)))
    return frozenset(out)


# ---------------------------------------------------------------- build


def build(
    spec: KabSpec,
    mode: str = "direct",
    max_states: int | None = None,
    max_adom: int | None = None,
) -> TransitionSystem:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    max_states = default_max_states() if max_states is None else max_states
    lam = spec.alphabet
    if mode == "normalized":
        nk = normalize(spec)
        stepped, step = nk.spec, norm_step_in
    else:
        stepped, step = spec, step_in
    tbox = stepped.tbox
    ts = TransitionSystem(stepped, mode, lam)

    sat0 = saturate(tbox, stepped.abox0)
    if not sat0.is_consistent:
        raise InconsistentInitialState("the initial ABox is inconsistent with the TBox")

    buckets: dict = {}

    def intern(sat: SaturatedAbox) -> tuple[int, bool]:
        key = state_key(sat, lam)
        for idx in buckets.get(key, ()):
            if sat_equivalent(ts.sats[idx], sat, lam):
                return idx, False
        canon = canonical_abox(sat)
        csat = saturate(tbox, canon)
        ts.states.append(canon)
        ts.sats.append(csat)
        buckets.setdefault(key, []).append(len(ts.states) - 1)
        return len(ts.states) - 1, True

    def over_budget(what: str) -> BudgetExceeded:
        from .acyclicity import check_spec

        wa = check_spec(spec).weakly_acyclic
        verdict = "weakly acyclic" if wa else "not weakly acyclic"
        return BudgetExceeded(f"{what} (the specification is {verdict})", weakly_acyclic=wa)

    ts.initial, _ = intern(sat0)
    frontier = deque([ts.initial])
    while frontier:
        src = frontier.popleft()
        sat = ts.sats[src]
        for g in enabled_in(stepped, sat):
            nxt = step(sat, g.action, g.substitution)
            nxt = reuse_terms(tbox, sat.adom, nxt)
            nsat = saturate(tbox, nxt)
            if not nsat.is_consistent:
                continue
            dst, new = intern(nsat)
            ts.edges.append((src, g.label, dst))
            if new:
                if len(ts.states) > max_states:
                    raise over_budget(f"state budget of {max_states} exceeded")
                # counted up to equality, like the chase bound
                if max_adom is not None and len(ts.sats[dst].reps) > max_adom:
                    raise over_budget(f"active-domain budget of {max_adom} exceeded")
                frontier.append(dst)
    return ts


# ----------------------------------------------------------- bisimulation


def check_bisimilar(ts1: TransitionSystem, ts2: TransitionSystem) -> bool:
    """Partition refinement over the disjoint union, starting from classes
    of ≡-equivalent ABoxes."""
    if ts1.alphabet != ts2.alphabet or ts1.tbox != ts2.tbox:
        raise AlphabetMismatch("bisimulation needs a common TBox and alphabet")
    lam = ts1.alphabet
    nodes = [(ts1, i) for i in range(len(ts1))] + [(ts2, j) for j in range(len(ts2))]
    offset = len(ts1)
    succ1, succ2 = ts1.successors(), ts2.successors()
    succ = [s for s in succ1] + [{offset + d for d in s} for s in succ2]

    block: list = []
    reps: dict = {}  # key -> list of (block id, node index)
    for n, (ts, i) in enumerate(nodes):
        sat = ts.sats[i]
        key = state_key(sat, lam)
        found = None
        for b, m in reps.get(key, ()):
            other_ts, other_i = nodes[m]
            if sat_equivalent(other_ts.sats[other_i], sat, lam):
                found = b
                break
        if found is None:
            found = sum(len(v) for v in reps.values())
            reps.setdefault(key, []).append((found, n))
        block.append(found)

    count = len(set(block))
    while True:
        sigs = [(block[n], frozenset(block[d] for d in succ[n])) for n in range(len(nodes))]
        ids: dict = {}
        block = [ids.setdefault(s, len(ids)) for s in sigs]
        if len(ids) == count:
            break
        count = len(ids)
    return block[ts1.initial] == block[offset + ts2.initial]
