"""Dependency graph, weak acyclicity and the positive-dominant chase."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx

from .errors import BudgetExceeded
from .model import EMPTY_TBOX, TRUE, And, Atom, Eq, EqAtom, FTerm, Var, adom, substitute_arg, substitute_atom
from .normalize import NormalizedKab
from .reasoner import _consistent_sat
from .rewriting import rewrite_ucq
from .spec import DUMMY, ActionDef, EffectSpec, KabSpec, ProcessRule, copy_effects_for


@dataclass(frozen=True, order=True)
class Position:
    pred: str
    index: int = 0  # 0 for concepts, 1/2 for the two role positions

    def __str__(self) -> str:
        return self.pred if self.index == 0 else f"{self.pred}[{self.index}]"


@dataclass(frozen=True, order=True)
class Edge:
    src: Position
    dst: Position
    special: bool
    # (action, effect index, disjunct index, variable or function term)
    provenance: tuple = field(default=(), compare=False)

    def describe(self) -> str:
        kind = "special" if self.special else "normal"
        act, ei, ci, what = self.provenance
        return f"{self.src} -> {self.dst} ({kind}; action {act}, effect {ei}, disjunct {ci}, via {what})"


@dataclass(frozen=True)
class DependencyGraph:
    nodes: frozenset
    edges: frozenset

    def successors(self) -> dict:
        out: dict = {n: set() for n in self.nodes}
        for e in self.edges:
            out[e.src].add(e.dst)
        return out

    def shape(self) -> tuple:
        """Node set and (src, dst, special) triples, provenance dropped."""
        return self.nodes, frozenset((e.src, e.dst, e.special) for e in self.edges)


def _positions(name: str, arity: int) -> list[Position]:
    return [Position(name)] if arity == 1 else [Position(name, 1), Position(name, 2)]


def _head_positions(h, i_arg: int) -> Position:
    return Position(h.pred) if len(h.args) == 1 else Position(h.pred, i_arg + 1)


def _mentions(arg, x) -> bool:
    if arg == x:
        return True
    return isinstance(arg, FTerm) and any(_mentions(a, x) for a in arg.args)


def head_alignment(e: EffectSpec) -> dict:
    """Top-level ``[F = t]`` atoms of a normalized condition whose variable F
    does not occur in ``q++``: F can only ever denote t."""
    parts = e.q_minus.parts if isinstance(e.q_minus, And) else (e.q_minus,)
    body_vars = set(e.q_plus.free) | {v for cq in e.q_plus.cqs for v in cq.vars()}
    out: dict = {}
    for p in parts:
        if isinstance(p, EqAtom) and isinstance(p.left, Var) and p.left not in body_vars:
            out.setdefault(p.left, p.right)
    # resolve chains F -> G -> t
    for _ in range(len(out)):
        out = {k: out.get(v, v) if isinstance(v, Var) else v for k, v in out.items()}
    return out


def aligned_head(e: EffectSpec) -> tuple:
    sub = head_alignment(e)
    return tuple(substitute_atom(h, sub) for h in e.head) if sub else e.head


def effect_edges(act: str, ei: int, e: EffectSpec, tbox, rewritten: bool = False):
    q = e.q_plus if rewritten else rewrite_ucq(tbox, e.q_plus)
    head_atoms = aligned_head(e) if rewritten else e.head
    for ci, cq in enumerate(q.cqs):
        # effect-head variables stand for the CQ's head terms
        align = dict(zip(q.free, cq.head))
        heads = []
        for h in head_atoms:
            if isinstance(h, Eq) or h.pred == DUMMY:
                continue
            for j, a in enumerate(h.args):
                heads.append((_head_positions(h, j), substitute_arg(a, align)))
        for at in cq.body:
            if at.pred == DUMMY:
                continue
            for k, x in enumerate(at.args):
                if not isinstance(x, Var):
                    continue
                src = _head_positions(at, k)
                for dst, a in heads:
                    if a == x:
                        yield Edge(src, dst, False, (act, ei, ci, x.name))
                    elif isinstance(a, FTerm) and _mentions(a, x):
                        yield Edge(src, dst, True, (act, ei, ci, str(a)))


def build_dependency_graph(spec: KabSpec, rewritten: bool = False) -> DependencyGraph:
    """One node per concept position and two per role; edges from every
    disjunct of every rewritten effect condition to the head positions.
    ``rewritten`` marks specs whose conditions are already TBox-rewritten
    (normalized specs)."""
    arities = spec.arities
    nodes: set = set()
    for name in spec.alphabet:
        if name != DUMMY:
            nodes.update(_positions(name, arities.get(name, 1)))
    edges: set = set()
    for act in spec.actions:
        for ei, e in enumerate(act.all_effects):
            edges.update(effect_edges(act.name, ei, e, spec.tbox, rewritten))
    return DependencyGraph(frozenset(nodes), frozenset(edges))


def normalized_graph(nk: NormalizedKab) -> DependencyGraph:
    return build_dependency_graph(nk.spec, rewritten=True)


@dataclass(frozen=True)
class AcyclicityResult:
    weakly_acyclic: bool
    cycle: tuple = ()  # edges of a cycle through a special edge

    def __bool__(self) -> bool:
        return self.weakly_acyclic


def is_weakly_acyclic(g: DependencyGraph) -> AcyclicityResult:
    dg = nx.DiGraph()
    dg.add_nodes_from(g.nodes)
    by_pair: dict = {}
    for e in sorted(g.edges):
        dg.add_edge(e.src, e.dst)
        by_pair.setdefault((e.src, e.dst), []).append(e)
    comp = {}
    for i, scc in enumerate(nx.strongly_connected_components(dg)):
        for n in scc:
            comp[n] = i
    specials = sorted(e for e in g.edges if e.special and comp[e.src] == comp[e.dst])
    if not specials:
        return AcyclicityResult(True)
    first = specials[0]
    path = nx.shortest_path(dg, first.dst, first.src)
    cycle = [first]
    for a, b in zip(path, path[1:]):
        cycle.append(by_pair[(a, b)][0])
    return AcyclicityResult(False, tuple(cycle))


def check_spec(spec: KabSpec) -> AcyclicityResult:
    return is_weakly_acyclic(build_dependency_graph(spec))


# ------------------------------------------------------------ dominant

GAMMA_PLUS = "gamma_plus"


def positive_dominant(nk: NormalizedKab) -> KabSpec:
    """Drop negative conditions, ``q=`` and equality heads; one parameterless
    action with COPYALL; empty TBox; the equality-free initial ABox."""
    nspec = nk.spec
    sat = _consistent_sat(nspec.tbox, nspec.abox0)
    abox0 = frozenset(
        Atom(a.pred, tuple(sat.rep_of(t) for t in a.args)) for a in nspec.abox0 if isinstance(a, Atom)
    )
    effects = []
    for act in nspec.actions:
        for e in act.all_effects:
            head = tuple(h for h in aligned_head(e) if not isinstance(h, Eq))
            eff = EffectSpec(e.q_plus, TRUE, head)
            if head and eff not in effects:
                effects.append(eff)
    names = set(nspec.alphabet)
    arities = dict(nspec.arities)
    copies = copy_effects_for(names, arities)
    action = ActionDef(GAMMA_PLUS, (), tuple(effects), True, copies)
    return KabSpec(
        tbox=EMPTY_TBOX,
        abox0=abox0,
        actions=(action,),
        process=(ProcessRule(TRUE, GAMMA_PLUS, ()),),
        functions=nspec.functions,
        constants=nspec.constants,
    )


def dominant_graph(dom: KabSpec) -> DependencyGraph:
    return build_dependency_graph(dom, rewritten=True)


def _match(index: dict, body: tuple, b: dict):
    if not body:
        yield b
        return
    at, rest = body[0], body[1:]
    for tup in index.get(at.pred, ()):
        nb = dict(b)
        ok = True
        for arg, val in zip(at.args, tup):
            if isinstance(arg, Var):
                cur = nb.setdefault(arg, val)
                if cur != val:
                    ok = False
                    break
            elif arg != val:
                ok = False
                break
        if ok:
            yield from _match(index, rest, nb)


def _head_vars(head) -> set:
    out: set = set()
    for h in head:
        for a in h.args:
            stack = [a]
            while stack:
                x = stack.pop()
                if isinstance(x, Var):
                    out.add(x)
                elif isinstance(x, FTerm):
                    stack.extend(x.args)
    return out


def chase_step(dom: KabSpec, abox: frozenset) -> frozenset:
    index: dict = {}
    for a in abox:
        index.setdefault(a.pred, set()).add(a.args)
    terms = sorted(adom(abox))
    out = set(abox)
    (action,) = dom.actions
    for e in action.all_effects:
        for cq in e.q_plus.cqs:
            for b in _match(index, tuple(sorted(cq.body, key=lambda a: len(index.get(a.pred, ())))), {}):
                sub = {f: b[h] if isinstance(h, Var) else h for f, h in zip(e.q_plus.free, cq.head)}
                # a parameter used only in the head is unconstrained here
                loose = sorted(_head_vars(e.head) - set(sub))
                for combo in itertools.product(terms, repeat=len(loose)):
                    full = dict(sub)
                    full.update(zip(loose, combo))
                    for h in e.head:
                        out.add(substitute_atom(h, full))
    return frozenset(out)


@dataclass(frozen=True)
class ChaseResult:
    abox: frozenset
    steps: int

    @property
    def adom(self) -> frozenset:
        return adom(self.abox)

    @property
    def adom_size(self) -> int:
        return len(self.adom)


def chase_dominant(dom: KabSpec, max_steps: int = 1000) -> ChaseResult:
    """Iterate the dominant's single action until nothing new is produced."""
    current = dom.abox0
    for step in range(max_steps + 1):
        nxt = chase_step(dom, current)
        if nxt == current:
            return ChaseResult(current, step)
        current = nxt
    raise BudgetExceeded(
        f"positive-dominant chase did not reach a fixpoint within {max_steps} steps",
        weakly_acyclic=None,
    )


def covered_by_chase(sat, chase_terms: frozenset) -> bool:
    """Every term of a state's active domain equals (in that state) some
    term of the chase fixpoint."""
    reps = {sat.rep_of(t) for t in chase_terms}
    return all(t in chase_terms or sat.rep_of(t) in reps for t in sat.adom)


__all__ = [
    "Position",
    "Edge",
    "DependencyGraph",
    "AcyclicityResult",
    "build_dependency_graph",
    "normalized_graph",
    "is_weakly_acyclic",
    "check_spec",
    "positive_dominant",
    "dominant_graph",
    "chase_dominant",
    "chase_step",
    "covered_by_chase",
]
