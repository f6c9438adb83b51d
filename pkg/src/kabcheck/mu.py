"""Fixpoint model checking of first-order mu-calculus formulas over a
finite transition system."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .formula import Diamond, Mu, PredVar
from .model import And, EqAtom, Exists, Not, UcqAtom, free_vars
from .reasoner import holds


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


def validate(phi) -> list[Diagnostic]:
    """Odd-parity fixpoint variables, unbound fixpoint variables and free
    individual variables."""
    out: list[Diagnostic] = []

    def walk(n, neg: int, scope: dict) -> None:
        if isinstance(n, PredVar):
            if n.name not in scope:
                out.append(Diagnostic("unbound variable", f"{n.name} is not bound by a fixpoint"))
            elif (neg - scope[n.name]) % 2:
                out.append(Diagnostic("monotonicity", f"{n.name} occurs under an odd number of negations"))
        elif isinstance(n, Mu):
            walk(n.body, neg, {**scope, n.var: neg})
        elif isinstance(n, Not):
            walk(n.body, neg + 1, scope)
        elif isinstance(n, And):
            for p in n.parts:
                walk(p, neg, scope)
        elif isinstance(n, (Exists, Diamond)):
            walk(n.body, neg, scope)

    walk(phi, 0, {})
    fv = free_vars(phi)
    if fv:
        names = ", ".join(sorted(v.name for v in fv))
        out.append(Diagnostic("unbound variable", f"free individual variables {names}"))
    return out


@lru_cache(maxsize=None)
def pred_vars(n) -> frozenset:
    if isinstance(n, PredVar):
        return frozenset({n.name})
    if isinstance(n, Mu):
        return pred_vars(n.body) - {n.var}
    if isinstance(n, And):
        out: frozenset = frozenset()
        for p in n.parts:
            out |= pred_vars(p)
        return out
    if isinstance(n, (Not, Exists, Diamond)):
        return pred_vars(n.body)
    return frozenset()


@lru_cache(maxsize=None)
def is_local(n) -> bool:
    """True for plain ECQs, which are evaluated state by state."""
    if isinstance(n, (UcqAtom, EqAtom)):
        return True
    if isinstance(n, And):
        return all(is_local(p) for p in n.parts)
    if isinstance(n, (Not, Exists)):
        return is_local(n.body)
    return False


class Checker:
    """Evaluates extensions over one transition system, memoizing on the
    node, the valuation of its free individual variables and the sets
    assigned to its free fixpoint variables."""

    def __init__(self, ts) -> None:
        self.ts = ts
        self.n = len(ts.states)
        self.all = frozenset(range(self.n))
        self.succ = ts.successors()
        self.adoms = [sat.adom for sat in ts.sats]
        self.universe = sorted(set().union(*self.adoms)) if self.adoms else []
        self.memo: dict = {}
        self.iterations = 0

    def extension(self, phi, v: dict | None = None, V: dict | None = None) -> frozenset:
        return self._ext(phi, v or {}, V or {})

    def _ext(self, n, v: dict, V: dict) -> frozenset:
        fv = free_vars(n)
        key = (
            n,
            frozenset((x, t) for x, t in v.items() if x in fv),
            frozenset((z, V[z]) for z in pred_vars(n)),
        )
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        out = self._compute(n, v, V)
        self.memo[key] = out
        return out

    def _compute(self, n, v: dict, V: dict) -> frozenset:
        if is_local(n):
            sigma = {x: t for x, t in v.items() if x in free_vars(n)}
            return frozenset(s for s in range(self.n) if holds(self.ts.sats[s], n, sigma))
        if isinstance(n, Not):
            return self.all - self._ext(n.body, v, V)
        if isinstance(n, And):
            out = self.all
            for p in n.parts:
                out &= self._ext(p, v, V)
                if not out:
                    break
            return out
        if isinstance(n, Exists):
            out: set = set()
            for t in self.universe:
                here = frozenset(s for s in range(self.n) if t in self.adoms[s])
                if here - out:
                    out |= here & self._ext(n.body, {**v, n.var: t}, V)
            return frozenset(out)
        if isinstance(n, Diamond):
            inner = self._ext(n.body, v, V)
            return frozenset(s for s in range(self.n) if self.succ[s] & inner)
        if isinstance(n, PredVar):
            return V[n.name]
        if isinstance(n, Mu):
            return self.approximants(n, v, V)[-1]
        raise TypeError(f"not a formula node: {n!r}")

    def approximants(self, n: Mu, v: dict, V: dict) -> list[frozenset]:
        """Kleene iteration from the empty set; the last entry is the least
        fixpoint."""
        seq = [frozenset()]
        while True:
            self.iterations += 1
            nxt = self._ext(n.body, v, {**V, n.var: seq[-1]})
            if nxt == seq[-1]:
                return seq
            seq.append(nxt)


@dataclass
class CheckResult:
    verdict: bool
    iterations: int
    witness: list = field(default_factory=list)  # [(state, label, state), ...]
    diagnostics: list = field(default_factory=list)


def _rank_path(checker: Checker, mu: Mu) -> list:
    seq = checker.approximants(mu, {}, {})
    rank = {}
    for i, e in enumerate(seq):
        for s in e:
            rank.setdefault(s, i)
    path = []
    s = checker.ts.initial
    labels = {}
    for src, label, dst in checker.ts.edges:
        labels.setdefault((src, dst), label)
    while rank.get(s, 0) > 1:
        nxt = [d for d in sorted(checker.succ[s]) if rank.get(d, len(seq)) < rank[s]]
        if not nxt:
            break
        path.append((s, labels[(s, nxt[0])], nxt[0]))
        s = nxt[0]
    return path


def check(phi, ts) -> CheckResult:
    """Υ ⊨ phi iff the initial state is in the extension of phi. A true
    least fixpoint (or a false negated one) comes with a path along which
    the fixpoint is unfolded."""
    diags = validate(phi)
    if diags:
        return CheckResult(False, 0, [], diags)
    c = Checker(ts)
    verdict = ts.initial in c.extension(phi)
    witness: list = []
    if verdict and isinstance(phi, Mu):
        witness = _rank_path(c, phi)
    elif not verdict and isinstance(phi, Not) and isinstance(phi.body, Mu):
        witness = _rank_path(c, phi.body)
    return CheckResult(verdict, c.iterations, witness)


__all__ = ["Checker", "CheckResult", "Diagnostic", "check", "validate", "pred_vars"]
