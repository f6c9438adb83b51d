"""Immutable domain types: terms, TBox/ABox assertions, queries."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Union


# ---------------------------------------------------------------- terms


@dataclass(frozen=True, eq=False)
class Term:
    """A constant (no args) or a function term ``fn(args)``."""

    name: str
    args: tuple["Term", ...] = ()
    _key: tuple = field(default=(), compare=False, repr=False)
    _hash: int = field(default=0, compare=False, repr=False)

    def __post_init__(self) -> None:
        # flat key: constants first, then function terms by depth and text
        if not self.args:
            key = (0, 0, self.name)
        else:
            depth = 1 + max(a._key[1] for a in self.args)
            key = (1, depth, f"{self.name}({', '.join(a._key[2] for a in self.args)})")
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return isinstance(other, Term) and self._hash == other._hash and self._key == other._key

    def __lt__(self, other: "Term") -> bool:
        return self._key < other._key

    def __le__(self, other: "Term") -> bool:
        return self._key <= other._key

    @property
    def is_function(self) -> bool:
        return bool(self.args)

    @property
    def sort_key(self) -> tuple:
        return self._key

    def subterms(self) -> frozenset:
        subs = self.__dict__.get("_subs")
        if subs is not None:
            return subs
        # post-order without recursion; deep terms arise in long runs
        stack = [(self, False)]
        while stack:
            t, ready = stack.pop()
            if "_subs" in t.__dict__:
                continue
            if ready:
                subs = frozenset({t}).union(*(a.__dict__["_subs"] for a in t.args))
                object.__setattr__(t, "_subs", subs)
            else:
                stack.append((t, True))
                stack.extend((a, False) for a in t.args)
        return self.__dict__["_subs"]

    def __str__(self) -> str:
        return self._key[2]

    def __repr__(self) -> str:
        return f"Term({self})"


@lru_cache(maxsize=None)
def const(name: str) -> Term:
    return Term(name)


@lru_cache(maxsize=None)
def _func(name: str, args: tuple[Term, ...]) -> Term:
    return Term(name, args)


def func(name: str, *args: Term) -> Term:
    if not args:
        raise ValueError(f"function term {name} needs at least one argument")
    return _func(name, tuple(args))


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


# Argument of a (possibly non-ground) atom or head term.
Arg = Union[Term, Var]


@dataclass(frozen=True)
class FTerm:
    """Non-ground function term appearing in an effect head, e.g. ``sh(p)``."""

    name: str
    args: tuple["HeadArg", ...]

    def __str__(self) -> str:
        return f"{self.name}({', '.join(str(a) for a in self.args)})"


HeadArg = Union[Term, Var, FTerm]


def is_ground(arg) -> bool:
    if isinstance(arg, Term):
        return True
    if isinstance(arg, FTerm):
        return all(is_ground(a) for a in arg.args)
    return False


def arg_vars(arg) -> set[Var]:
    if isinstance(arg, Var):
        return {arg}
    if isinstance(arg, FTerm):
        out: set[Var] = set()
        for a in arg.args:
            out |= arg_vars(a)
        return out
    return set()


def term_sort_key(arg) -> tuple:
    if isinstance(arg, Term):
        return (0,) + arg.sort_key
    if isinstance(arg, Var):
        return (1, arg.name)
    return (2, arg.name, tuple(term_sort_key(a) for a in arg.args))


# ------------------------------------------------------------ assertions


@dataclass(frozen=True)
class Atom:
    """Concept (arity 1) or role (arity 2) atom; ground in ABoxes."""

    pred: str
    args: tuple

    @property
    def is_concept(self) -> bool:
        return len(self.args) == 1

    def __str__(self) -> str:
        return f"{self.pred}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Eq:
    left: object
    right: object

    def __str__(self) -> str:
        return f"{self.left} = {self.right}"


ABoxAssertion = Union[Atom, Eq]
ABox = frozenset


def assertion_sort_key(a) -> tuple:
    if isinstance(a, Atom):
        return (0 if a.is_concept else 1, a.pred, tuple(term_sort_key(t) for t in a.args))
    return (2, "", (term_sort_key(a.left), term_sort_key(a.right)))


def sorted_assertions(abox: Iterable) -> list:
    return sorted(abox, key=assertion_sort_key)


def adom(abox: Iterable) -> frozenset[Term]:
    """Ground terms occurring as assertion arguments (subterms excluded)."""
    out: set[Term] = set()
    for a in abox:
        if isinstance(a, Atom):
            out.update(a.args)
        else:
            out.add(a.left)
            out.add(a.right)
    return frozenset(out)


def abox_alphabet(abox: Iterable) -> frozenset[str]:
    return frozenset(a.pred for a in abox if isinstance(a, Atom))


# ----------------------------------------------------------- DL syntax


@dataclass(frozen=True, order=True)
class Role:
    name: str
    inverse: bool = False

    def inv(self) -> "Role":
        return Role(self.name, not self.inverse)

    def __str__(self) -> str:
        return f"INV {self.name}" if self.inverse else self.name


@dataclass(frozen=True, order=True)
class Concept:
    """Atomic concept name N."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class SomeRole:
    """Unqualified existential ∃R."""

    role: Role

    def __str__(self) -> str:
        return f"EXISTS {self.role}"


Basic = Union[Concept, SomeRole]


@dataclass(frozen=True)
class Neg:
    """Negated basic concept or role; only at the top of a right-hand side."""

    inner: object

    def __str__(self) -> str:
        return f"NOT {self.inner}"


@dataclass(frozen=True)
class ConceptInclusion:
    lhs: Basic
    rhs: object  # Basic | Neg

    @property
    def negative(self) -> bool:
        return isinstance(self.rhs, Neg)


@dataclass(frozen=True)
class RoleInclusion:
    lhs: Role
    rhs: object  # Role | Neg

    @property
    def negative(self) -> bool:
        return isinstance(self.rhs, Neg)


@dataclass(frozen=True)
class Functional:
    role: Role


TBoxAssertion = Union[ConceptInclusion, RoleInclusion, Functional]


def _expr_names(e) -> set[str]:
    if isinstance(e, Neg):
        return _expr_names(e.inner)
    if isinstance(e, SomeRole):
        return {e.role.name}
    return {e.name}


@dataclass(frozen=True)
class TBox:
    assertions: frozenset = frozenset()

    def __iter__(self):
        return iter(self.assertions)

    def __len__(self) -> int:
        return len(self.assertions)

    @property
    def concept_names(self) -> frozenset[str]:
        out: set[str] = set()
        for a in self.assertions:
            if isinstance(a, ConceptInclusion):
                for side in (a.lhs, a.rhs):
                    inner = side.inner if isinstance(side, Neg) else side
                    if isinstance(inner, Concept):
                        out.add(inner.name)
        return frozenset(out)

    @property
    def role_names(self) -> frozenset[str]:
        out: set[str] = set()
        for a in self.assertions:
            if isinstance(a, Functional):
                out.add(a.role.name)
            elif isinstance(a, RoleInclusion):
                out |= _expr_names(a.lhs) | _expr_names(a.rhs)
            else:
                for side in (a.lhs, a.rhs):
                    inner = side.inner if isinstance(side, Neg) else side
                    if isinstance(inner, SomeRole):
                        out.add(inner.role.name)
        return frozenset(out)

    @property
    def names(self) -> frozenset[str]:
        return self.concept_names | self.role_names


EMPTY_TBOX = TBox()


def tbox_issues(tbox: TBox) -> list[str]:
    """Functional roles must not be specialized by any role inclusion."""
    issues = []
    functional = {a.role.name: a for a in tbox if isinstance(a, Functional)}
    for a in sorted(tbox, key=str):
        if isinstance(a, RoleInclusion) and not a.negative and a.rhs.name in functional:
            issues.append(
                f"(funct {functional[a.rhs.name].role}) conflicts with role inclusion "
                f"{a.lhs} ISA {a.rhs}: functional roles cannot be specialized"
            )
    return issues


def alphabet(tbox: TBox, abox: Iterable) -> frozenset[str]:
    return tbox.names | abox_alphabet(abox)


# --------------------------------------------------------------- queries


@dataclass(frozen=True)
class CQ:
    """Conjunctive query. ``head`` lines up with the enclosing UCQ's free
    variables; after rewriting it may repeat variables or hold constants."""

    head: tuple
    body: tuple

    def vars(self) -> set[Var]:
        out: set[Var] = set()
        for at in self.body:
            out.update(a for a in at.args if isinstance(a, Var))
        out.update(a for a in self.head if isinstance(a, Var))
        return out

    def existential(self) -> set[Var]:
        return self.vars() - {a for a in self.head if isinstance(a, Var)}


@dataclass(frozen=True)
class UCQ:
    free: tuple
    cqs: tuple

    def preds(self) -> set[str]:
        return {at.pred for cq in self.cqs for at in cq.body}


def cq_query(free: Iterable[Var], body: Iterable[Atom]) -> UCQ:
    free = tuple(free)
    return UCQ(free, (CQ(free, tuple(body)),))


# ECQ / formula nodes. Temporal nodes live in kabcheck.mu.


@dataclass(frozen=True)
class UcqAtom:
    """Certain-answer bracket ``[q]``."""

    ucq: UCQ


@dataclass(frozen=True)
class EqAtom:
    """``[x = y]`` over variables or ground terms."""

    left: object
    right: object


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Exists:
    var: Var
    body: object


TRUE = And(())


def free_vars(q) -> frozenset[Var]:
    """Free individual variables of an ECQ (or μ-formula)."""
    return _free_vars(q)


@lru_cache(maxsize=None)
def _free_vars(q) -> frozenset[Var]:
    if isinstance(q, UcqAtom):
        return frozenset(q.ucq.free)
    if isinstance(q, EqAtom):
        return frozenset(a for a in (q.left, q.right) if isinstance(a, Var))
    if isinstance(q, And):
        out: frozenset = frozenset()
        for p in q.parts:
            out |= _free_vars(p)
        return out
    if isinstance(q, Exists):
        return _free_vars(q.body) - {q.var}
    if hasattr(q, "body"):
        return _free_vars(q.body)
    return frozenset()


def ecq_preds(q) -> set[str]:
    if isinstance(q, UcqAtom):
        return q.ucq.preds()
    if isinstance(q, And):
        out: set[str] = set()
        for p in q.parts:
            out |= ecq_preds(p)
        return out
    if hasattr(q, "body"):
        return ecq_preds(q.body)
    return set()


def substitute_arg(arg, sub: dict):
    if isinstance(arg, Var):
        return sub.get(arg, arg)
    if isinstance(arg, FTerm):
        args = tuple(substitute_arg(a, sub) for a in arg.args)
        if all(isinstance(a, Term) for a in args):
            return func(arg.name, *args)
        return FTerm(arg.name, args)
    return arg


def substitute_atom(at, sub: dict):
    if isinstance(at, Atom):
        return Atom(at.pred, tuple(substitute_arg(a, sub) for a in at.args))
    return Eq(substitute_arg(at.left, sub), substitute_arg(at.right, sub))
