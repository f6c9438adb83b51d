"""Parser for the ``.kab`` specification language and ``.mu`` formula files.

Parsing happens in two passes. The first builds raw syntax trees; the second
resolves identifiers (constant or variable, concept or role), checks every
well-formedness invariant and reports all violations together.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import Issue, Location, ParseError, ValidationError
from .formula import FALSE, Diamond, Mu, PredVar, box, forall, implies, lor, nu
from .model import (
    CQ,
    TRUE,
    UCQ,
    And,
    Atom,
    Concept,
    ConceptInclusion,
    Eq,
    EqAtom,
    Exists,
    FTerm,
    Functional,
    Neg,
    Not,
    Role,
    RoleInclusion,
    SomeRole,
    TBox,
    Term,
    UcqAtom,
    Var,
    const,
    free_vars,
    func,
    tbox_issues,
)
from .spec import DUMMY, ActionDef, EffectSpec, KabSpec, ProcessRule, copy_effects_for, spec_alphabet

KEYWORDS = {
    "TBOX", "ABOX", "ACTION", "ACTIONS", "PROCESS", "FUNCTIONS", "CONSTANTS", "ISA", "NOT",
    "DISJOINT", "FUNCT", "EXISTS", "INV", "ROLE", "COPYALL", "EX", "ALL", "mu", "nu", "true",
    "false",
}

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)"
    r"|(?P<nl>\n)"
    r"|(?P<comment>//[^\n]*)"
    r"|(?P<id>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<num>[0-9]+)"
    r"|(?P<sym><->|\[-\]|->|[{}()\[\];,.&|!=/:])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # id, num, kw, sym, eof
    value: str
    loc: Location


def tokenize(text: str) -> list[Token]:
    out = []
    line, col_start, pos = 1, 0, 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        loc = Location(line, pos - col_start + 1)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", loc)
        kind = m.lastgroup
        value = m.group()
        pos = m.end()
        if kind == "nl":
            line += 1
            col_start = pos
            continue
        if kind in ("ws", "comment"):
            continue
        if kind == "id" and value in KEYWORDS:
            kind = "kw"
        out.append(Token(kind, value, loc))
    out.append(Token("eof", "", Location(line, pos - col_start + 1)))
    return out


# ----------------------------------------------------------- raw syntax


@dataclass
class RTerm:
    name: str
    args: list | None  # None for identifiers
    loc: Location
    is_num: bool = False


@dataclass
class RAtom:
    pred: str
    args: list
    loc: Location


@dataclass
class REq:
    left: RTerm
    right: RTerm
    loc: Location


@dataclass
class RCQ:
    exvars: list
    atoms: list
    loc: Location


@dataclass
class RNode:
    """Raw ECQ/formula node: kind plus children."""

    kind: str
    loc: Location
    items: tuple = ()


class _Parser:
    def __init__(self, text: str, temporal: bool = False) -> None:
        self.toks = tokenize(text)
        self.i = 0
        self.temporal = temporal

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, value: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "kw") and t.value == value

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, value: str) -> Token:
        if not self.at(value):
            self.fail(f"expected {value!r}")
        return self.advance()

    def accept(self, value: str) -> bool:
        if self.at(value):
            self.advance()
            return True
        return False

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "id":
            self.fail(f"expected {what}")
        return self.advance()

    def fail(self, msg: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.value)
        raise ParseError(f"{msg}, found {found}", t.loc)

    # -- terms and atoms

    def term(self) -> RTerm:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return RTerm(t.value, None, t.loc, is_num=True)
        name = self.ident("term")
        if self.accept("("):
            args = [self.term()]
            while self.accept(","):
                args.append(self.term())
            self.expect(")")
            return RTerm(name.value, args, name.loc)
        return RTerm(name.value, None, name.loc)

    def atom(self) -> RAtom:
        name = self.ident("predicate name")
        self.expect("(")
        args = [self.term()]
        while self.accept(","):
            args.append(self.term())
        self.expect(")")
        return RAtom(name.value, args, name.loc)

    def assertion(self):
        """Atom or ``t = u`` (ABox assertions and effect heads)."""
        left = self.term()
        if self.at("="):
            loc = self.advance().loc
            return REq(left, self.term(), loc)
        if left.args is None or left.is_num:
            self.fail("expected '(' or '='")
        return RAtom(left.name, left.args, left.loc)

    def idlist(self) -> list[Token]:
        out = [self.ident("variable")]
        while self.accept(","):
            out.append(self.ident("variable"))
        return out

    # -- queries

    def ucq(self) -> list[RCQ]:
        cqs = [self.cq()]
        while self.accept("|"):
            cqs.append(self.cq())
        return cqs

    def cq(self) -> RCQ:
        loc = self.tok.loc
        exvars: list = []
        atoms: list = []
        while True:
            while self.accept("EX"):
                exvars.extend(self.idlist())
                self.expect(".")
            atoms.append(self.atom())
            if not self.accept("&"):
                break
        return RCQ(exvars, atoms, loc)

    def bracket(self) -> RNode:
        loc = self.expect("[").loc
        start = self.i
        try:
            left = self.term()
            is_eq = self.at("=")
        except ParseError:
            is_eq = False
        if is_eq:
            self.advance()
            right = self.term()
            self.expect("]")
            return RNode("eq", loc, (left, right))
        self.i = start
        cqs = self.ucq()
        self.expect("]")
        return RNode("ucq", loc, (cqs,))

    # -- ECQ / formula expressions

    def expr(self) -> RNode:
        left = self.disj()
        if self.temporal and self.at("->"):
            loc = self.advance().loc
            return RNode("imp", loc, (left, self.expr()))
        return left

    def disj(self) -> RNode:
        left = self.conj()
        while self.at("|"):
            loc = self.advance().loc
            left = RNode("or", loc, (left, self.conj()))
        return left

    def conj(self) -> RNode:
        loc = self.tok.loc
        parts = [self.unary()]
        while self.accept("&"):
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else RNode("and", loc, tuple(parts))

    def body(self) -> RNode:
        return self.expr() if self.temporal else self.disj()

    def unary(self) -> RNode:
        t = self.tok
        if self.accept("!"):
            return RNode("not", t.loc, (self.unary(),))
        if self.at("EX") or self.at("ALL"):
            self.advance()
            names = self.idlist()
            self.expect(".")
            return RNode("ex" if t.value == "EX" else "all", t.loc, (names, self.body()))
        if self.temporal:
            if self.accept("<->"):
                return RNode("dia", t.loc, (self.unary(),))
            if self.accept("[-]"):
                return RNode("box", t.loc, (self.unary(),))
            if self.at("mu") or self.at("nu"):
                self.advance()
                z = self.ident("predicate variable")
                self.expect(".")
                return RNode(t.value, t.loc, (z, self.body()))
        if self.at("["):
            return self.bracket()
        if self.accept("true"):
            return RNode("true", t.loc)
        if self.accept("false"):
            return RNode("false", t.loc)
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        if self.temporal and t.kind == "id":
            self.advance()
            return RNode("zvar", t.loc, (t.value,))
        self.fail("expected a query")

    # -- KAB sections

    def kab(self) -> "_RawKab":
        raw = _RawKab()
        while self.tok.kind != "eof":
            t = self.tok
            if self.accept("FUNCTIONS"):
                self.expect("{")
                while not self.accept("}"):
                    name = self.ident("function symbol")
                    self.expect("/")
                    if self.tok.kind != "num":
                        self.fail("expected arity")
                    arity = int(self.advance().value)
                    raw.functions.append((name.value, arity, name.loc))
                    self.expect(";")
            elif self.accept("CONSTANTS"):
                self.expect("{")
                while not self.accept("}"):
                    if self.tok.kind not in ("id", "num"):
                        self.fail("expected constant name")
                    c = self.advance()
                    raw.constants.append((c.value, c.loc))
                    if not self.accept(","):
                        self.expect(";")
            elif self.accept("TBOX"):
                self.expect("{")
                while not self.accept("}"):
                    raw.tbox.append(self.tbox_stmt())
                    self.expect(";")
            elif self.accept("ABOX"):
                self.expect("{")
                while not self.accept("}"):
                    raw.abox.append(self.assertion())
                    self.expect(";")
            elif self.accept("ACTIONS"):
                self.expect("{")
                while not self.accept("}"):
                    raw.actions.append(self.action())
            elif self.at("ACTION"):
                raw.actions.append(self.action())
            elif self.accept("PROCESS"):
                self.expect("{")
                while not self.accept("}"):
                    cond = self.disj()
                    self.expect("->")
                    name = self.ident("action name")
                    self.expect("(")
                    args = [] if self.at(")") else self.idlist()
                    self.expect(")")
                    self.expect(";")
                    raw.rules.append((cond, name, args, t.loc))
            else:
                self.fail("expected a section keyword")
        return raw

    def role(self):
        inverse = self.accept("INV")
        name = self.ident("role name")
        return ("role", name.value, inverse, name.loc)

    def basic(self):
        if self.accept("EXISTS"):
            return ("exists", self.role())
        name = self.ident("concept name")
        return ("name", name.value, name.loc)

    def tbox_stmt(self):
        t = self.tok
        if self.accept("FUNCT"):
            return ("funct", self.role(), t.loc)
        if self.accept("ROLE"):
            lhs = self.role()
            if self.accept("DISJOINT"):
                return ("ri", lhs, self.role(), True, t.loc)
            self.expect("ISA")
            neg = self.accept("NOT")
            return ("ri", lhs, self.role(), neg, t.loc)
        lhs = self.basic()
        if self.accept("DISJOINT"):
            return ("ci", lhs, self.basic(), True, t.loc)
        self.expect("ISA")
        neg = self.accept("NOT")
        return ("ci", lhs, self.basic(), neg, t.loc)

    def action(self):
        kw = self.expect("ACTION")
        name = self.ident("action name")
        self.expect("(")
        params = [] if self.at(")") else self.idlist()
        self.expect(")")
        self.expect("{")
        effects = []
        copy_all = False
        while not self.accept("}"):
            if self.accept("COPYALL"):
                copy_all = True
            else:
                effects.append(self.effect())
            self.expect(";")
        return (name, params, effects, copy_all, kw.loc)

    def effect(self):
        loc = self.tok.loc
        qp = self.bracket()
        if qp.kind != "ucq":
            raise ParseError("an effect condition must start with a bracketed UCQ", qp.loc)
        qm = None
        if self.accept("&"):
            qm = self.disj()
        self.expect("->")
        self.expect("{")
        head = []
        if not self.at("}"):
            head.append(self.assertion())
            while self.accept(","):
                head.append(self.assertion())
        self.expect("}")
        return (qp, qm, head, loc)


class _RawKab:
    def __init__(self) -> None:
        self.functions: list = []
        self.constants: list = []
        self.tbox: list = []
        self.abox: list = []
        self.actions: list = []
        self.rules: list = []


# ------------------------------------------------------------ resolution


class _Resolver:
    def __init__(self, functions: dict, constants: set, temporal: bool) -> None:
        self.functions = functions  # name -> arity
        self.constants = constants
        self.temporal = temporal
        self.issues: list[Issue] = []
        self.arity_uses: dict = {}  # pred -> list of (arity, loc)
        # fixpoint variables in scope, with the negation depth at their binder
        self.zscope: dict = {}
        self.neg = 0

    def issue(self, category: str, message: str, loc: Location) -> None:
        self.issues.append(Issue(category, message, loc))

    def note_pred(self, pred: str, arity: int, loc: Location) -> None:
        self.arity_uses.setdefault(pred, []).append((arity, loc))
        if arity not in (1, 2):
            self.issue("arity", f"predicate {pred} has arity {arity}; only 1 or 2 allowed", loc)

    def is_constant(self, t: RTerm) -> bool:
        return t.is_num or t.name in self.constants

    def ground(self, t: RTerm) -> Term:
        if t.args is None:
            return const(t.name)
        args = [self.ground(a) for a in t.args]
        self.check_function(t)
        return func(t.name, *args)

    def check_function(self, t: RTerm) -> None:
        if t.name not in self.functions:
            self.issue("unknown symbol", f"undeclared function symbol {t.name}", t.loc)
        elif self.functions[t.name] != len(t.args):
            self.issue(
                "arity",
                f"function {t.name} declared with arity {self.functions[t.name]}, used with {len(t.args)}",
                t.loc,
            )

    def query_term(self, t: RTerm, bound: set):
        """Identifier inside a query: bound names are variables; in KAB
        conditions other non-constant names are free variables, in formulas
        they are constants."""
        if t.args is None:
            if not t.is_num and t.name in bound:
                return Var(t.name)
            if self.is_constant(t) or self.temporal:
                return const(t.name)
            return Var(t.name)
        args = [self.query_term(a, bound) for a in t.args]
        self.check_function(t)
        if all(isinstance(a, Term) for a in args):
            return func(t.name, *args)
        self.issue("syntax", f"function term {t.name}(...) in a query must be ground", t.loc)
        return const(t.name)

    def ucq(self, cqs: list[RCQ], bound: set, loc: Location) -> UCQ:
        resolved = []
        frees = []
        for rc in cqs:
            ex = {v.value for v in rc.exvars}
            inner = bound | ex
            atoms = []
            for ra in rc.atoms:
                self.note_pred(ra.pred, len(ra.args), ra.loc)
                atoms.append(Atom(ra.pred, tuple(self.query_term(a, inner) for a in ra.args)))
            vs = {a for at in atoms for a in at.args if isinstance(a, Var)}
            free = {v for v in vs if v.name not in ex}
            frees.append(free)
            resolved.append(atoms)
        free = set().union(*frees)
        for rc, f in zip(cqs, frees):
            if f != free:
                missing = ", ".join(sorted(v.name for v in free - f))
                self.issue("free-variable mismatch", f"disjunct lacks free variables {missing}", rc.loc)
        head = tuple(sorted(free))
        return UCQ(head, tuple(CQ(head, tuple(atoms)) for atoms in resolved))

    def node(self, n: RNode, bound: set):
        k = n.kind
        if k == "ucq":
            return UcqAtom(self.ucq(n.items[0], bound, n.loc))
        if k == "eq":
            return EqAtom(self.query_term(n.items[0], bound), self.query_term(n.items[1], bound))
        if k == "not":
            self.neg += 1
            try:
                return Not(self.node(n.items[0], bound))
            finally:
                self.neg -= 1
        if k == "and":
            return And(tuple(self.node(p, bound) for p in n.items))
        if k == "or":
            return lor(self.node(n.items[0], bound), self.node(n.items[1], bound))
        if k == "imp":
            self.neg += 1
            try:
                lhs = self.node(n.items[0], bound)
            finally:
                self.neg -= 1
            return implies(lhs, self.node(n.items[1], bound))
        if k in ("ex", "all"):
            names = [t.value for t in n.items[0]]
            body = self.node(n.items[1], bound | set(names))
            for name in reversed(names):
                body = Exists(Var(name), body) if k == "ex" else forall(Var(name), body)
            return body
        if k == "true":
            return TRUE
        if k == "false":
            return FALSE
        if k == "dia":
            return Diamond(self.node(n.items[0], bound))
        if k == "box":
            return box(self.node(n.items[0], bound))
        if k in ("mu", "nu"):
            z = n.items[0].value
            saved = self.zscope.get(z)
            self.zscope[z] = self.neg
            try:
                body = self.node(n.items[1], bound)
            finally:
                if saved is None:
                    del self.zscope[z]
                else:
                    self.zscope[z] = saved
            return Mu(z, body) if k == "mu" else nu(z, body)
        if k == "zvar":
            z = n.items[0]
            if z not in self.zscope:
                self.issue("unbound variable", f"predicate variable {z} is not bound by mu/nu", n.loc)
            elif (self.neg - self.zscope[z]) % 2:
                self.issue("monotonicity", f"{z} occurs under an odd number of negations", n.loc)
            return PredVar(z)
        raise AssertionError(k)


def _decode(text) -> str:
    if isinstance(text, (bytes, bytearray)):
        try:
            return bytes(text).decode("utf-8")
        except UnicodeDecodeError as e:
            prefix = bytes(text)[: e.start]
            line = prefix.count(b"\n") + 1
            col = e.start - (prefix.rfind(b"\n") + 1) + 1
            raise ParseError("input is not valid UTF-8", Location(line, col), "encoding") from None
    return text


def _guard(fn, text):
    try:
        return fn(text)
    except RecursionError:
        raise ParseError("input nested too deeply", Location(1, 1)) from None


def parse_kab(text, allow_reserved: bool = False) -> KabSpec:
    """Parse and validate a KAB specification."""
    return _guard(lambda t: _parse_kab(_decode(t), allow_reserved), text)


def parse_formula(text) -> object:
    """Parse one temporal formula (derived operators desugared)."""
    return _guard(lambda t: _parse_formula(_decode(t)), text)


def parse_formulas(text) -> list[tuple[str, object]]:
    """Parse a ``.mu`` file: ``;``-separated formulas, each optionally
    prefixed by ``name:``."""
    return _guard(lambda t: _parse_formulas(_decode(t)), text)


def _parse_formula(text: str):
    p = _Parser(text, temporal=True)
    raw = p.expr()
    if p.tok.kind != "eof":
        p.fail("unexpected trailing input")
    r = _Resolver({}, set(), temporal=True)
    phi = r.node(raw, set())
    if r.issues:
        raise ValidationError(r.issues)
    return phi


def _parse_formulas(text: str):
    p = _Parser(text, temporal=True)
    out = []
    r = _Resolver({}, set(), temporal=True)
    while p.tok.kind != "eof":
        name = f"phi{len(out) + 1}"
        if p.tok.kind == "id" and p.toks[p.i + 1].value == ":":
            name = p.advance().value
            p.advance()
        raw = p.expr()
        out.append((name, r.node(raw, set())))
        if p.tok.kind != "eof":
            p.expect(";")
    if r.issues:
        raise ValidationError(r.issues)
    return out


def _constant_names(t: Term, out: set) -> None:
    if t.args:
        for a in t.args:
            _constant_names(a, out)
    else:
        out.add(t.name)


def _parse_kab(text: str, allow_reserved: bool) -> KabSpec:
    raw = _Parser(text).kab()
    issues: list[Issue] = []

    functions: dict = {}
    for name, arity, loc in raw.functions:
        if name in functions and functions[name] != arity:
            issues.append(Issue("arity", f"function {name} declared twice with different arities", loc))
        if arity < 1:
            issues.append(Issue("arity", f"function {name} needs arity at least 1", loc))
        functions[name] = arity
    declared = {c for c, _ in raw.constants}

    r = _Resolver(functions, set(declared), temporal=False)

    # ABox: every identifier is a constant
    abox = set()
    for a in raw.abox:
        if isinstance(a, REq):
            abox.add(Eq(r.ground(a.left), r.ground(a.right)))
        else:
            r.note_pred(a.pred, len(a.args), a.loc)
            abox.add(Atom(a.pred, tuple(r.ground(t) for t in a.args)))
    for a in abox:
        for t in (a.left, a.right) if isinstance(a, Eq) else a.args:
            _constant_names(t, r.constants)

    # TBox (kinds of plain names are settled once all uses are known)
    def note_role(role):
        _, name, _, loc = role
        r.note_pred(name, 2, loc)

    pending = []
    for stmt in raw.tbox:
        if stmt[0] == "funct":
            note_role(stmt[1])
        elif stmt[0] == "ri":
            note_role(stmt[1])
            note_role(stmt[2])
        else:
            _, lhs, rhs, neg, loc = stmt
            if lhs[0] == "name" and rhs[0] == "name":
                pending.append(stmt)
                continue
            for b in (lhs, rhs):
                if b[0] == "name":
                    r.note_pred(b[1], 1, b[2])
                else:
                    note_role(b[1])

    # queries and heads of actions and rules
    actions = []
    names_seen: dict = {}
    for name_tok, params, effects, copy_all, loc in raw.actions:
        name = name_tok.value
        if name in names_seen:
            issues.append(Issue("duplicate", f"action {name} defined twice", name_tok.loc))
        names_seen[name] = [p.value for p in params]
        pnames = [p.value for p in params]
        if len(set(pnames)) != len(pnames):
            issues.append(Issue("duplicate", f"action {name} repeats a parameter", name_tok.loc))
        pset = set(pnames)
        out_effects = []
        for qp_raw, qm_raw, head_raw, eloc in effects:
            qp = r.ucq(qp_raw.items[0], pset, qp_raw.loc)
            allowed = {v.name for v in qp.free} | pset
            qm = TRUE if qm_raw is None else r.node(qm_raw, allowed)
            extra = {v.name for v in free_vars(qm)} - allowed
            # normalized specs carry join equalities over variables that the
            # renamed positive query no longer mentions
            if extra and not allow_reserved:
                issues.append(
                    Issue(
                        "free-variable mismatch",
                        f"negative condition uses variables {', '.join(sorted(extra))} not free in the positive query",
                        eloc,
                    )
                )
            head = []
            for h in head_raw:
                head.append(_head(r, h, allowed))
            out_effects.append(EffectSpec(qp, qm, tuple(head)))
        actions.append((name, tuple(Var(p) for p in pnames), tuple(out_effects), copy_all))

    rules = []
    for cond_raw, name_tok, args, loc in raw.rules:
        cond = r.node(cond_raw, set())
        arg_names = [a.value for a in args]
        if name_tok.value not in names_seen:
            issues.append(Issue("unknown symbol", f"rule refers to unknown action {name_tok.value}", name_tok.loc))
        elif len(arg_names) != len(names_seen[name_tok.value]):
            issues.append(
                Issue(
                    "arity",
                    f"action {name_tok.value} takes {len(names_seen[name_tok.value])} parameters, "
                    f"rule passes {len(arg_names)}",
                    name_tok.loc,
                )
            )
        if len(set(arg_names)) != len(arg_names):
            issues.append(Issue("free-variable mismatch", "rule passes a variable twice", name_tok.loc))
        fv = {v.name for v in free_vars(cond)}
        if fv != set(arg_names):
            issues.append(
                Issue(
                    "free-variable mismatch",
                    f"condition free variables {{{', '.join(sorted(fv))}}} differ from "
                    f"action arguments {{{', '.join(sorted(arg_names))}}}",
                    loc,
                )
            )
        rules.append(ProcessRule(cond, name_tok.value, tuple(Var(a) for a in arg_names)))

    # resolve plain inclusions between names now that all uses are known
    known = {p: {a for a, _ in uses} for p, uses in r.arity_uses.items()}
    tbox = set()
    for stmt in raw.tbox:
        kind = stmt[0]
        if kind == "funct":
            tbox.add(Functional(_role(stmt[1])))
        elif kind == "ri":
            _, lhs, rhs, neg, loc = stmt
            tbox.add(RoleInclusion(_role(lhs), Neg(_role(rhs)) if neg else _role(rhs)))
        else:
            _, lhs, rhs, neg, loc = stmt
            if stmt in pending and (2 in known.get(lhs[1], ()) or 2 in known.get(rhs[1], ())):
                for b in (lhs, rhs):
                    r.note_pred(b[1], 2, b[2])
                lr, rr = ("role", lhs[1], False, lhs[2]), ("role", rhs[1], False, rhs[2])
                tbox.add(RoleInclusion(_role(lr), Neg(_role(rr)) if neg else _role(rr)))
                continue
            if stmt in pending:
                for b in (lhs, rhs):
                    r.note_pred(b[1], 1, b[2])
            lb, rb = _basic(lhs), _basic(rhs)
            tbox.add(ConceptInclusion(lb, Neg(rb) if neg else rb))
    tb = TBox(frozenset(tbox))
    funct_locs = [s[2] for s in raw.tbox if s[0] == "funct"]
    for msg in tbox_issues(tb):
        issues.append(Issue("functionality specialization", msg, funct_locs[0] if funct_locs else Location(1, 1)))

    for pred, uses in r.arity_uses.items():
        first = uses[0][0]
        for arity, loc in uses[1:]:
            if arity != first:
                r.issue("arity", f"{pred} used with arity {arity}, elsewhere {first}", loc)
                break
        if pred == DUMMY and not allow_reserved:
            r.issue("reserved", f"{DUMMY} is a reserved concept name", uses[0][1])

    issues.extend(r.issues)
    if issues:
        issues.sort(key=lambda i: (i.location.line, i.location.column))
        raise ValidationError(issues)

    abox0 = frozenset(abox)
    arities = {p: uses[0][0] for p, uses in r.arity_uses.items()}
    explicit = [ActionDef(n, ps, es, ca) for n, ps, es, ca in actions]
    alph = spec_alphabet(tb, abox0, explicit, rules)
    copies = copy_effects_for(alph, arities)
    final_actions = tuple(
        ActionDef(a.name, a.params, a.effects, a.copy_all, copies if a.copy_all else ()) for a in explicit
    )
    return KabSpec(
        tbox=tb,
        abox0=abox0,
        actions=final_actions,
        process=tuple(rules),
        functions=tuple(sorted(functions.items())),
        constants=frozenset(declared),
    )


def _role(r) -> Role:
    _, name, inverse, _ = r
    return Role(name, inverse)


def _basic(b):
    if b[0] == "exists":
        return SomeRole(_role(b[1]))
    return Concept(b[1])


def _head(r: _Resolver, h, allowed: set):
    def term(t: RTerm):
        if t.args is None:
            if not t.is_num and t.name in allowed:
                return Var(t.name)
            if r.is_constant(t):
                return const(t.name)
            r.issue("free-variable mismatch", f"head term {t.name} is neither a bound variable nor a constant", t.loc)
            return Var(t.name)
        args = tuple(term(a) for a in t.args)
        r.check_function(t)
        if all(isinstance(a, Term) for a in args):
            return func(t.name, *args)
        return FTerm(t.name, args)

    if isinstance(h, REq):
        return Eq(term(h.left), term(h.right))
    r.note_pred(h.pred, len(h.args), h.loc)
    return Atom(h.pred, tuple(term(a) for a in h.args))
