"""Concrete-syntax printing of specs and formulas; JSON and DOT export of
transition systems."""
from __future__ import annotations

import json

from .formula import Diamond, Mu, PredVar
from .model import (
    TRUE,
    And,
    Concept,
    Eq,
    EqAtom,
    Exists,
    Functional,
    Neg,
    Not,
    RoleInclusion,
    UcqAtom,
    Var,
    sorted_assertions,
)
from .spec import KabSpec

# ----------------------------------------------------------- formulas


def format_atom(at) -> str:
    if isinstance(at, Eq):
        return f"{at.left} = {at.right}"
    return f"{at.pred}({', '.join(str(a) for a in at.args)})"


def format_ucq(q) -> str:
    parts = []
    for cq in q.cqs:
        head = {a for a in cq.head if isinstance(a, Var)}
        ex = sorted({a for at in cq.body for a in at.args if isinstance(a, Var)} - head)
        body = " & ".join(format_atom(at) for at in cq.body)
        prefix = f"EX {', '.join(v.name for v in ex)}. " if ex else ""
        parts.append(prefix + body)
    return " | ".join(parts)


def format_formula(phi) -> str:
    """Print an ECQ or temporal formula so that parsing it back yields the
    same tree."""
    if isinstance(phi, And):
        if not phi.parts:
            return "true"
        return " & ".join(_atomic(p) for p in phi.parts)
    if isinstance(phi, Exists):
        return f"EX {phi.var.name}. {format_formula(phi.body)}"
    if isinstance(phi, Mu):
        return f"mu {phi.var}. {format_formula(phi.body)}"
    return _atomic(phi)


def _atomic(phi) -> str:
    if isinstance(phi, UcqAtom):
        return f"[{format_ucq(phi.ucq)}]"
    if isinstance(phi, EqAtom):
        return f"[{phi.left} = {phi.right}]"
    if isinstance(phi, Not):
        return "!" + _atomic(phi.body)
    if isinstance(phi, Diamond):
        return "<->" + _atomic(phi.body)
    if isinstance(phi, PredVar):
        return phi.name
    if isinstance(phi, And) and not phi.parts:
        return "true"
    return f"({format_formula(phi)})"


# ----------------------------------------------------------- KAB specs


def _basic(b) -> str:
    if isinstance(b, Concept):
        return b.name
    return f"EXISTS {b.role}"


def _rhs(rhs, fmt) -> str:
    if isinstance(rhs, Neg):
        return f"NOT {fmt(rhs.inner)}"
    return fmt(rhs)


def format_tbox_assertion(a) -> str:
    if isinstance(a, Functional):
        return f"FUNCT {a.role}"
    if isinstance(a, RoleInclusion):
        return f"ROLE {a.lhs} ISA {_rhs(a.rhs, str)}"
    return f"{_basic(a.lhs)} ISA {_rhs(a.rhs, _basic)}"


def format_effect(e) -> str:
    text = f"[{format_ucq(e.q_plus)}]"
    if e.q_minus != TRUE:
        text += f" & {format_formula(e.q_minus)}"
    heads = ", ".join(format_atom(h) for h in e.head)
    return f"{text} -> {{{heads}}}"


def serialize_kab(spec: KabSpec) -> str:
    lines: list[str] = []
    if spec.functions:
        lines.append("FUNCTIONS {")
        lines += [f"  {n}/{a};" for n, a in spec.functions]
        lines.append("}")
    if spec.constants:
        lines.append("CONSTANTS {")
        lines += [f"  {c};" for c in sorted(spec.constants)]
        lines.append("}")
    lines.append("TBOX {")
    lines += sorted(f"  {format_tbox_assertion(a)};" for a in spec.tbox)
    lines.append("}")
    lines.append("ABOX {")
    lines += [f"  {format_atom(a)};" for a in sorted_assertions(spec.abox0)]
    lines.append("}")
    for act in spec.actions:
        params = ", ".join(p.name for p in act.params)
        lines.append(f"ACTION {act.name}({params}) {{")
        lines += [f"  {format_effect(e)};" for e in act.effects]
        if act.copy_all:
            lines.append("  COPYALL;")
        lines.append("}")
    lines.append("PROCESS {")
    for r in spec.process:
        args = ", ".join(a.name for a in r.args)
        lines.append(f"  {format_formula(r.condition)} -> {r.action}({args});")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------ transition systems


def state_assertions(abox) -> list[str]:
    return [format_atom(a) for a in sorted_assertions(abox)]


def label_text(label) -> str:
    _, action, theta = label
    return f"{action}({', '.join(str(t) for _, t in theta)})"


def ts_to_json(ts, extra: dict | None = None) -> dict:
    states = [
        {"id": i, "assertions": state_assertions(s)} for i, s in enumerate(ts.states)
    ]
    edges = [
        {
            "from": src,
            "to": dst,
            "rule": label[0],
            "action": label[1],
            "theta": {v.name: str(t) for v, t in label[2]},
        }
        for src, label, dst in ts.edges
    ]
    out = {"initial": ts.initial, "states": states, "edges": edges}
    if extra:
        out.update(extra)
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def ts_to_dot(ts) -> str:
    lines = ["digraph transition_system {", "  node [shape=box, fontname=monospace];"]
    for i, s in enumerate(ts.states):
        text = "\\l".join(a.replace('"', '\\"') for a in state_assertions(s))
        style = ", penwidth=2" if i == ts.initial else ""
        lines.append(f'  s{i} [label="s{i}\\n{text}\\l"{style}];')
    for src, label, dst in ts.edges:
        lines.append(f'  s{src} -> s{dst} [label="{label_text(label)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def dependency_graph_to_dot(graph) -> str:
    lines = ["digraph dependencies {"]
    for node in sorted(graph.nodes):
        lines.append(f'  "{node}";')
    for edge in sorted(graph.edges):
        style = ' [style=bold, label="*"]' if edge.special else ""
        lines.append(f'  "{edge.src}" -> "{edge.dst}"{style};')
    lines.append("}")
    return "\n".join(lines) + "\n"
