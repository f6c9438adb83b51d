"""Command-line front end: parse, check-acyclic, bound, build, verify and
tm-encode."""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .acyclicity import build_dependency_graph, chase_dominant, is_weakly_acyclic, positive_dominant
from .errors import (
    BudgetExceeded,
    InconsistentInitialState,
    InconsistentKB,
    ParseError,
    ValidationError,
)
from .mu import check
from .normalize import normalize
from .parser import parse_formulas, parse_kab
from .serialize import (
    dependency_graph_to_dot,
    dumps,
    label_text,
    serialize_kab,
    ts_to_dot,
    ts_to_json,
)
from .transition import MODES, build, default_max_states
from .turing import tm_encode

EXIT_OK = 0
EXIT_NOT_ACYCLIC = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_INCONSISTENT = 4

DEFAULT_CHASE_STEPS = 1000


@dataclass(frozen=True)
class RunConfig:
    command: str
    spec: str | None = None
    formulas: str | None = None
    formula: str | None = None
    mode: str = "direct"
    max_states: int | None = None
    max_steps: int | None = None
    fmt: str = "text"
    emit: str | None = None
    emit_normalized: str | None = None
    output: str | None = None
    timing: bool = False


class _Exit(Exception):
    def __init__(self, code: int, text: str = "") -> None:
        super().__init__(text)
        self.code = code
        self.text = text


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kabcheck", description="Verify knowledge and action bases.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats=("text", "json")):
        sp.add_argument("spec", help="KAB specification file")
        sp.add_argument("--format", dest="fmt", choices=formats, default="text")

    sp = sub.add_parser("parse", help="parse and validate a specification")
    common(sp)
    sp.add_argument("--emit-normalized", metavar="FILE", help="write the normalized spec ('-' for stdout)")

    sp = sub.add_parser("check-acyclic", help="decide weak acyclicity")
    common(sp)
    sp.add_argument("--emit", metavar="FILE", help="write the dependency graph as DOT")

    sp = sub.add_parser("bound", help="active-domain bound from the positive-dominant chase")
    common(sp)
    sp.add_argument("--max-steps", type=_positive, help="chase step budget")

    for name in ("build", "verify"):
        sp = sub.add_parser(name, help="build the transition system" if name == "build" else "model check formulas")
        common(sp)
        if name == "verify":
            sp.add_argument("formulas", nargs="?", help=".mu file with named formulas")
            sp.add_argument("--formula", help="a single formula given inline")
        sp.add_argument("--mode", choices=MODES, default="direct")
        sp.add_argument("--max-states", type=_positive, help="state budget (required if not weakly acyclic)")
        sp.add_argument("--emit", metavar="FILE", help="write the transition system (.dot or .json)")
        sp.add_argument("--emit-normalized", metavar="FILE", help="write the normalized spec")
        sp.add_argument("--timing", action="store_true", help="report wall-clock time")

    sp = sub.add_parser("tm-encode", help="encode a Turing machine (JSON) as a KAB")
    sp.add_argument("spec", metavar="machine", help="machine description (JSON)")
    sp.add_argument("-o", "--output", help="output file (default stdout)")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        spec=ns.spec,
        formulas=getattr(ns, "formulas", None),
        formula=getattr(ns, "formula", None),
        mode=getattr(ns, "mode", "direct"),
        max_states=getattr(ns, "max_states", None),
        max_steps=getattr(ns, "max_steps", None),
        fmt=getattr(ns, "fmt", "text"),
        emit=getattr(ns, "emit", None),
        emit_normalized=getattr(ns, "emit_normalized", None),
        output=getattr(ns, "output", None),
        timing=getattr(ns, "timing", False),
    )


# ------------------------------------------------------------------ helpers


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise _Exit(EXIT_INPUT, f"{path}: cannot read: {e.strerror}") from None


def _diagnostics(path: str, err) -> str:
    if isinstance(err, ValidationError):
        return "\n".join(f"{path}:{i}" for i in err.issues)
    return f"{path}:{err}"


def load_spec(path: str):
    try:
        return parse_kab(_read(path))
    except (ParseError, ValidationError) as e:
        raise _Exit(EXIT_INPUT, _diagnostics(path, e)) from None


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _emit_normalized(cfg: RunConfig, spec) -> None:
    if cfg.emit_normalized:
        _write(cfg.emit_normalized, serialize_kab(normalize(spec).spec))


def _chase_bound(spec, steps: int) -> int:
    return chase_dominant(positive_dominant(normalize(spec)), steps).adom_size


# ----------------------------------------------------------------- commands


def cmd_parse(cfg: RunConfig) -> tuple[int, dict]:
    spec = load_spec(cfg.spec)
    _emit_normalized(cfg, spec)
    report = {
        "actions": [a.name for a in spec.actions],
        "alphabet": sorted(spec.alphabet),
        "initial_assertions": len(spec.abox0),
        "rules": len(spec.process),
        "tbox_assertions": len(spec.tbox.assertions),
    }
    return EXIT_OK, report


def cmd_check_acyclic(cfg: RunConfig) -> tuple[int, dict]:
    spec = load_spec(cfg.spec)
    graph = build_dependency_graph(spec)
    res = is_weakly_acyclic(graph)
    if cfg.emit:
        _write(cfg.emit, dependency_graph_to_dot(graph))
    report = {
        "weakly_acyclic": res.weakly_acyclic,
        "nodes": len(graph.nodes),
        "edges": len(graph.edges),
        "special_edges": sum(1 for e in graph.edges if e.special),
        "cycle": [
            {
                "from": str(e.src),
                "to": str(e.dst),
                "kind": "special" if e.special else "normal",
                "action": e.provenance[0],
                "effect": e.provenance[1],
                "disjunct": e.provenance[2],
                "via": e.provenance[3],
            }
            for e in res.cycle
        ],
    }
    return (EXIT_OK if res.weakly_acyclic else EXIT_NOT_ACYCLIC), report


def cmd_bound(cfg: RunConfig) -> tuple[int, dict]:
    spec = load_spec(cfg.spec)
    wa = is_weakly_acyclic(build_dependency_graph(spec)).weakly_acyclic
    if not wa and cfg.max_steps is None:
        raise _Exit(
            EXIT_NOT_ACYCLIC,
            "the specification is not weakly acyclic, so the chase need not terminate; "
            "pass --max-steps to run it anyway",
        )
    dom = positive_dominant(normalize(spec))
    res = chase_dominant(dom, cfg.max_steps or DEFAULT_CHASE_STEPS)
    return EXIT_OK, {"weakly_acyclic": wa, "chase_steps": res.steps, "adom_bound": res.adom_size}


def _gate(cfg: RunConfig, spec) -> tuple[bool, int | None]:
    wa = is_weakly_acyclic(build_dependency_graph(spec)).weakly_acyclic
    if not wa and cfg.max_states is None:
        raise _Exit(
            EXIT_NOT_ACYCLIC,
            "the specification is not weakly acyclic (see `kabcheck check-acyclic`); "
            "verification may not terminate, pass --max-states to run a bounded exploration",
        )
    bound = _chase_bound(spec, DEFAULT_CHASE_STEPS) if wa else None
    return wa, bound


def _build(cfg: RunConfig, spec, bound: int | None = None):
    ts = build(spec, cfg.mode, cfg.max_states or default_max_states(), max_adom=bound)
    if cfg.emit:
        if cfg.emit.endswith(".json"):
            _write(cfg.emit, dumps(ts_to_json(ts)))
        else:
            _write(cfg.emit, ts_to_dot(ts))
    return ts


def cmd_build(cfg: RunConfig) -> tuple[int, dict]:
    spec = load_spec(cfg.spec)
    _emit_normalized(cfg, spec)
    wa, bound = _gate(cfg, spec)
    ts = _build(cfg, spec, bound)
    return EXIT_OK, {
        "mode": cfg.mode,
        "weakly_acyclic": wa,
        "chase_bound": bound,
        "states": len(ts.states),
        "edges": len(ts.edges),
        "adom_size": len(ts.adom()),
    }


def _load_formulas(cfg: RunConfig) -> list:
    items = []
    try:
        if cfg.formulas:
            items += parse_formulas(_read(cfg.formulas))
        if cfg.formula:
            items += [("formula", phi) for _, phi in parse_formulas(cfg.formula)]
    except (ParseError, ValidationError) as e:
        raise _Exit(EXIT_INPUT, _diagnostics(cfg.formulas or "<formula>", e)) from None
    if not items:
        raise _Exit(EXIT_INPUT, "no formula given: pass a .mu file or --formula")
    return items


def cmd_verify(cfg: RunConfig) -> tuple[int, dict]:
    spec = load_spec(cfg.spec)
    formulas = _load_formulas(cfg)
    _emit_normalized(cfg, spec)
    wa, bound = _gate(cfg, spec)
    ts = _build(cfg, spec, bound)
    results = []
    for name, phi in formulas:
        r = check(phi, ts)
        results.append(
            {
                "name": name,
                "verdict": r.verdict,
                "iterations": r.iterations,
                "witness": [
                    {"from": a, "to": b, "action": label_text(lab)} for a, lab, b in r.witness
                ],
            }
        )
    return EXIT_OK, {
        "mode": cfg.mode,
        "weakly_acyclic": wa,
        "chase_bound": bound,
        "states": len(ts.states),
        "edges": len(ts.edges),
        "adom_size": len(ts.adom()),
        "formulas": results,
    }


def cmd_tm_encode(cfg: RunConfig) -> tuple[int, dict]:
    try:
        machine = json.loads(_read(cfg.spec))
        spec = tm_encode(machine)
    except (ValueError, KeyError, TypeError) as e:
        raise _Exit(EXIT_INPUT, f"{cfg.spec}: invalid machine description: {e}") from None
    text = serialize_kab(spec)
    _write(cfg.output or "-", text)
    return EXIT_OK, {}


COMMANDS = {
    "parse": cmd_parse,
    "check-acyclic": cmd_check_acyclic,
    "bound": cmd_bound,
    "build": cmd_build,
    "verify": cmd_verify,
    "tm-encode": cmd_tm_encode,
}


# ------------------------------------------------------------------ output


def _text(cfg: RunConfig, report: dict) -> str:
    lines = []
    if cfg.command == "check-acyclic":
        lines.append("weakly acyclic" if report["weakly_acyclic"] else "not weakly acyclic")
        for e in report["cycle"]:
            lines.append(
                f"  {e['from']} -> {e['to']} [{e['kind']}] "
                f"(action {e['action']}, effect {e['effect']}, disjunct {e['disjunct']}, via {e['via']})"
            )
        return "\n".join(lines)
    if cfg.command == "verify":
        for f in report["formulas"]:
            lines.append(f"{f['name']}: {'true' if f['verdict'] else 'false'}")
            for w in f["witness"]:
                lines.append(f"  s{w['from']} --{w['action']}--> s{w['to']}")
        report = {k: v for k, v in report.items() if k != "formulas"}
    for k in sorted(report):
        v = report[k]
        lines.append(f"{k}: {', '.join(map(str, v)) if isinstance(v, list) else v}")
    return "\n".join(lines)


def run(cfg: RunConfig) -> int:
    start = time.perf_counter()
    try:
        code, report = COMMANDS[cfg.command](cfg)
    except _Exit as e:
        print(e.text, file=sys.stderr)
        return e.code
    except BudgetExceeded as e:
        if cfg.fmt == "json":
            sys.stdout.write(dumps({"error": "budget exceeded", "message": str(e), "weakly_acyclic": e.weakly_acyclic}))
        else:
            print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (InconsistentInitialState, InconsistentKB) as e:
        print(f"inconsistent initial state: {e}", file=sys.stderr)
        return EXIT_INCONSISTENT
    if cfg.command == "tm-encode":
        return code
    if cfg.timing:
        report["wall_time"] = round(time.perf_counter() - start, 6)
    if cfg.fmt == "json":
        sys.stdout.write(dumps(report))
    else:
        print(_text(cfg, report))
    return code


def main(argv: list[str] | None = None) -> int:
    ns = make_parser().parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
