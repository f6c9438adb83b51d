"""Temporal formula nodes. ECQ leaves and the boolean/quantifier nodes are
shared with :mod:`kabcheck.model`; only the modal and fixpoint nodes live
here, together with the constructors for the derived operators."""
from __future__ import annotations

from dataclasses import dataclass

from .model import TRUE, And, Exists, Not, Var


@dataclass(frozen=True)
class Diamond:
    """``<-> body``: some successor satisfies body."""

    body: object


@dataclass(frozen=True)
class PredVar:
    name: str


@dataclass(frozen=True)
class Mu:
    var: str
    body: object


FALSE = Not(TRUE)


def lor(a, b):
    return Not(And((Not(a), Not(b))))


def implies(a, b):
    return Not(And((a, Not(b))))


def forall(var: Var, body):
    return Not(Exists(var, Not(body)))


def box(body):
    return Not(Diamond(Not(body)))


def replace_predvar(phi, name: str, repl):
    """phi[Z/repl], stopping at fixpoints that rebind Z."""
    if isinstance(phi, PredVar):
        return repl if phi.name == name else phi
    if isinstance(phi, Mu):
        if phi.var == name:
            return phi
        return Mu(phi.var, replace_predvar(phi.body, name, repl))
    if isinstance(phi, Not):
        return Not(replace_predvar(phi.body, name, repl))
    if isinstance(phi, And):
        return And(tuple(replace_predvar(p, name, repl) for p in phi.parts))
    if isinstance(phi, Exists):
        return Exists(phi.var, replace_predvar(phi.body, name, repl))
    if isinstance(phi, Diamond):
        return Diamond(replace_predvar(phi.body, name, repl))
    return phi


def nu(name: str, body):
    """``nu Z. body`` as ``!mu Z. !body[Z/!Z]``."""
    return Not(Mu(name, Not(replace_predvar(body, name, Not(PredVar(name))))))
