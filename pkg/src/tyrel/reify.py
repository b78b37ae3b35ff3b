"""Reification of final states into canonical answers, and term printing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .constraints import residual_constraints
from .term import BOOL, INT, NIL_KIND, STR, SYM, Atom, Ctor, Var, vars_of
from .unify import deep_walk


@dataclass(frozen=True, slots=True)
class Reified:
    """A residual variable in an answer, printed ``_.N``."""

    index: int


@dataclass(frozen=True)
class Answer:
    bindings: tuple[tuple[str, object], ...]
    residuals: tuple[tuple[tuple, tuple], ...] = ()

    def __str__(self) -> str:
        return render(self)


def quote_string(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def show(t, var_name: Optional[Callable[[Var], str]] = None) -> str:
    """Print a term in surface syntax: lists as ``(1 2)``, ctors as ``(s z)``."""
    if isinstance(t, Atom):
        if t.kind == INT:
            return str(t.value)
        if t.kind == BOOL:
            return "#t" if t.value else "#f"
        if t.kind == STR:
            return quote_string(t.value)
        if t.kind == SYM:
            return t.value
        if t.kind == NIL_KIND:
            return "()"
    if isinstance(t, Reified):
        return f"_.{t.index}"
    if isinstance(t, Var):
        return var_name(t) if var_name else f"_{t.id}"
    if isinstance(t, Ctor):
        if t.name == "cons" and len(t.args) == 2:
            items = []
            while isinstance(t, Ctor) and t.name == "cons" and len(t.args) == 2:
                items.append(show(t.args[0], var_name))
                t = t.args[1]
            if t != Atom(NIL_KIND):
                items.append(".")
                items.append(show(t, var_name))
            return "(" + " ".join(items) + ")"
        if not t.args:
            return t.name
        return "(" + " ".join([t.name] + [show(a, var_name) for a in t.args]) + ")"
    raise TypeError(f"not a term: {t!r}")


def _show_side(terms: tuple) -> str:
    if len(terms) == 1:
        return show(terms[0])
    return "(" + " ".join(show(t) for t in terms) + ")"


def render(a: Answer) -> str:
    lines = [f"{name} = {show(t)}" for name, t in a.bindings] or ["true"]
    if a.residuals:
        lines[-1] += " where " + ", ".join(f"({_show_side(l)} =/= {_show_side(r)})" for l, r in a.residuals)
    return "\n".join(lines)


def reify(st, query_vars: Sequence[tuple[str, Var]]) -> Answer:
    """Deep-walk the query variables of ``st`` and canonicalize residual names."""
    s = st.subst
    walked = [(name, deep_walk(v, s)) for name, v in query_vars]
    names: dict[int, Reified] = {}

    def rename(t):
        if isinstance(t, Var):
            r = names.get(t.id)
            if r is None:
                r = names[t.id] = Reified(len(names))
            return r
        if isinstance(t, Ctor) and t.args:
            return Ctor(t.name, t.tag, tuple(rename(x) for x in t.args))
        return t

    bindings = tuple((name, rename(t)) for name, t in walked)
    relevant: set[int] = set()
    for _, t in walked:
        relevant |= vars_of(t)
    residuals = tuple(
        (tuple(rename(x) for x in lhs), tuple(rename(x) for x in rhs))
        for lhs, rhs in residual_constraints(st.store, s, relevant)
    )
    return Answer(bindings, residuals)
