"""Disequality constraint store.

A constraint is the extension that unifying its two sides would need: it is
violated only once every (variable, term) alternative in it holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .term import Term, Var, vars_of
from .unify import Substitution, deep_walk, unify_pairs


@dataclass(frozen=True, slots=True)
class Diseq:
    alternatives: tuple[tuple[Var, Term], ...]

    def __post_init__(self):
        if not self.alternatives:
            raise ValueError("a disequality needs at least one alternative")


Store = tuple  # tuple[Diseq, ...]


def _normalize(pairs, s: Substitution, occurs_check: bool):
    """None: can never be equal.  (): already equal.  Otherwise the extension."""
    s2, ext, _ = unify_pairs(pairs, s, occurs_check)
    if s2 is None:
        return None
    return ext


def add_diseq(a: Term, b: Term, s: Substitution, store: Store, occurs_check: bool = True) -> Optional[Store]:
    """Return the extended store, or ``None`` if ``a`` and ``b`` are already equal."""
    ext = _normalize([(a, b)], s, occurs_check)
    if ext is None:
        return store
    if not ext:
        return None
    return store + (Diseq(ext),)


def revalidate_why(store: Store, s: Substitution, occurs_check: bool = True):
    """Like ``revalidate`` but also returns the violated constraint on failure."""
    out = []
    for c in store:
        ext = _normalize(c.alternatives, s, occurs_check)
        if ext is None:
            continue
        if not ext:
            return None, c
        out.append(c if ext == c.alternatives else Diseq(ext))
    return tuple(out), None


def revalidate(store: Store, s: Substitution, occurs_check: bool = True) -> Optional[Store]:
    return revalidate_why(store, s, occurs_check)[0]


def residual_constraints(store: Store, s: Substitution, relevant: set[int]) -> list[tuple[tuple, tuple]]:
    """Deep-walked constraints that mention a variable in ``relevant``.

    Each entry is ``(lhs, rhs)``, two equally long tuples of terms that must
    not become equal simultaneously.
    """
    out = []
    for c in store:
        lhs = tuple(deep_walk(v, s) for v, _ in c.alternatives)
        rhs = tuple(deep_walk(t, s) for _, t in c.alternatives)
        mentioned = set()
        for t in lhs + rhs:
            mentioned |= vars_of(t)
        if mentioned & relevant:
            out.append((lhs, rhs))
    return out
