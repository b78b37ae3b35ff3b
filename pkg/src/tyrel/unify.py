"""Triangular substitutions, walking, occurs check and tag-checked unification."""

from __future__ import annotations

from typing import Iterable, Optional

from pyrsistent import PMap, pmap

from .term import NIL, Atom, Ctor, Term, Var, is_list_tag, tag_of

Substitution = PMap
EMPTY_SUBST: Substitution = pmap()


class CyclicTerm(Exception):
    """Deep resolution reached a term that contains itself."""


class LogicTypeError(Exception):
    """Two terms with different known type tags met during unification.

    This is a program bug rather than a search failure.  ``trace_path`` and
    ``trace`` are filled in by the engine when tracing is on.
    """

    def __init__(self, left: Term, right: Term):
        self.left, self.right = left, right
        self.trace_path: list[str] = []
        self.trace = None
        super().__init__(f"cannot unify {tag_of(left) or 'nil'} with {tag_of(right) or 'nil'}")


def walk(t: Term, s: Substitution) -> Term:
    if not isinstance(t, Var):
        return t
    seen = None
    while True:
        b = s.get(t.id)
        if b is None or not isinstance(b, Var):
            return t if b is None else b
        # var-to-var chains can only loop if someone built the map by hand
        if seen is None:
            seen = {t.id}
        elif b.id in seen:
            return b
        seen.add(b.id)
        t = b


def deep_walk(t: Term, s: Substitution) -> Term:
    active: set[int] = set()

    def go(t):
        if isinstance(t, Var):
            b = s.get(t.id)
            if b is None:
                return t
            if t.id in active:
                raise CyclicTerm(f"variable _{t.id} occurs in its own binding")
            active.add(t.id)
            try:
                return go(b)
            finally:
                active.discard(t.id)
        if isinstance(t, Ctor) and t.args:
            return Ctor(t.name, t.tag, tuple(go(a) for a in t.args))
        return t

    return go(t)


def occurs(v: int, t: Term, s: Substitution) -> bool:
    stack = [t]
    while stack:
        t = walk(stack.pop(), s)
        if isinstance(t, Var):
            if t.id == v:
                return True
        elif isinstance(t, Ctor):
            stack.extend(t.args)
    return False


def check_tags(a: Term, b: Term) -> None:
    """Raise LogicTypeError if ``a`` and ``b`` can never have the same type."""
    ta, tb = tag_of(a), tag_of(b)
    if a is NIL or a == NIL:
        ok = tb is None or is_list_tag(tb)
    elif b == NIL:
        ok = ta is None or is_list_tag(ta)
    else:
        ok = ta is None or tb is None or ta == tb
    if not ok:
        raise LogicTypeError(a, b)


def unify_pairs(pairs: Iterable[tuple[Term, Term]], s: Substitution, occurs_check: bool = True):
    """Unify several pairs simultaneously.

    Returns ``(s', extension, None)`` on success or ``(None, None, reason)``
    on failure.  The extension lists new bindings in the order they were made.
    """
    stack = list(pairs)
    stack.reverse()
    ext: list[tuple[Var, Term]] = []
    # only needed without the occurs check, where cyclic terms can meet
    seen = None if occurs_check else set()
    while stack:
        a, b = stack.pop()
        a, b = walk(a, s), walk(b, s)
        if a is b:
            continue
        check_tags(a, b)
        if isinstance(a, Var):
            if isinstance(b, Var) and a.id == b.id:
                continue
            if occurs_check and occurs(a.id, b, s):
                return None, None, f"occurs check: {a!r} in {b!r}"
            s = s.set(a.id, b)
            ext.append((a, b))
        elif isinstance(b, Var):
            if occurs_check and occurs(b.id, a, s):
                return None, None, f"occurs check: {b!r} in {a!r}"
            s = s.set(b.id, a)
            ext.append((b, a))
        elif isinstance(a, Atom) or isinstance(b, Atom):
            if a != b:
                return None, None, "mismatch"
        elif a.name != b.name or len(a.args) != len(b.args):
            return None, None, "constructor mismatch"
        else:
            if seen is not None:
                key = (id(a), id(b))
                if key in seen:
                    continue
                seen.add(key)
            stack.extend(reversed(list(zip(a.args, b.args))))
    return s, tuple(ext), None


def unify(a: Term, b: Term, s: Substitution, occurs_check: bool = True) -> Optional[tuple[Substitution, tuple]]:
    """Unify ``a`` and ``b`` under ``s``.

    Returns ``(s', extension)`` or ``None`` on failure; raises
    ``LogicTypeError`` when the tags clash.
    """
    s2, ext, _ = unify_pairs([(a, b)], s, occurs_check)
    if s2 is None:
        return None
    return s2, ext
