"""Standard relations over lists and Peano numerals."""

from __future__ import annotations

from typing import Iterable, Optional

from .generics import TypeDesc, TypeRegistry, inject
from .search import Goal, conj, delay, disj, eq, fresh, relation
from .term import NIL, Ctor, Term, is_list_tag, list_elem, list_tag, tag_of

PEANO = TypeDesc("Peano", (("z", ()), ("s", ("Peano",))))
Z = Ctor("z", "Peano", ())

# ready-made list instantiations; others are synthesized on demand
LIST_ELEMENTS = ("Int", "Bool", "String", "Sym", "Peano")


def default_registry() -> TypeRegistry:
    return TypeRegistry().register(PEANO).finalize()


_REGISTRY = default_registry()


def s(n: Term) -> Ctor:
    return Ctor("s", "Peano", (n,))


def peano(n: int) -> Term:
    out: Term = Z
    for _ in range(n):
        out = s(out)
    return out


def lst(items: Iterable, tag: Optional[str] = None) -> Term:
    """A ground list term; the tag is inferred from the first element if omitted."""
    return inject(list(items), _REGISTRY, tag)


def _list_tags(lists: Iterable[Term], elems: Iterable[Term] = ()) -> tuple[Optional[str], Optional[str]]:
    """(list tag, element tag) from whichever argument carries a tag."""
    for t in lists:
        tag = tag_of(t)
        if is_list_tag(tag):
            return tag, list_elem(tag)
    for t in elems:
        tag = tag_of(t)
        if tag is not None:
            return list_tag(tag), tag
    return None, None


def _cons(h: Term, t: Term, tag: Optional[str]) -> Ctor:
    return Ctor("cons", tag, (h, t))


@relation
def conso(h, t, l) -> Goal:
    lt, _ = _list_tags((l, t), (h,))
    return eq(l, _cons(h, t, lt))


@relation
def nullo(l) -> Goal:
    return eq(l, NIL)


@relation
def appendo(a, b, ab) -> Goal:
    lt, et = _list_tags((a, b, ab))
    return disj(
        conj(eq(a, NIL), eq(b, ab)),
        fresh((et, lt, lt), lambda h, t, res: conj(
            eq(a, _cons(h, t, lt)),
            eq(ab, _cons(h, res, lt)),
            delay(lambda: appendo(t, b, res), "appendo"),
        )),
    )


@relation
def membero(x, l) -> Goal:
    lt, et = _list_tags((l,), (x,))
    return fresh((et, lt), lambda h, t: conj(
        eq(l, _cons(h, t, lt)),
        disj(eq(x, h), delay(lambda: membero(x, t), "membero")),
    ))


@relation
def pluso(a, b, c) -> Goal:
    return disj(
        conj(eq(a, Z), eq(b, c)),
        fresh(("Peano", "Peano"), lambda a1, c1: conj(
            eq(a, s(a1)),
            eq(c, s(c1)),
            delay(lambda: pluso(a1, b, c1), "pluso"),
        )),
    )


@relation
def lengtho(l, n) -> Goal:
    lt, et = _list_tags((l,))
    return disj(
        conj(eq(l, NIL), eq(n, Z)),
        fresh((et, lt, "Peano"), lambda h, t, n1: conj(
            eq(l, _cons(h, t, lt)),
            eq(n, s(n1)),
            delay(lambda: lengtho(t, n1), "lengtho"),
        )),
    )


# name -> (relation, parameter tag patterns); lowercase names are type variables
SIGNATURES = {
    "conso": (conso, ("a", "List a", "List a")),
    "nullo": (nullo, ("List a",)),
    "appendo": (appendo, ("List a", "List a", "List a")),
    "membero": (membero, ("a", "List a")),
    "pluso": (pluso, ("Peano", "Peano", "Peano")),
    "lengtho": (lengtho, ("List a", "Peano")),
}
