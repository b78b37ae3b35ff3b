"""Structural type descriptors and the value <-> term mapping.

Host values are ``int``, ``bool``, ``str``, ``Sym``, Python lists (for
``List X`` types) and ``Data`` records for user sum-of-products types.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Optional

from .term import (BUILTIN_TAGS, NIL, NIL_KIND, SYM, Atom, Ctor, Sym, Term, Var, atom, list_elem, list_tag,
                   normalize_tag)
from .unify import Substitution, deep_walk


class DuplicateTag(Exception):
    pass


class UnknownFieldTag(Exception):
    pass


class NonConformant(Exception):
    pass


class UnknownCtor(Exception):
    pass


@dataclass(frozen=True)
class TypeDesc:
    tag: str
    ctors: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        object.__setattr__(self, "tag", normalize_tag(self.tag))
        ctors = tuple((name, tuple(normalize_tag(f) for f in fields)) for name, fields in self.ctors)
        object.__setattr__(self, "ctors", ctors)
        names = [name for name, _ in ctors]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate constructor in {self.tag}")

    def fields(self, ctor: str) -> Optional[tuple[str, ...]]:
        for name, fields in self.ctors:
            if name == ctor:
                return fields
        return None


def list_desc(elem: str) -> TypeDesc:
    tag = list_tag(elem)
    return TypeDesc(tag, (("cons", (elem, tag)),))


@dataclass(frozen=True)
class Data:
    """A ground value of a user type: ``Data("Peano", "s", (Data("Peano", "z"),))``."""

    tag: str
    ctor: str
    fields: tuple = ()


@dataclass(frozen=True)
class Partial:
    """Projection of a term that still contains unbound variables."""

    residual: Term


class TypeRegistry:
    """Immutable mapping from tags to descriptors.

    ``List X`` is available for every known ``X`` without registration; its
    only constructor is ``cons`` (the empty list is the nil atom).
    """

    def __init__(self, types: Mapping[str, TypeDesc] | None = None):
        self._types = dict(types or {})

    def register(self, d: TypeDesc) -> "TypeRegistry":
        if d.tag in self._types or d.tag in BUILTIN_TAGS:
            raise DuplicateTag(d.tag)
        return TypeRegistry({**self._types, d.tag: d})

    def finalize(self) -> "TypeRegistry":
        for d in self._types.values():
            for _, fields in d.ctors:
                for f in fields:
                    if not self.knows(f):
                        raise UnknownFieldTag(f"{d.tag}: unknown field type {f}")
        return self

    def __contains__(self, tag: str) -> bool:
        return tag in self._types

    def __iter__(self):
        return iter(self._types.values())

    def knows(self, tag: Optional[str]) -> bool:
        if tag is None:
            return False
        if tag in BUILTIN_TAGS or tag in self._types:
            return True
        return self.knows(list_elem(tag))

    def desc(self, tag: Optional[str]) -> Optional[TypeDesc]:
        if tag is None:
            return None
        d = self._types.get(tag)
        if d is None:
            elem = list_elem(tag)
            if elem is not None and self.knows(elem):
                d = list_desc(elem)
        return d

    def fields(self, tag: Optional[str], ctor: str) -> Optional[tuple[str, ...]]:
        d = self.desc(tag)
        return None if d is None else d.fields(ctor)

    def arity(self, tag: Optional[str], ctor: str) -> Optional[int]:
        f = self.fields(tag, ctor)
        return None if f is None else len(f)

    def tags_with_ctor(self, ctor: str) -> list[str]:
        return [d.tag for d in self._types.values() if d.fields(ctor) is not None]


def register_type(r: TypeRegistry, d: TypeDesc) -> TypeRegistry:
    return r.register(d)


def value_tag(v) -> Optional[str]:
    if isinstance(v, bool):
        return "Bool"
    if isinstance(v, int):
        return "Int"
    if isinstance(v, str):
        return "String"
    if isinstance(v, Sym):
        return "Sym"
    if isinstance(v, Data):
        return normalize_tag(v.tag)
    if isinstance(v, (list, tuple)):
        for item in v:
            t = value_tag(item)
            if t is not None:
                return list_tag(t)
        return None
    raise NonConformant(f"not a value: {v!r}")


def inject(v, r: TypeRegistry, tag: Optional[str] = None) -> Term:
    """Encode a host value as a term, checking it against ``r``."""
    if tag is None:
        tag = value_tag(v)
    if isinstance(v, (list, tuple)):
        if not v:
            return NIL
        elem = list_elem(tag)
        if elem is None:
            raise NonConformant(f"list value where {tag} expected")
        out: Term = NIL
        for item in reversed(v):
            out = Ctor("cons", tag, (inject(item, r, elem), out))
        return out
    if isinstance(v, Data):
        vt = normalize_tag(v.tag)
        if vt != tag:
            raise NonConformant(f"{vt} value where {tag} expected")
        fields = r.fields(vt, v.ctor)
        if fields is None:
            raise NonConformant(f"{v.ctor} is not a constructor of {vt}")
        if len(fields) != len(v.fields):
            raise NonConformant(f"{v.ctor} takes {len(fields)} fields, got {len(v.fields)}")
        return Ctor(v.ctor, vt, tuple(inject(x, r, ft) for x, ft in zip(v.fields, fields)))
    if value_tag(v) != tag:
        raise NonConformant(f"{v!r} is not a {tag}")
    return atom(v)


def _decode(t: Term, r: TypeRegistry):
    if isinstance(t, Atom):
        if t.kind == NIL_KIND:
            return []
        if t.kind == SYM:
            return Sym(t.value)
        return t.value
    if t.name == "cons" and len(t.args) == 2 and (t.tag is None or list_elem(t.tag) is not None):
        items = []
        while isinstance(t, Ctor):
            items.append(_decode(t.args[0], r))
            t = t.args[1]
        return items
    if r.fields(t.tag, t.name) is None:
        raise UnknownCtor(f"{t.name} is not a constructor of {t.tag}")
    return Data(t.tag, t.name, tuple(_decode(a, r) for a in t.args))


def _has_var(t: Term) -> bool:
    if isinstance(t, Var):
        return True
    return isinstance(t, Ctor) and any(_has_var(a) for a in t.args)


def project(t: Term, s: Substitution, r: TypeRegistry):
    """Decode ``t`` under ``s`` into a host value, or ``Partial`` if not ground."""
    t = deep_walk(t, s)
    if _has_var(t):
        return Partial(t)
    return _decode(t, r)


def skeleton(tag: str, ctor: str, st, r: TypeRegistry):
    """``ctor`` applied to one fresh variable per field; returns ``(term, state)``."""
    tag = normalize_tag(tag)
    fields = r.fields(tag, ctor)
    if fields is None:
        raise UnknownCtor(f"{ctor} is not a constructor of {tag}")
    n = st.next_var
    args = tuple(Var(n + i, f) for i, f in enumerate(fields))
    return Ctor(ctor, tag, args), replace(st, next_var=n + len(args))
