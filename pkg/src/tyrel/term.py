"""Logic terms: atoms, constructor applications and type-tagged variables.

Terms are immutable and hashable.  Every variable and constructor carries a
type tag (a normalized string such as ``"Int"`` or ``"List Int"``); atoms get
their tag from their kind.  ``nil`` is an atom standing for the empty list of
any list type.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Union

BUILTIN_TAGS = ("Int", "Bool", "String", "Sym")

INT, BOOL, STR, SYM, NIL_KIND = "int", "bool", "str", "sym", "nil"

_KIND_TAGS = {INT: "Int", BOOL: "Bool", STR: "String", SYM: "Sym", NIL_KIND: None}


class ArityMismatch(Exception):
    pass


@dataclass(frozen=True, slots=True)
class Var:
    id: int
    tag: Optional[str] = None

    def __repr__(self) -> str:
        return f"_{self.id}" if self.tag is None else f"_{self.id}:{self.tag}"


@dataclass(frozen=True, slots=True)
class Atom:
    kind: str
    value: object = None

    def __repr__(self) -> str:
        if self.kind == NIL_KIND:
            return "nil"
        if self.kind == SYM:
            return f"'{self.value}"
        return repr(self.value)


@dataclass(frozen=True, slots=True)
class Ctor:
    name: str
    tag: Optional[str]
    args: tuple = ()

    def __repr__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(map(repr, self.args))})"


Term = Union[Var, Atom, Ctor]

NIL = Atom(NIL_KIND)
TRUE = Atom(BOOL, True)
FALSE = Atom(BOOL, False)


def atom(value) -> Atom:
    """Wrap a host value as an atom; ``None`` is nil, ``Sym`` is a symbol."""
    if value is None:
        return NIL
    if isinstance(value, bool):
        return Atom(BOOL, value)
    if isinstance(value, int):
        return Atom(INT, value)
    if isinstance(value, Sym):
        return Atom(SYM, value.name)
    if isinstance(value, str):
        return Atom(STR, value)
    raise TypeError(f"no atom kind for {type(value).__name__}")


def sym(name: str) -> Atom:
    return Atom(SYM, name)


@dataclass(frozen=True, slots=True)
class Sym:
    """Host-side symbol value, distinct from ``str``."""

    name: str

    def __repr__(self) -> str:
        return f"'{self.name}"


def as_term(x) -> Term:
    if isinstance(x, (Var, Atom, Ctor)):
        return x
    return atom(x)


def make_ctor(name: str, tag: Optional[str], args: Iterable = (), registry=None) -> Ctor:
    """Build a constructor term.

    When ``registry`` is given the arity of ``(tag, name)`` is checked against
    it; embedded callers may skip the check by passing ``None``.
    """
    args = tuple(as_term(a) for a in args)
    if tag is not None:
        tag = normalize_tag(tag)
    if registry is not None:
        expected = registry.arity(tag, name)
        if expected is not None and expected != len(args):
            raise ArityMismatch(f"{name} of {tag} takes {expected} arguments, got {len(args)}")
    return Ctor(name, tag, args)


def cons(head, tail, tag: Optional[str] = None) -> Ctor:
    head, tail = as_term(head), as_term(tail)
    if tag is None:
        tag = tag_of(tail)
        if tag is None:
            elem = tag_of(head)
            tag = list_tag(elem) if elem is not None else None
    return Ctor("cons", tag, (head, tail))


def from_list(items, tag: Optional[str] = None, tail: Term = NIL) -> Term:
    """Build a proper (or, with ``tail``, improper) list term."""
    out = tail
    for item in reversed(list(items)):
        out = cons(item, out, tag)
    return out


def tag_of(t: Term) -> Optional[str]:
    if isinstance(t, Atom):
        return _KIND_TAGS[t.kind]
    return t.tag


def vars_of(t: Term) -> set[int]:
    out: set[int] = set()
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            out.add(t.id)
        elif isinstance(t, Ctor):
            stack.extend(t.args)
    return out


def term_eq(a: Term, b: Term) -> bool:
    return a == b


# -- type tags ---------------------------------------------------------------

def _tag_tokens(text: str) -> list[str]:
    out, word = [], ""
    for ch in text:
        if ch in "()" or ch.isspace():
            if word:
                out.append(word)
                word = ""
            if ch in "()":
                out.append(ch)
        else:
            word += ch
    if word:
        out.append(word)
    return out


@lru_cache(maxsize=None)
def parse_tag(text: str):
    """Parse a tag into a tree: a name string or ``(head, arg, ...)`` tuple."""
    toks = _tag_tokens(text)
    pos = 0

    def item():
        nonlocal pos
        if pos >= len(toks):
            raise ValueError(f"malformed type tag {text!r}")
        tok = toks[pos]
        pos += 1
        if tok == "(":
            inner = seq(")")
            pos += 1
            return inner
        if tok == ")":
            raise ValueError(f"malformed type tag {text!r}")
        return tok

    def seq(stop):
        parts = []
        while pos < len(toks) and toks[pos] != stop:
            parts.append(item())
        if stop == ")" and pos >= len(toks):
            raise ValueError(f"malformed type tag {text!r}")
        if not parts:
            raise ValueError(f"malformed type tag {text!r}")
        return parts[0] if len(parts) == 1 else tuple(parts)

    tree = seq(None)
    return tree


def format_tag(tree, nested: bool = False) -> str:
    if isinstance(tree, str):
        return tree
    body = " ".join(format_tag(t, True) for t in tree)
    return f"({body})" if nested else body


@lru_cache(maxsize=None)
def normalize_tag(text: str) -> str:
    """``" ( List  (List Int) ) "`` -> ``"List (List Int)"``."""
    return format_tag(parse_tag(text))


@lru_cache(maxsize=None)
def list_tag(elem: str) -> str:
    return format_tag(("List", parse_tag(elem)))


@lru_cache(maxsize=None)
def list_elem(tag: Optional[str]) -> Optional[str]:
    """Element tag of a ``List X`` tag, else ``None``."""
    if tag is None:
        return None
    tree = parse_tag(tag)
    if isinstance(tree, tuple) and len(tree) == 2 and tree[0] == "List":
        return format_tag(tree[1])
    return None


def is_list_tag(tag: Optional[str]) -> bool:
    return list_elem(tag) is not None
