"""The ``.wls`` surface language: lexer, parser, checker and compiler.

Programs are s-expressions made of type declarations, relation definitions
and queries::

    (deftype Tree ((leaf) (node Tree Int Tree)))
    (defrel (appendo (a (List Int)) (b (List Int)) (ab (List Int)))
      (conde ((== a '()) (== b ab))
             ((fresh ((h Int) (t (List Int)) (r (List Int)))
                (== a (cons h t)) (== ab (cons h r)) (appendo t b r)))))
    (run * ((x (List Int)) (y (List Int))) (appendo x y '(1 2)))

Every parameter carries an explicit type.  Recursive calls between user
relations are put behind ``delay`` by the compiler.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

from .generics import TypeDesc, TypeRegistry
from .reify import quote_string, show
from .search import Goal, conj, delay, disj, eq, fresh, neq, record_event
from .stdlib import SIGNATURES, default_registry
from .term import BUILTIN_TAGS, NIL, Ctor, Sym, Term, atom, format_tag, is_list_tag, list_elem, list_tag, parse_tag

# -- source positions and errors ---------------------------------------------


@dataclass(frozen=True)
class Span:
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.start_line}:{self.start_col}-{self.end_line}:{self.end_col}"

    def to(self, other: "Span") -> "Span":
        return Span(self.start_line, self.start_col, other.end_line, other.end_col)


NOSPAN = Span(1, 1, 1, 1)


class SurfaceError(Exception):
    code = "Error"

    def __init__(self, message: str, span: Span):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self) -> str:
        return f"{self.code}: {self.message} at {self.span}"


class LexError(SurfaceError):
    code = "LexError"


class ParseError(SurfaceError):
    code = "ParseError"

    def __init__(self, message: str, span: Span, expected: frozenset = frozenset()):
        super().__init__(message, span)
        self.expected = expected


@dataclass(frozen=True)
class CheckError:
    code: str
    message: str
    span: Span

    def __str__(self) -> str:
        return f"{self.code}: {self.message} at {self.span}"


class CheckFailed(Exception):
    def __init__(self, errors: list[CheckError]):
        super().__init__("\n".join(map(str, errors)))
        self.errors = errors


# -- lexer -------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # "(", ")", "'", int, bool, string, symbol
    value: object
    span: Span


_ILLEGAL = set("[]{},`|\\")
_DELIMS = set("()'\";")
_INT_RE = re.compile(r"-?\d+")
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n"}


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(k: int = 1):
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line, col = line + 1, 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch.isspace():
            advance()
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                advance()
            continue
        start_line, start_col = line, col
        if ch in "()'":
            tokens.append(Token(ch, ch, Span(line, col, line, col)))
            advance()
            continue
        if ch == '"':
            advance()
            buf = []
            while True:
                if i >= n:
                    raise LexError("unterminated string", Span(start_line, start_col, line, max(col - 1, 1)))
                c = text[i]
                if c == '"':
                    break
                if c == "\\":
                    if i + 1 >= n:
                        raise LexError("unterminated string", Span(start_line, start_col, line, col))
                    esc = text[i + 1]
                    if esc not in _ESCAPES:
                        raise LexError(f"unknown escape \\{esc}", Span(line, col, line, col + 1))
                    buf.append(_ESCAPES[esc])
                    advance(2)
                    continue
                buf.append(c)
                advance()
            end = Span(start_line, start_col, line, col)
            advance()
            tokens.append(Token("string", "".join(buf), end))
            continue
        if ch in _ILLEGAL or not ch.isprintable():
            raise LexError(f"illegal character {ch!r}", Span(line, col, line, col))
        j = i
        while j < n and not text[j].isspace() and text[j] not in _DELIMS:
            if text[j] in _ILLEGAL or not text[j].isprintable():
                break
            j += 1
        word = text[i:j]
        span = Span(line, col, line, col + len(word) - 1)
        if word in ("#t", "#f"):
            tokens.append(Token("bool", word == "#t", span))
        elif word.startswith("#"):
            raise LexError(f"illegal character '#' in {word!r}", span)
        elif _INT_RE.fullmatch(word):
            tokens.append(Token("int", int(word), span))
        elif word[0].isdigit():
            raise LexError(f"malformed number {word!r}", span)
        else:
            tokens.append(Token("symbol", word, span))
        advance(len(word))
    return tokens


# -- reader: tokens -> s-expressions ----------------------------------------

@dataclass(frozen=True)
class SList:
    items: tuple
    span: Span


@dataclass(frozen=True)
class SQuote:
    expr: object
    span: Span


SExpr = Union[Token, SList, SQuote]


def _end_span(text: str) -> Span:
    lines = text.split("\n")
    return Span(len(lines), len(lines[-1]) + 1, len(lines), len(lines[-1]) + 1)


def read(text: str) -> list[SExpr]:
    tokens = tokenize(text)
    eof = _end_span(text)
    pos = 0

    def expr() -> SExpr:
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError('expected "(" or an atom', eof, frozenset({"(", "atom"}))
        tok = tokens[pos]
        pos += 1
        if tok.kind == "(":
            items = []
            while True:
                if pos >= len(tokens):
                    raise ParseError('expected ")"', eof, frozenset({")"}))
                if tokens[pos].kind == ")":
                    close = tokens[pos]
                    pos += 1
                    return SList(tuple(items), tok.span.to(close.span))
                items.append(expr())
        if tok.kind == ")":
            raise ParseError('unexpected ")"', tok.span, frozenset({"(", "atom"}))
        if tok.kind == "'":
            if pos >= len(tokens):
                raise ParseError('expected a symbol or "(" after quote', eof, frozenset({"symbol", "("}))
            inner = expr()
            return SQuote(inner, tok.span.to(_span(inner)))
        return tok

    out = []
    while pos < len(tokens):
        out.append(expr())
    return out


def _span(x: SExpr) -> Span:
    return x.span


# -- AST ---------------------------------------------------------------------

def _sp():
    return field(default=NOSPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Lit:
    value: object  # int, bool, str or Sym
    span: Span = _sp()


@dataclass(frozen=True)
class Quoted:
    datum: tuple  # nested tuples of int/bool/str/Sym
    span: Span = _sp()


@dataclass(frozen=True)
class Ref:
    name: str
    span: Span = _sp()


@dataclass(frozen=True)
class App:
    name: str
    args: tuple
    span: Span = _sp()


TermExpr = Union[Lit, Quoted, Ref, App]


@dataclass(frozen=True)
class Param:
    name: str
    tag: str
    span: Span = _sp()


@dataclass(frozen=True)
class Eq:
    left: TermExpr
    right: TermExpr
    span: Span = _sp()


@dataclass(frozen=True)
class Neq:
    left: TermExpr
    right: TermExpr
    span: Span = _sp()


@dataclass(frozen=True)
class Conde:
    branches: tuple  # tuple of tuples of goals
    span: Span = _sp()


@dataclass(frozen=True)
class Fresh:
    params: tuple
    body: tuple
    span: Span = _sp()


@dataclass(frozen=True)
class Delay:
    goal: object
    span: Span = _sp()


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    span: Span = _sp()


GoalExpr = Union[Eq, Neq, Conde, Fresh, Delay, Call]


@dataclass(frozen=True)
class CtorDecl:
    name: str
    fields: tuple
    span: Span = _sp()


@dataclass(frozen=True)
class TypeDecl:
    tag: str
    ctors: tuple
    span: Span = _sp()


@dataclass(frozen=True)
class Defrel:
    name: str
    params: tuple
    body: tuple
    span: Span = _sp()


@dataclass(frozen=True)
class QueryForm:
    n: Optional[int]  # None for "*"
    params: tuple
    body: tuple
    span: Span = _sp()


Form = Union[TypeDecl, Defrel, QueryForm]


@dataclass(frozen=True)
class Program:
    forms: tuple = ()


# -- parser: s-expressions -> AST --------------------------------------------

def _is_sym(x, name: Optional[str] = None) -> bool:
    return isinstance(x, Token) and x.kind == "symbol" and (name is None or x.value == name)


def _expect_list(x: SExpr, what: str) -> SList:
    if not isinstance(x, SList):
        raise ParseError(f'expected "(" to start {what}', _span(x), frozenset({"("}))
    return x


def _expect_name(x: SExpr, what: str) -> str:
    if not _is_sym(x):
        raise ParseError(f"expected {what}", _span(x), frozenset({"symbol"}))
    return x.value


def _missing(lst: SList, what: str) -> ParseError:
    end = lst.span
    return ParseError(f"expected {what}", Span(end.end_line, end.end_col, end.end_line, end.end_col),
                      frozenset({what}))


def parse_tag_expr(x: SExpr) -> str:
    def tree(x):
        if _is_sym(x):
            return x.value
        if isinstance(x, SList) and x.items:
            if not _is_sym(x.items[0]):
                raise ParseError("expected a type name", _span(x.items[0]), frozenset({"symbol"}))
            parts = tuple(tree(i) for i in x.items)
            return parts[0] if len(parts) == 1 else parts
        raise ParseError("expected a type", _span(x), frozenset({"symbol", "("}))

    return format_tag(tree(x))


def _parse_param(x: SExpr) -> Param:
    lst = _expect_list(x, "a parameter (name type)")
    if len(lst.items) != 2:
        raise ParseError("a parameter is (name type)", lst.span, frozenset({"symbol"}))
    return Param(_expect_name(lst.items[0], "a parameter name"), parse_tag_expr(lst.items[1]), lst.span)


def _parse_params(x: SExpr) -> tuple:
    lst = _expect_list(x, "a parameter list")
    return tuple(_parse_param(p) for p in lst.items)


def _datum(x: SExpr):
    if isinstance(x, Token):
        if x.kind == "symbol":
            return Sym(x.value)
        if x.kind in ("int", "bool", "string"):
            return x.value
    if isinstance(x, SList):
        return tuple(_datum(i) for i in x.items)
    raise ParseError("unexpected quote inside quoted data", _span(x), frozenset({"atom", "("}))


def parse_term(x: SExpr) -> TermExpr:
    if isinstance(x, Token):
        if x.kind in ("int", "bool", "string"):
            return Lit(x.value, x.span)
        return Ref(x.value, x.span)
    if isinstance(x, SQuote):
        inner = x.expr
        if _is_sym(inner):
            return Lit(Sym(inner.value), x.span)
        if isinstance(inner, SList):
            return Quoted(_datum(inner), x.span)
        raise ParseError('expected a symbol or "(" after quote', _span(inner), frozenset({"symbol", "("}))
    if not x.items or not _is_sym(x.items[0]):
        raise ParseError("expected a constructor name", x.span, frozenset({"symbol"}))
    return App(x.items[0].value, tuple(parse_term(a) for a in x.items[1:]), x.span)


def parse_goal(x: SExpr) -> GoalExpr:
    lst = _expect_list(x, "a goal")
    if not lst.items or not _is_sym(lst.items[0]):
        raise ParseError("expected a goal name", lst.span, frozenset({"==", "=/=", "conde", "fresh", "delay", "symbol"}))
    head, args = lst.items[0].value, lst.items[1:]
    if head in ("==", "=/="):
        if len(args) != 2:
            raise ParseError(f"{head} takes exactly two terms", lst.span, frozenset({"term"}))
        cls = Eq if head == "==" else Neq
        return cls(parse_term(args[0]), parse_term(args[1]), lst.span)
    if head == "conde":
        branches = tuple(tuple(parse_goal(g) for g in _expect_list(b, "a conde clause").items) for b in args)
        return Conde(branches, lst.span)
    if head == "fresh":
        if not args:
            raise _missing(lst, "(")
        return Fresh(_parse_params(args[0]), tuple(parse_goal(g) for g in args[1:]), lst.span)
    if head == "delay":
        if len(args) != 1:
            raise ParseError("delay takes exactly one goal", lst.span, frozenset({"("}))
        return Delay(parse_goal(args[0]), lst.span)
    return Call(head, tuple(parse_term(a) for a in args), lst.span)


def parse_form(x: SExpr) -> Form:
    lst = _expect_list(x, "a form")
    keywords = frozenset({"deftype", "defrel", "run"})
    if not lst.items or not _is_sym(lst.items[0]) or lst.items[0].value not in keywords:
        where = _span(lst.items[0]) if lst.items else lst.span
        raise ParseError("expected deftype, defrel or run", where, keywords)
    head, args = lst.items[0].value, lst.items[1:]
    if head == "deftype":
        if len(args) != 2:
            raise ParseError("deftype takes a type and a constructor list", lst.span, frozenset({"("}))
        ctors = []
        for c in _expect_list(args[1], "the constructor list").items:
            c = _expect_list(c, "a constructor (name type...)")
            if not c.items:
                raise ParseError("expected a constructor name", c.span, frozenset({"symbol"}))
            ctors.append(CtorDecl(_expect_name(c.items[0], "a constructor name"),
                                  tuple(parse_tag_expr(f) for f in c.items[1:]), c.span))
        return TypeDecl(parse_tag_expr(args[0]), tuple(ctors), lst.span)
    if head == "defrel":
        if not args:
            raise _missing(lst, "(")
        sig = _expect_list(args[0], "the relation signature")
        if not sig.items:
            raise ParseError("expected a relation name", sig.span, frozenset({"symbol"}))
        name = _expect_name(sig.items[0], "a relation name")
        params = tuple(_parse_param(p) for p in sig.items[1:])
        return Defrel(name, params, tuple(parse_goal(g) for g in args[1:]), lst.span)
    if not args:
        raise _missing(lst, "int")
    count = args[0]
    if _is_sym(count, "*"):
        n = None
    elif isinstance(count, Token) and count.kind == "int":
        if count.value <= 0:
            raise ParseError("run count must be positive", count.span, frozenset({"int", "*"}))
        n = count.value
    else:
        raise ParseError('expected an answer count or "*"', _span(count), frozenset({"int", "*"}))
    if len(args) < 2:
        raise _missing(lst, "(")
    return QueryForm(n, _parse_params(args[1]), tuple(parse_goal(g) for g in args[2:]), lst.span)


def parse_program(text: str) -> Program:
    return Program(tuple(parse_form(x) for x in read(text)))


# -- printer -----------------------------------------------------------------

def _tag_text(tag: str) -> str:
    return f"({tag})" if " " in tag else tag


def _datum_text(d) -> str:
    if isinstance(d, tuple):
        return "(" + " ".join(_datum_text(x) for x in d) + ")"
    return _atom_text(d)


def _atom_text(v) -> str:
    if isinstance(v, bool):
        return "#t" if v else "#f"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return quote_string(v)
    if isinstance(v, Sym):
        return v.name
    raise TypeError(v)


def unparse_term(t: TermExpr) -> str:
    if isinstance(t, Lit):
        return "'" + t.value.name if isinstance(t.value, Sym) else _atom_text(t.value)
    if isinstance(t, Quoted):
        return "'" + _datum_text(t.datum)
    if isinstance(t, Ref):
        return t.name
    return "(" + " ".join([t.name] + [unparse_term(a) for a in t.args]) + ")"


def _params_text(ps) -> str:
    return "(" + " ".join(f"({p.name} {_tag_text(p.tag)})" for p in ps) + ")"


def unparse_goal(g: GoalExpr) -> str:
    if isinstance(g, (Eq, Neq)):
        op = "==" if isinstance(g, Eq) else "=/="
        return f"({op} {unparse_term(g.left)} {unparse_term(g.right)})"
    if isinstance(g, Conde):
        return "(conde" + "".join(" (" + " ".join(unparse_goal(x) for x in b) + ")" for b in g.branches) + ")"
    if isinstance(g, Fresh):
        return "(fresh " + _params_text(g.params) + "".join(" " + unparse_goal(x) for x in g.body) + ")"
    if isinstance(g, Delay):
        return f"(delay {unparse_goal(g.goal)})"
    return "(" + " ".join([g.name] + [unparse_term(a) for a in g.args]) + ")"


def unparse_form(f: Form) -> str:
    if isinstance(f, TypeDecl):
        ctors = " ".join("(" + " ".join([c.name] + [_tag_text(t) for t in c.fields]) + ")" for c in f.ctors)
        return f"(deftype {_tag_text(f.tag)} ({ctors}))"
    body = "".join(" " + unparse_goal(g) for g in f.body)
    if isinstance(f, Defrel):
        sig = " ".join([f.name] + [f"({p.name} {_tag_text(p.tag)})" for p in f.params])
        return f"(defrel ({sig}){body})"
    n = "*" if f.n is None else str(f.n)
    return f"(run {n} {_params_text(f.params)}{body})"


def unparse(p: Program) -> str:
    return "".join(unparse_form(f) + "\n" for f in p.forms)


# -- checker -----------------------------------------------------------------

NIL_TAG = "<nil>"  # the inferred type of '(): any list


def _compatible(a: Optional[str], b: Optional[str]) -> bool:
    if a is None or b is None or a == b:
        return True
    if a == NIL_TAG:
        return is_list_tag(b)
    if b == NIL_TAG:
        return is_list_tag(a)
    return False


def _show_tag(t: Optional[str]) -> str:
    return "a list" if t == NIL_TAG else str(t)


def _is_tyvar(name: str) -> bool:
    return name[:1].islower()


def _match(pattern, tree, binding: dict) -> bool:
    if isinstance(pattern, str) and _is_tyvar(pattern):
        if pattern in binding:
            return binding[pattern] == tree
        binding[pattern] = tree
        return True
    if isinstance(pattern, str) or isinstance(tree, str):
        return pattern == tree
    return len(pattern) == len(tree) and all(_match(p, t, binding) for p, t in zip(pattern, tree))


def _subst(pattern, binding: dict):
    if isinstance(pattern, str):
        if _is_tyvar(pattern):
            return binding.get(pattern)
        return pattern
    parts = tuple(_subst(p, binding) for p in pattern)
    return None if any(p is None for p in parts) else parts


@dataclass
class RelationInfo:
    name: str
    param_tags: tuple
    defrel: Optional[Defrel] = None  # None for library relations


@dataclass
class CheckedProgram:
    registry: TypeRegistry
    relations: dict
    queries: list
    # resolved type of each constructor / quoted-list node, keyed by id(node)
    node_tags: dict
    program: Program


class _Checker:
    def __init__(self, registry: TypeRegistry):
        self.registry = registry
        self.errors: list[CheckError] = []
        self.relations: dict[str, RelationInfo] = {}
        self.node_tags: dict[int, Optional[str]] = {}

    def error(self, code: str, message: str, span: Span):
        self.errors.append(CheckError(code, message, span))

    def known(self, tag: str, span: Span) -> bool:
        if self.registry.knows(tag):
            return True
        self.error("UnknownType", f"unknown type {tag}", span)
        return False

    # types ------------------------------------------------------------------

    def declare_types(self, decls: list[TypeDecl]):
        seen: set[str] = set()
        for d in decls:
            if d.tag in BUILTIN_TAGS or d.tag in seen:
                self.error("DuplicateDefinition", f"type {d.tag} is already defined", d.span)
                continue
            names = [c.name for c in d.ctors]
            dup = {n for n in names if names.count(n) > 1}
            if dup:
                self.error("DuplicateDefinition", f"constructor {sorted(dup)[0]} defined twice in {d.tag}", d.span)
                continue
            desc = TypeDesc(d.tag, tuple((c.name, c.fields) for c in d.ctors))
            seen.add(d.tag)
            if d.tag in self.registry:
                if self.registry.desc(d.tag) != desc:
                    self.error("DuplicateDefinition", f"type {d.tag} is already defined differently", d.span)
                continue
            self.registry = self.registry.register(desc)
        for d in decls:
            for c in d.ctors:
                for f in c.fields:
                    self.known(f, c.span)

    # terms ------------------------------------------------------------------

    def peek(self, t: TermExpr, env: dict) -> Optional[str]:
        if isinstance(t, Ref) and t.name in env:
            return env[t.name]
        if isinstance(t, Lit):
            return self.lit_tag(t.value)
        return None

    @staticmethod
    def lit_tag(v) -> str:
        if isinstance(v, bool):
            return "Bool"
        if isinstance(v, int):
            return "Int"
        if isinstance(v, Sym):
            return "Sym"
        return "String"

    def datum_tag(self, d, expected: Optional[str], span: Span) -> Optional[str]:
        if not isinstance(d, tuple):
            return self.lit_tag(d)
        if not d:
            return NIL_TAG
        elem = list_elem(expected) if expected and expected != NIL_TAG else None
        found = None
        for item in d:
            t = self.datum_tag(item, elem, span)
            if t == NIL_TAG:
                continue
            if found is None:
                found = t
            elif t is not None and t != found:
                self.error("TagMismatch", f"quoted list mixes {found} and {t}", span)
                return None
        if found is None:
            found = elem
        if found is None:
            return expected if expected != NIL_TAG else None
        return list_tag(found)

    def resolve_ctor(self, name: str, arity: int, expected: Optional[str], span: Span) -> Optional[str]:
        reg = self.registry
        if expected and expected != NIL_TAG and reg.fields(expected, name) is not None:
            return expected
        candidates = reg.tags_with_ctor(name)
        if len(candidates) == 1:
            return candidates[0]
        if not candidates:
            return None
        matching = [c for c in candidates if reg.arity(c, name) == arity]
        if len(matching) == 1:
            return matching[0]
        self.error("TagMismatch", f"constructor {name} is ambiguous here; it belongs to {', '.join(candidates)}", span)
        return None

    def infer(self, t: TermExpr, env: dict, expected: Optional[str] = None) -> Optional[str]:
        if isinstance(t, Lit):
            return self.lit_tag(t.value)
        if isinstance(t, Quoted):
            tag = self.datum_tag(t.datum, expected, t.span)
            self.node_tags[id(t)] = None if tag == NIL_TAG else tag
            return tag
        if isinstance(t, Ref):
            if t.name in env:
                return env[t.name]
            tag = self.resolve_ctor(t.name, 0, expected, t.span)
            if tag is None:
                if not self.registry.tags_with_ctor(t.name):
                    self.error("UnboundVariable", f"unbound variable {t.name}", t.span)
                return None
            arity = self.registry.arity(tag, t.name)
            if arity != 0:
                self.error("ArityMismatch", f"constructor {t.name} expects {arity} arguments, got 0", t.span)
            self.node_tags[id(t)] = tag
            return tag
        # App
        if t.name == "cons" and len(t.args) == 2:
            return self.infer_cons(t, env, expected)
        tag = self.resolve_ctor(t.name, len(t.args), expected, t.span)
        if tag is None:
            if not self.registry.tags_with_ctor(t.name):
                self.error("UnknownConstructor", f"unknown constructor {t.name}", t.span)
            for a in t.args:
                self.infer(a, env)
            return None
        fields = self.registry.fields(tag, t.name)
        self.node_tags[id(t)] = tag
        if len(fields) != len(t.args):
            self.error("ArityMismatch", f"constructor {t.name} expects {len(fields)} arguments, got {len(t.args)}",
                       t.span)
            return tag
        for a, ft in zip(t.args, fields):
            self.expect(a, env, ft)
        return tag

    def infer_cons(self, t: App, env: dict, expected: Optional[str]) -> Optional[str]:
        head, tail = t.args
        tag = expected if is_list_tag(expected) else None
        if tag is None:
            tt = self.peek(tail, env)
            if is_list_tag(tt):
                tag = tt
        if tag is None:
            ht = self.peek(head, env) or self.infer_quiet(head, env)
            if ht is not None and ht != NIL_TAG:
                tag = list_tag(ht)
        if tag is None:
            tt = self.infer_quiet(tail, env)
            if is_list_tag(tt):
                tag = tt
        if tag is None:
            self.infer(head, env)
            self.infer(tail, env)
            self.node_tags[id(t)] = None
            return NIL_TAG
        self.node_tags[id(t)] = tag
        self.expect(head, env, list_elem(tag))
        self.expect(tail, env, tag)
        return tag

    def infer_quiet(self, t: TermExpr, env: dict) -> Optional[str]:
        saved = (list(self.errors), dict(self.node_tags))
        try:
            return self.infer(t, env)
        finally:
            self.errors, self.node_tags = saved

    def expect(self, t: TermExpr, env: dict, tag: Optional[str]) -> None:
        got = self.infer(t, env, tag)
        if not _compatible(got, tag):
            self.error("TagMismatch", f"expected {_show_tag(tag)}, found {_show_tag(got)}", t.span)

    # goals ------------------------------------------------------------------

    def params(self, ps, env: dict) -> dict:
        env = dict(env)
        seen = set()
        for p in ps:
            if p.name in seen:
                self.error("DuplicateDefinition", f"variable {p.name} bound twice", p.span)
            seen.add(p.name)
            self.known(p.tag, p.span)
            env[p.name] = p.tag
        return env

    def goal(self, g: GoalExpr, env: dict) -> None:
        if isinstance(g, (Eq, Neq)):
            hint = self.peek(g.left, env) or self.peek(g.right, env)
            if hint is None:
                hint = self.infer_quiet(g.left, env)
                if hint is None or hint == NIL_TAG:
                    hint = self.infer_quiet(g.right, env)
            if hint == NIL_TAG:
                hint = None
            lt = self.infer(g.left, env, hint)
            rt = self.infer(g.right, env, hint if hint is not None else (lt if lt != NIL_TAG else None))
            if not _compatible(lt, rt):
                op = "==" if isinstance(g, Eq) else "=/="
                self.error("TagMismatch", f"{op} between {_show_tag(lt)} and {_show_tag(rt)}", g.span)
        elif isinstance(g, Conde):
            for branch in g.branches:
                for x in branch:
                    self.goal(x, env)
        elif isinstance(g, Fresh):
            inner = self.params(g.params, env)
            for x in g.body:
                self.goal(x, inner)
        elif isinstance(g, Delay):
            self.goal(g.goal, env)
        else:
            self.call(g, env)

    def call(self, g: Call, env: dict) -> None:
        info = self.relations.get(g.name)
        if info is None:
            self.error("UnknownRelation", f"unknown relation {g.name}", g.span)
            for a in g.args:
                self.infer(a, env)
            return
        if len(info.param_tags) != len(g.args):
            self.error("ArityMismatch", f"{g.name} expects {len(info.param_tags)} arguments, got {len(g.args)}",
                       g.span)
            return
        binding: dict = {}
        patterns = [parse_tag(p) for p in info.param_tags]
        # arguments with a known type go first so type variables get bound
        order = sorted(range(len(g.args)), key=lambda i: self.peek(g.args[i], env) is None)
        for i in order:
            arg, pat = g.args[i], patterns[i]
            want = _subst(pat, binding)
            want_tag = None if want is None else format_tag(want)
            got = self.infer(arg, env, want_tag)
            if got is None:
                continue
            if got == NIL_TAG:
                if want is None and isinstance(pat, tuple) and pat[0] == "List":
                    continue
                ok = want_tag is not None and is_list_tag(want_tag)
            else:
                ok = _match(pat, parse_tag(got), binding)
            if not ok:
                expected = want_tag or format_tag(pat)
                self.error("TagMismatch", f"argument {i + 1} of {g.name}: expected {_show_tag(expected)}, "
                                          f"found {_show_tag(got)}", arg.span)

    # program ----------------------------------------------------------------

    def program(self, p: Program) -> CheckedProgram:
        self.declare_types([f for f in p.forms if isinstance(f, TypeDecl)])
        for name, (_, tags) in SIGNATURES.items():
            self.relations[name] = RelationInfo(name, tags)
        user: set[str] = set()
        for f in p.forms:
            if isinstance(f, Defrel):
                if f.name in user:
                    self.error("DuplicateDefinition", f"relation {f.name} is already defined", f.span)
                    continue
                user.add(f.name)
                self.relations[f.name] = RelationInfo(f.name, tuple(x.tag for x in f.params), f)
        queries = []
        for f in p.forms:
            if isinstance(f, Defrel):
                if self.relations[f.name].defrel is not f:
                    continue
                env = self.params(f.params, {})
                for g in f.body:
                    self.goal(g, env)
            elif isinstance(f, QueryForm):
                env = self.params(f.params, {})
                for g in f.body:
                    self.goal(g, env)
                queries.append(f)
        if self.errors:
            raise CheckFailed(self.errors)
        return CheckedProgram(self.registry, self.relations, queries, self.node_tags, p)


def check(p: Program, registry: Optional[TypeRegistry] = None) -> CheckedProgram:
    """Resolve names and types; raises ``CheckFailed`` with every error found."""
    return _Checker(registry or default_registry()).program(p)


# -- compiler ----------------------------------------------------------------

@dataclass
class CompiledQuery:
    n: Optional[int]
    params: list  # [(name, tag)]
    goal_fn: Callable[..., Goal]
    text: str


@dataclass
class CompiledProgram:
    relations: dict  # name -> goal builder
    queries: list


def _quoted_term(d, tag: Optional[str]) -> Term:
    if not isinstance(d, tuple):
        return atom(d)
    elem = list_elem(tag)
    out: Term = NIL
    for item in reversed(d):
        out = Ctor("cons", tag, (_quoted_term(item, elem), out))
    return out


def _recursive_calls(rels: dict) -> dict:
    """For each user relation, the callees that can reach back to it."""
    calls: dict[str, set] = {}

    def collect(g, out):
        if isinstance(g, Call):
            if g.name in rels:
                out.add(g.name)
        elif isinstance(g, Conde):
            for b in g.branches:
                for x in b:
                    collect(x, out)
        elif isinstance(g, Fresh):
            for x in g.body:
                collect(x, out)
        elif isinstance(g, Delay):
            collect(g.goal, out)

    for name, info in rels.items():
        calls[name] = set()
        for g in info.defrel.body:
            collect(g, calls[name])

    def reaches(src, dst):
        seen, stack = set(), [src]
        while stack:
            r = stack.pop()
            if r == dst:
                return True
            if r in seen:
                continue
            seen.add(r)
            stack.extend(calls[r])
        return False

    return {name: {c for c in callees if reaches(c, name)} for name, callees in calls.items()}


def compile_program(cp: CheckedProgram) -> CompiledProgram:
    """Turn a checked program into goal builders and runnable queries."""
    tags = cp.node_tags
    user = {name: info for name, info in cp.relations.items() if info.defrel is not None}
    recursive = _recursive_calls(user)
    builders: dict[str, Callable[..., Goal]] = {name: fn for name, (fn, _) in SIGNATURES.items() if name not in user}

    def term(t: TermExpr, scope: frozenset) -> Callable[[dict], Term]:
        if isinstance(t, Lit):
            v = atom(t.value)
            return lambda env: v
        if isinstance(t, Quoted):
            v = _quoted_term(t.datum, tags.get(id(t)))
            return lambda env: v
        if isinstance(t, Ref):
            if t.name in scope:
                name = t.name
                return lambda env: env[name]
            v = Ctor(t.name, tags.get(id(t)), ())
            return lambda env: v
        name, tag = t.name, tags.get(id(t))
        parts = [term(a, scope) for a in t.args]
        return lambda env: Ctor(name, tag, tuple(p(env) for p in parts))

    def goal(g: GoalExpr, scope: frozenset, owner: Optional[str]) -> Callable[[dict], Goal]:
        if isinstance(g, (Eq, Neq)):
            op = eq if isinstance(g, Eq) else neq
            left, right = term(g.left, scope), term(g.right, scope)
            return lambda env: op(left(env), right(env))
        if isinstance(g, Conde):
            branches = [body(b, scope, owner) for b in g.branches]
            return lambda env: disj(*(b(env) for b in branches))
        if isinstance(g, Fresh):
            names = [p.name for p in g.params]
            ptags = [p.tag for p in g.params]
            inner = body(g.body, scope | frozenset(names), owner)
            return lambda env: fresh(ptags, lambda *vs: inner({**env, **dict(zip(names, vs))}))
        if isinstance(g, Delay):
            inner_goal = goal(g.goal, scope, owner)
            return lambda env: delay(lambda: inner_goal(env))
        name = g.name
        args = [term(a, scope) for a in g.args]
        if owner is not None and name in recursive.get(owner, ()):
            return lambda env: delay(lambda: builders[name](*(a(env) for a in args)), name)
        return lambda env: builders[name](*(a(env) for a in args))

    def body(goals, scope: frozenset, owner: Optional[str]) -> Callable[[dict], Goal]:
        parts = [goal(g, scope, owner) for g in goals]
        return lambda env: conj(*(p(env) for p in parts))

    def make_relation(info: RelationInfo) -> Callable[..., Goal]:
        d = info.defrel
        names = [p.name for p in d.params]
        compiled = body(d.body, frozenset(names), d.name)
        rel_name = d.name

        def build(*args: Term) -> Goal:
            def run_goal(st):
                if st.ctx.tracing:
                    st = replace(st, trace_parent=record_event(st, "goal", rel_name, " ".join(map(show, args))))
                return compiled(dict(zip(names, args)))(st)

            return run_goal

        return build

    for name, info in user.items():
        builders[name] = make_relation(info)

    queries = []
    for q in cp.queries:
        names = [p.name for p in q.params]
        compiled = body(q.body, frozenset(names), None)
        queries.append(CompiledQuery(
            q.n, [(p.name, p.tag) for p in q.params],
            (lambda c, ns: lambda *vs: c(dict(zip(ns, vs))))(compiled, names),
            unparse_form(q),
        ))
    return CompiledProgram(builders, queries)


def load(text: str, registry: Optional[TypeRegistry] = None) -> CompiledProgram:
    """Parse, check and compile ``text``."""
    return compile_program(check(parse_program(text), registry))
