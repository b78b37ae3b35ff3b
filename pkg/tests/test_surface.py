import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tyrel.harness import APPENDO_WLS, bit_lists
from tyrel.reify import render
from tyrel.search import EngineConfig, run
from tyrel.stdlib import appendo
from tyrel.surface import (App, Call, CheckFailed, Conde, CtorDecl, Defrel, Delay, Eq, Fresh, LexError, Lit, Neq,
                           Param, ParseError, Program, QueryForm, Quoted, Ref, TypeDecl, check, load, parse_program,
                           read, tokenize, unparse)
from tyrel.term import Sym, from_list


def kinds(text):
    return [t.value if t.kind == "symbol" or t.kind == "int" else t.kind for t in tokenize(text)]


# -- lexer and reader -------------------------------------------------------

def test_tokenize_examples():
    assert kinds("(== q 5)") == ["(", "==", "q", 5, ")"]
    assert kinds("; c\n()") == ["(", ")"]


def test_unterminated_string():
    with pytest.raises(LexError, match="unterminated string"):
        tokenize('"abc')


def test_illegal_character():
    with pytest.raises(LexError):
        tokenize("(== q [5])")


def test_string_escapes():
    [tok] = tokenize(r'"a\"b\\c\n"')
    assert tok.value == 'a"b\\c\n'


def test_spans_are_one_based():
    toks = tokenize("(a\n  bc)")
    assert str(toks[2].span) == "2:3-2:4"


def test_missing_close_paren():
    with pytest.raises(ParseError) as e:
        parse_program("(run 1 ((q Int)) (== q 5)")
    assert 'expected ")"' in str(e.value)


def test_stray_close_paren():
    with pytest.raises(ParseError):
        read("())")


# -- parser -----------------------------------------------------------------

def test_parse_query():
    [f] = parse_program("(run 2 ((q Int)) (== q 5) (=/= q 6))").forms
    assert f == QueryForm(2, (Param("q", "Int"),), (Eq(Ref("q"), Lit(5)), Neq(Ref("q"), Lit(6))))


def test_parse_all_and_nested_tags():
    [f] = parse_program("(run * ((q (List (List Int)))) (== q '()))").forms
    assert f.n is None and f.params[0].tag == "List (List Int)" and f.body[0].right == Quoted(())


def test_parse_deftype():
    [f] = parse_program("(deftype Tree ((leaf) (node Tree Int Tree)))").forms
    assert f == TypeDecl("Tree", (CtorDecl("leaf", ()), CtorDecl("node", ("Tree", "Int", "Tree"))))


def test_spans_nest():
    [f] = parse_program("(run 1 ((q Int))\n  (== q 5))").forms
    g = f.body[0]
    assert (f.span.start_line, f.span.start_col) <= (g.span.start_line, g.span.start_col)
    assert (g.span.end_line, g.span.end_col) <= (f.span.end_line, f.span.end_col)


@pytest.mark.parametrize("text", [
    "(run 0 ((q Int)) (== q 5))",
    "(run 1 (q) (== q 5))",
    "(frobnicate 1)",
    "(run 1 ((q Int)) (fresh))",
])
def test_malformed_forms(text):
    with pytest.raises(ParseError):
        parse_program(text)


# -- round trip -------------------------------------------------------------

NAMES = st.sampled_from(["a", "b", "q", "x1", "res", "foo-bar", "p?"])
CTORS = st.sampled_from(["node", "leaf", "s", "z", "cons", "pair"])
TAGS = st.sampled_from(["Int", "Bool", "String", "Sym", "Peano", "List Int", "List (List Int)", "Tree"])
SYMS = st.sampled_from(["x", "done", "hey"]).map(Sym)
SCALARS = st.one_of(st.integers(-99, 99), st.booleans(), st.text("ab \"\\\n", max_size=4), SYMS)
DATA = st.recursive(SCALARS, lambda inner: st.lists(inner, max_size=3).map(tuple), max_leaves=5)

terms = st.recursive(
    st.one_of(SCALARS.map(Lit), NAMES.map(Ref), st.lists(DATA, max_size=3).map(lambda d: Quoted(tuple(d)))),
    lambda inner: st.builds(App, CTORS, st.lists(inner, min_size=1, max_size=3).map(tuple)),
    max_leaves=6,
)
params = st.lists(st.builds(Param, NAMES, TAGS), min_size=1, max_size=3).map(tuple)


def _goals(inner):
    body = st.lists(inner, min_size=1, max_size=2).map(tuple)
    return st.one_of(
        st.builds(Conde, st.lists(body, min_size=1, max_size=3).map(tuple)),
        st.builds(Fresh, params, body),
        st.builds(Delay, inner),
    )


goals = st.recursive(
    st.one_of(st.builds(Eq, terms, terms), st.builds(Neq, terms, terms),
              st.builds(Call, NAMES, st.lists(terms, max_size=3).map(tuple))),
    _goals, max_leaves=5,
)
body = st.lists(goals, min_size=1, max_size=3).map(tuple)
forms = st.one_of(
    st.builds(QueryForm, st.none() | st.integers(1, 9), params, body),
    st.builds(Defrel, NAMES, params, body),
    st.builds(TypeDecl, st.sampled_from(["Tree", "Shape"]),
              st.lists(st.builds(CtorDecl, CTORS, st.lists(TAGS, max_size=3).map(tuple)), min_size=1,
                       max_size=3).map(tuple)),
)
programs = st.lists(forms, max_size=4).map(lambda fs: Program(tuple(fs)))


@settings(max_examples=300, deadline=None)
@given(programs)
def test_parse_print_round_trip(p):
    assert parse_program(unparse(p)) == p


def test_round_trip_demo(demos):
    for path in demos.glob("*.wls"):
        p = parse_program(path.read_text())
        assert parse_program(unparse(p)) == p


# -- checker ----------------------------------------------------------------

def codes(text):
    with pytest.raises(CheckFailed) as e:
        check(parse_program(text))
    return [err.code for err in e.value.errors]


def test_checks_appendo():
    cp = check(parse_program(APPENDO_WLS))
    assert "appendo" in cp.relations


def test_tag_mismatch_span():
    with pytest.raises(CheckFailed) as e:
        check(parse_program("(run 1 ((q Int)) (== q #t))"))
    [err] = e.value.errors
    assert err.code == "TagMismatch" and str(err.span) == "1:18-1:26"


def test_arity_mismatch():
    with pytest.raises(CheckFailed) as e:
        check(parse_program("(run 1 ((a (List Int)) (b (List Int))) (appendo a b))"))
    [err] = e.value.errors
    assert err.code == "ArityMismatch" and "3" in err.message


@pytest.mark.parametrize("text,code", [
    ("(run 1 ((q Int)) (== q r))", "UnboundVariable"),
    ("(run 1 ((q Int)) (nope q))", "UnknownRelation"),
    ("(defrel (r (x Int)) (== x 1)) (defrel (r (x Int)) (== x 2))", "DuplicateDefinition"),
    ("(run 1 ((q Widget)) (== q 1))", "UnknownType"),
    ("(run 1 ((q Peano)) (== q (succ z)))", "UnknownConstructor"),
    ("(run 1 ((q Peano)) (== q (s z z)))", "ArityMismatch"),
    ("(run 1 ((q (List Int))) (== q '(1 #t)))", "TagMismatch"),
    ("(run 1 ((q Int)) (membero q '(#t)))", "TagMismatch"),
])
def test_check_error_codes(text, code):
    assert code in codes(text)


def test_errors_are_collected():
    got = codes("(run 1 ((q Int)) (== q #t) (nope q) (== q r))")
    assert sorted(got) == ["TagMismatch", "UnboundVariable", "UnknownRelation"]


UNRELATED = [
    "(run 1 ((q Int)) (== q #t))",
    "(defrel (bad (x Int)) (== x \"s\"))",
    "(run 1 ((q Int)) (nope q))",
    "(deftype Box ((box Missing)))",
    "(run 1 ((q Peano)) (== q (zz)))",
    "(defrel (good (x Int)) (== x 1))",
]


def test_error_set_is_order_independent():
    expected = None
    rng = random.Random(7)
    for _ in range(20):
        forms = UNRELATED[:]
        rng.shuffle(forms)
        with pytest.raises(CheckFailed) as e:
            check(parse_program("\n".join(forms)))
        got = {(err.code, err.message) for err in e.value.errors}
        expected = expected or got
        assert got == expected


def test_empty_body_succeeds():
    prog = load("(defrel (anything (x Int))) (run * ((q Int)) (anything q))")
    q = prog.queries[0]
    assert [render(a) for a in run(None, q.params, q.goal_fn)[0]] == ["q = _.0"]


def test_quoted_symbols_are_symbols():
    assert "TagMismatch" in codes("(deftype Color ((red))) (run * ((c Color)) (membero c '(red)))")


def test_defrel_may_shadow_stdlib():
    prog = load("(defrel (membero (x Int) (l Int)) (== x l)) (run * ((q Int)) (membero q 3))")
    q = prog.queries[0]
    assert [render(a) for a in run(None, q.params, q.goal_fn)[0]] == ["q = 3"]


def test_user_types_and_stdlib_polymorphism():
    prog = load("""
        (deftype Color ((red) (green)))
        (run * ((c Color)) (membero c (cons red (cons green '()))))
        (run * ((l (List Color))) (conso red '() l))
    """)
    outs = [[render(a) for a in run(None, q.params, q.goal_fn)[0]] for q in prog.queries]
    assert outs == [["c = red", "c = green"], ["l = (red)"]]


# -- compile ----------------------------------------------------------------

LISTS = bit_lists(3)


def test_compiled_appendo_matches_stdlib():
    compiled = load(APPENDO_WLS).relations["appendo"]
    vars_ = [("a", "List Int"), ("b", "List Int"), ("c", "List Int")]
    for a, b in itertools.product(LISTS, LISTS):
        for c in LISTS:
            args = [from_list(x, "List Int") for x in (a, b, c)]
            mine = run(None, [], lambda: compiled(*args))[0]
            theirs = run(None, [], lambda: appendo(*args))[0]
            assert mine == theirs
    surface = run(10, vars_, compiled)[0]
    embedded = run(10, vars_, appendo)[0]
    assert surface == embedded


def test_recursive_calls_are_delayed():
    prog = load(APPENDO_WLS + "(run * ((a (List Int)) (b (List Int))) (appendo a b '(1 2 3)))")
    q = prog.queries[0]
    _, t = run(None, q.params, q.goal_fn, EngineConfig(trace_enabled=True))
    activations = sum(1 for n in t.nodes if n.kind == "goal" and n.label == "appendo")
    # every activation after the first comes from a recursive call
    assert t.count("delay") >= activations - 1 and t.count("force") == activations - 1


def test_explicit_delay_form():
    prog = load("(run * ((q Int)) (delay (== q 1)))")
    q = prog.queries[0]
    assert [render(a) for a in run(None, q.params, q.goal_fn)[0]] == ["q = 1"]


def test_mutual_recursion_terminates_lazily():
    prog = load("""
        (defrel (evo (n Peano)) (conde ((== n z)) ((fresh ((m Peano)) (== n (s m)) (oddo m)))))
        (defrel (oddo (n Peano)) (fresh ((m Peano)) (== n (s m)) (evo m)))
        (run 3 ((n Peano)) (evo n))
    """)
    q = prog.queries[0]
    got = [render(a) for a in run(3, q.params, q.goal_fn)[0]]
    assert got == ["n = z", "n = (s (s z))", "n = (s (s (s (s z))))"]


def test_builtin_peano_redeclaration():
    load("(deftype Peano ((z) (s Peano))) (run 1 ((q Peano)) (== q z))")
    assert "DuplicateDefinition" in codes("(deftype Peano ((z)))")
