import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pyrsistent import pmap

from tyrel.generics import (Data, DuplicateTag, NonConformant, Partial, TypeDesc, TypeRegistry, UnknownCtor,
                            UnknownFieldTag, inject, project, skeleton)
from tyrel.search import State
from tyrel.stdlib import PEANO, default_registry
from tyrel.term import NIL, Ctor, Sym, Var, atom, cons, term_eq
from tyrel.unify import unify

TREE = TypeDesc("Tree", (("leaf", ()), ("node", ("Tree", "Int", "Tree"))))
SHAPE = TypeDesc("Shape", (("circle", ("Int",)), ("rect", ("Int", "Int")), ("label", ("String", "Sym", "Bool"))))
REG = default_registry().register(TREE).register(SHAPE).finalize()

MAX_DEPTH = 6


def peano_values(depth=MAX_DEPTH):
    z = st.just(Data("Peano", "z"))
    if depth == 0:
        return z
    return z | peano_values(depth - 1).map(lambda n: Data("Peano", "s", (n,)))


def tree_values(depth=MAX_DEPTH):
    leaf = st.just(Data("Tree", "leaf"))
    if depth == 0:
        return leaf
    sub = tree_values(depth - 1)
    return leaf | st.builds(lambda l, v, r: Data("Tree", "node", (l, v, r)), sub, st.integers(), sub)


syms = st.text("abcxyz", min_size=1, max_size=4).map(Sym)
shape_values = st.one_of(
    st.integers().map(lambda r: Data("Shape", "circle", (r,))),
    st.builds(lambda w, h: Data("Shape", "rect", (w, h)), st.integers(), st.integers()),
    st.builds(lambda s, y, b: Data("Shape", "label", (s, y, b)), st.text(max_size=5), syms, st.booleans()),
)

VALUES = {
    "Int": st.integers(),
    "Bool": st.booleans(),
    "String": st.text(max_size=8),
    "Sym": syms,
    "Peano": peano_values(),
    "Tree": tree_values(),
    "Shape": shape_values,
    "List Int": st.lists(st.integers(), max_size=MAX_DEPTH),
    "List Peano": st.lists(peano_values(3), max_size=MAX_DEPTH),
    "List (List Bool)": st.lists(st.lists(st.booleans(), max_size=3), max_size=3),
}


@pytest.mark.parametrize("tag", sorted(VALUES))
def test_round_trip(tag):
    @settings(max_examples=1000, deadline=None)
    @given(VALUES[tag])
    def check(v):
        assert project(inject(v, REG, tag), pmap(), REG) == v

    check()


@pytest.mark.parametrize("tag", ["Peano", "Tree", "List Int"])
def test_inject_is_injective(tag):
    @settings(max_examples=200, deadline=None)
    @given(VALUES[tag], VALUES[tag])
    def check(v, w):
        if v != w:
            assert not term_eq(inject(v, REG, tag), inject(w, REG, tag))

    check()


def test_register_and_duplicates():
    r = TypeRegistry().register(PEANO)
    assert "Peano" in r
    with pytest.raises(DuplicateTag):
        r.register(PEANO)
    with pytest.raises(DuplicateTag):
        r.register(TypeDesc("Int", (("i", ()),)))


def test_finalize_rejects_unknown_field():
    r = TypeRegistry().register(TypeDesc("T", (("t", ("Missing",)),)))
    with pytest.raises(UnknownFieldTag):
        r.finalize()


def test_forward_reference_allowed_until_finalize():
    r = TypeRegistry().register(TypeDesc("A", (("a", ("B",)),)))
    r = r.register(TypeDesc("B", (("b", ()),))).finalize()
    assert r.arity("A", "a") == 1


def test_duplicate_ctor_in_desc():
    with pytest.raises(ValueError):
        TypeDesc("T", (("t", ()), ("t", ("Int",))))


def test_inject_examples():
    two = Data("Peano", "s", (Data("Peano", "s", (Data("Peano", "z"),)),))
    z = Ctor("z", "Peano", ())
    assert inject(two, REG) == Ctor("s", "Peano", (Ctor("s", "Peano", (z,)),))
    assert inject([1, 2], REG) == cons(1, cons(2, NIL))
    assert inject(42, REG) == atom(42)


def test_inject_rejects_nonconformant():
    with pytest.raises(NonConformant):
        inject(Data("Peano", "s", ()), REG)
    with pytest.raises(NonConformant):
        inject(Data("Peano", "succ", (Data("Peano", "z"),)), REG)
    with pytest.raises(NonConformant):
        inject("x", REG, "Int")


def test_project_partial_and_unknown():
    r = Var(7, "List Int")
    assert project(cons(1, r), pmap(), REG) == Partial(cons(1, r))
    with pytest.raises(UnknownCtor):
        project(Ctor("bogus", "Peano", ()), pmap(), REG)


def test_project_follows_substitution():
    r = Var(0, "List Int")
    assert project(cons(1, r), pmap({0: cons(2, NIL)}), REG) == [1, 2]


def test_skeleton():
    st0 = State(next_var=4)
    t, st1 = skeleton("Peano", "s", st0, REG)
    assert t == Ctor("s", "Peano", (Var(4, "Peano"),)) and st1.next_var == 5
    t, st1 = skeleton("Peano", "z", st0, REG)
    assert t == Ctor("z", "Peano", ()) and st1.next_var == 4
    t, st1 = skeleton("List Int", "cons", st0, REG)
    assert t == Ctor("cons", "List Int", (Var(4, "Int"), Var(5, "List Int"))) and st1.next_var == 6
    with pytest.raises(UnknownCtor):
        skeleton("Peano", "cons", st0, REG)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(["Tree", "Shape", "Peano"]).flatmap(lambda tag: st.tuples(st.just(tag), VALUES[tag])))
def test_skeleton_binds_every_field(tagged):
    tag, v = tagged
    value = inject(v, REG, tag)
    t, st1 = skeleton(tag, value.name, State(), REG)
    s, ext = unify(t, value, pmap())
    assert len(ext) == len(value.args)
