import itertools

from hypothesis import given, settings
from hypothesis import strategies as st
from pyrsistent import pmap

from conftest import ground_terms, small_terms
from tyrel.constraints import Diseq, add_diseq, residual_constraints, revalidate
from tyrel.search import conj, eq, neq, run_states
from tyrel.term import Ctor, Var, atom
from tyrel.unify import unify

x, y, q = Var(0), Var(1), Var(2)
DOMAIN = (1, 2, 3)


def pair(a, b):
    return Ctor("pair", None, (a, b))


def assign(values: dict):
    return pmap({k: atom(v) for k, v in values.items()})


def allowed(store, var_ids):
    """Finite-domain oracle: assignments over DOMAIN that keep ``store`` alive."""
    out = set()
    for vals in itertools.product(DOMAIN, repeat=len(var_ids)):
        if revalidate(store, assign(dict(zip(var_ids, vals)))) is not None:
            out.add(vals)
    return out


def test_add_diseq_trivial_cases():
    assert add_diseq(atom(5), atom(6), pmap(), ()) == ()
    assert add_diseq(atom(5), atom(5), pmap(), ()) is None
    assert add_diseq(x, atom(5), pmap(), ()) == (Diseq(((x, atom(5)),)),)


def test_add_diseq_pair_matches_oracle():
    store = add_diseq(pair(x, y), pair(atom(1), atom(2)), pmap(), ())
    assert len(store) == 1
    expected = {v for v in itertools.product(DOMAIN, repeat=2) if v != (1, 2)}
    assert allowed(store, [0, 1]) == expected


def test_revalidate_examples():
    store = (Diseq(((x, atom(5)),)),)
    assert revalidate(store, assign({0: 5})) is None
    assert revalidate(store, assign({0: 6})) == ()


def test_revalidate_shrinks_to_remaining_alternative():
    store = add_diseq(pair(x, y), pair(atom(1), atom(2)), pmap(), ())
    s = assign({0: 1})
    out = revalidate(store, s)
    assert out == (Diseq(((y, atom(2)),)),)
    # the shrunk store admits exactly what the oracle admits for y once x = 1
    expected = {(1, b) for b in DOMAIN if (1, b) != (1, 2)}
    got = {(1, b) for b in DOMAIN if revalidate(out, s.set(1, atom(b))) is not None}
    assert got == expected


def test_residual_constraints_relevance():
    store = (Diseq(((q, atom(5)),)),)
    assert residual_constraints(store, pmap(), {2}) == [((q,), (atom(5),))]
    assert residual_constraints((Diseq(((x, atom(5)),)),), pmap(), {2}) == []


def test_residual_pair_is_simultaneous():
    store = add_diseq(pair(x, y), pair(atom(1), atom(2)), pmap(), ())
    [(lhs, rhs)] = residual_constraints(store, pmap(), {0, 1})
    assert lhs == (x, y) and rhs == (atom(1), atom(2))
    # as a single simultaneous constraint: violated only by x=1 and y=2 together
    bad = {v for v in itertools.product(DOMAIN, repeat=2) if tuple(map(atom, v)) == rhs}
    assert bad == {(1, 2)}


def test_failure_is_order_independent():
    for lhs, rhs in [(q, atom(5)), (pair(q, x), pair(atom(1), atom(2))), (x, y)]:
        assert run_states(None, conj(eq(lhs, rhs), neq(lhs, rhs))) == []
        assert run_states(None, conj(neq(lhs, rhs), eq(lhs, rhs))) == []


@settings(max_examples=200)
@given(small_terms, small_terms, st.lists(st.tuples(small_terms, small_terms), max_size=3))
def test_dropping_is_conservative(a, b, later):
    """A constraint dropped as unsatisfiable-to-violate stays that way."""
    s = pmap()
    store = add_diseq(a, b, s, ())
    if store != ():
        return
    for u, v in later:
        res = unify(u, v, s)
        if res is None:
            break
        s = res[0]
        assert unify(a, b, s) is None


@settings(max_examples=200)
@given(ground_terms, ground_terms)
def test_ground_diseq_agrees_with_equality(a, b):
    store = add_diseq(a, b, pmap(), ())
    assert (store is None) == (a == b)
    if store is not None:
        assert store == ()
