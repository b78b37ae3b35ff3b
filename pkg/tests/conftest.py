from pathlib import Path

import pytest
from hypothesis import strategies as st

from tyrel.term import Ctor, Var, atom

ROOT = Path(__file__).resolve().parents[1]
DEMOS = ROOT / "demos"
GOLDENS = Path(__file__).resolve().parent / "goldens"

# Small untyped terms over a handful of variables, for unifier properties.
small_atoms = st.integers(0, 2).map(atom)
small_vars = st.integers(0, 3).map(Var)


def _ctor(children):
    return st.builds(lambda name, args: Ctor(name, None, tuple(args)),
                     st.sampled_from(["f", "g"]), st.lists(children, min_size=1, max_size=2))


small_terms = st.recursive(small_atoms | small_vars, _ctor, max_leaves=6)
ground_terms = st.recursive(small_atoms, _ctor, max_leaves=6)


@pytest.fixture
def demos():
    return DEMOS


@pytest.fixture
def goldens():
    return GOLDENS
