"""Typed relational programming: unification, interleaving search, delayed
goals, disequality constraints and structured search traces."""

from .constraints import Diseq, add_diseq, residual_constraints, revalidate
from .generics import Data, Partial, TypeDesc, TypeRegistry, inject, project, register_type, skeleton
from .reify import Answer, Reified, reify, render, show
from .search import (ALL, DEPTH_FIRST, INTERLEAVING, EngineConfig, FuelExhausted, Query, State, bind, conde,
                     conj, delay, disj, eq, fail, fresh, mplus, neq, pull, relation, run, succeed)
from .term import NIL, Atom, Ctor, Sym, Var, atom, cons, from_list, make_ctor, sym, term_eq, vars_of
from .trace import TraceNode, TraceSink, TraceTree, export_dot, export_json, prune, render_text
from .unify import CyclicTerm, LogicTypeError, deep_walk, occurs, unify, walk

__version__ = "0.1.0"

__all__ = [
    "Diseq",
    "add_diseq",
    "residual_constraints",
    "revalidate",
    "Data",
    "Partial",
    "TypeDesc",
    "TypeRegistry",
    "inject",
    "project",
    "register_type",
    "skeleton",
    "Answer",
    "Reified",
    "reify",
    "render",
    "show",
    "ALL",
    "DEPTH_FIRST",
    "INTERLEAVING",
    "EngineConfig",
    "FuelExhausted",
    "Query",
    "State",
    "bind",
    "conde",
    "conj",
    "delay",
    "disj",
    "eq",
    "fail",
    "fresh",
    "mplus",
    "neq",
    "pull",
    "relation",
    "run",
    "succeed",
    "NIL",
    "Atom",
    "Ctor",
    "Sym",
    "Var",
    "atom",
    "cons",
    "from_list",
    "make_ctor",
    "sym",
    "term_eq",
    "vars_of",
    "TraceNode",
    "TraceSink",
    "TraceTree",
    "export_dot",
    "export_json",
    "prune",
    "render_text",
    "CyclicTerm",
    "LogicTypeError",
    "deep_walk",
    "occurs",
    "unify",
    "walk",
]
