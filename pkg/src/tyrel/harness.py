"""Evaluation suite: oracle agreement, strategy comparison and search metrics."""

from __future__ import annotations

import csv
import io
import itertools
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .reify import render
from .search import DEPTH_FIRST, INTERLEAVING, EngineConfig, FuelExhausted, Goal, Query, conj, delay, disj, eq, relation
from .stdlib import appendo, lengtho, membero, peano, pluso
from .term import from_list, sym
from .trace import TraceSink

COLUMNS = ("case", "strategy", "answers", "oracle_match", "pulls", "forcings", "trace_nodes", "ms")


@dataclass
class BenchCase:
    """One query plus what we know about its answers.

    ``oracle`` holds rendered answers.  With ``mode="exact"`` the answers
    must equal it as a multiset; with ``"contains"`` (infinite answer sets)
    every oracle answer must show up among the first ``n``.
    """

    name: str
    query_vars: Sequence[tuple[str, str]]
    goal_fn: Callable[..., Goal]
    n: Optional[int] = None
    oracle: Optional[Sequence[str]] = None
    mode: str = "exact"
    fuel: int = 100_000

    @classmethod
    def from_surface(cls, name: str, text: str, oracle=None, mode: str = "exact", fuel: int = 100_000) -> "BenchCase":
        from .surface import load

        q = load(text).queries[-1]
        return cls(name, q.params, q.goal_fn, q.n, oracle, mode, fuel)


@dataclass
class BenchRow:
    case: str
    strategy: str
    answers: int
    oracle_match: Optional[bool]
    pulls: int
    forcings: int
    trace_nodes: int
    ms: float
    rendered: list = field(default_factory=list, repr=False)
    error: Optional[str] = None


@dataclass
class BenchReport:
    rows: list = field(default_factory=list)

    def row(self, case: str, strategy: str) -> BenchRow:
        for r in self.rows:
            if r.case == case and r.strategy == strategy:
                return r
        raise KeyError((case, strategy))


def _judge(case: BenchCase, rendered: list[str]) -> Optional[bool]:
    if case.oracle is None:
        return None
    if case.mode == "exact":
        return Counter(rendered) == Counter(case.oracle)
    return set(case.oracle) <= set(rendered)


def run_case(case: BenchCase, strategy: str, trace_max_nodes: int = 200_000) -> BenchRow:
    cfg = EngineConfig(strategy=strategy, fuel=case.fuel, trace_enabled=True, trace_max_nodes=trace_max_nodes)
    sink = TraceSink(True, None, trace_max_nodes)
    start = time.perf_counter()
    q = None
    error = None
    try:
        q = Query(case.query_vars, case.goal_fn, cfg, sink)
        while case.n is None or len(q.answers) < case.n:
            if q.next() is None:
                break
    except FuelExhausted as e:
        error = str(e)
    except Exception as e:  # one bad case must not sink the suite
        error = f"{type(e).__name__}: {e}"
    ms = (time.perf_counter() - start) * 1000
    rendered = [render(a) for a in q.answers] if q else []
    match = _judge(case, rendered)
    if error and case.mode == "exact" and match is not None:
        match = False
    return BenchRow(case.name, strategy, len(rendered), match, q.pulls if q else 0, q.forcings if q else 0,
                    len(sink.nodes), ms, rendered, error)


def run_suite(cases: Iterable[BenchCase], strategies: Sequence[str] = (INTERLEAVING, DEPTH_FIRST),
              budgets: Optional[dict] = None) -> BenchReport:
    """Run every case under every strategy; ``budgets`` maps case name to fuel."""
    report = BenchReport()
    for case in sorted(cases, key=lambda c: c.name):
        if budgets and case.name in budgets:
            case = BenchCase(case.name, case.query_vars, case.goal_fn, case.n, case.oracle, case.mode,
                             budgets[case.name])
        for strategy in strategies:
            report.rows.append(run_case(case, strategy))
    return report


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)


def emit_report(r: BenchReport, fmt: str = "csv") -> bytes:
    rows = [[_fmt(getattr(row, c)) for c in COLUMNS] for row in r.rows]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        w.writerows(rows)
        return buf.getvalue().encode("utf-8")
    if fmt == "markdown":
        lines = ["| " + " | ".join(COLUMNS) + " |", "|" + "---|" * len(COLUMNS)]
        lines += ["| " + " | ".join(row) + " |" for row in rows]
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")


# -- corpus ------------------------------------------------------------------

BITS = (0, 1)


def bit_lists(max_len: int = 3) -> list[tuple[int, ...]]:
    """Every list over {0, 1} of length <= max_len, shortest first."""
    return [t for n in range(max_len + 1) for t in itertools.product(BITS, repeat=n)]


def show_list(xs) -> str:
    return "(" + " ".join(map(str, xs)) + ")"


def show_peano(n: int) -> str:
    out = "z"
    for _ in range(n):
        out = f"(s {out})"
    return out


def one_of(x, terms) -> Goal:
    return disj(*(eq(x, t) for t in terms))


@relation
def repeato(x, value) -> Goal:
    """Infinitely many answers, all ``x = value``."""
    return disj(eq(x, value), delay(lambda: repeato(x, value), "repeato"))


@relation
def nevero() -> Goal:
    return delay(lambda: nevero(), "nevero")


def fair_goal(q) -> Goal:
    return disj(repeato(q, sym("again")), eq(q, sym("done")))


APPENDO_WLS = """\
(defrel (appendo (a (List Int)) (b (List Int)) (ab (List Int)))
  (conde
    ((== a '()) (== b ab))
    ((fresh ((h Int) (t (List Int)) (res (List Int)))
       (== a (cons h t))
       (== ab (cons h res))
       (appendo t b res)))))
"""


def default_cases() -> list[BenchCase]:
    lists = bit_lists(3)
    terms = [from_list(xs, "List Int") for xs in lists]
    split_target = (1, 2, 3)
    splits = [f"a = {show_list(split_target[:i])}\nb = {show_list(split_target[i:])}" for i in range(4)]
    cases = [
        BenchCase("appendo-splits", [("a", "List Int"), ("b", "List Int")],
                  lambda a, b: appendo(a, b, from_list(split_target, "List Int")), None, splits),
        BenchCase("appendo-ground-matrix", [("a", "List Int"), ("b", "List Int"), ("c", "List Int")],
                  lambda a, b, c: conj(one_of(a, terms), one_of(b, terms), one_of(c, terms), appendo(a, b, c)),
                  None,
                  [f"a = {show_list(x)}\nb = {show_list(y)}\nc = {show_list(z)}"
                   for x in lists for y in lists for z in lists if x + y == z]),
        BenchCase("membero-ground-matrix", [("x", "Int"), ("l", "List Int")],
                  lambda x, l: conj(one_of(x, BITS), one_of(l, terms), membero(x, l)), None,
                  [f"x = {b}\nl = {show_list(xs)}" for xs in lists for b in BITS for item in xs if item == b]),
        BenchCase("pluso-ground-matrix", [("a", "Peano"), ("b", "Peano"), ("c", "Peano")],
                  lambda a, b, c: conj(one_of(a, [peano(i) for i in range(6)]),
                                         one_of(b, [peano(i) for i in range(6)]),
                                         one_of(c, [peano(i) for i in range(11)]), pluso(a, b, c)), None,
                  [f"a = {show_peano(i)}\nb = {show_peano(j)}\nc = {show_peano(i + j)}"
                   for i in range(6) for j in range(6)]),
        BenchCase("membero-duplicates", [("q", "Int")], lambda q: membero(q, from_list([1, 2, 2], "List Int")),
                  None, ["q = 1", "q = 2", "q = 2"]),
        BenchCase("lengtho-singleton", [("l", "List Int")], lambda l: lengtho(l, peano(1)), 3, ["l = (_.0)"]),
        BenchCase("fairness-infinite-vs-done", [("q", "Sym")], fair_goal, 2, ["q = done"], "contains", 1000),
        BenchCase("fairness-nevero-vs-done", [("q", "Sym")], lambda q: disj(nevero(), eq(q, sym("done"))), 1,
                  ["q = done"], "contains", 1000),
        BenchCase.from_surface("surface-appendo-splits",
                               APPENDO_WLS + "(run * ((a (List Int)) (b (List Int))) (appendo a b '(1 2 3)))",
                               splits),
    ]
    return cases
