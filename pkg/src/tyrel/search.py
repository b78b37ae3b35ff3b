"""Goals, lazy answer streams, interleaving search and the run interface.

A goal is a function ``State -> Stream``.  A stream is ``None`` (empty), a
``Mature`` node holding an answer state, or an ``Immature`` node wrapping a
suspended computation.  Recursive relations must put their self-calls behind
``delay`` or goal construction never returns.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

from .constraints import add_diseq, revalidate_why
from .reify import Answer, render, reify, show
from .term import Var, as_term, normalize_tag
from .trace import TraceSink, TraceTree
from .unify import EMPTY_SUBST, LogicTypeError, Substitution, unify_pairs

INTERLEAVING = "interleaving"
DEPTH_FIRST = "depth_first"
STRATEGIES = (INTERLEAVING, DEPTH_FIRST)


@dataclass(frozen=True)
class EngineConfig:
    occurs_check: bool = True
    strategy: str = INTERLEAVING
    fuel: Optional[int] = None
    trace_enabled: bool = False
    trace_max_depth: Optional[int] = None
    trace_max_nodes: Optional[int] = 100_000

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.fuel is not None and self.fuel <= 0:
            raise ValueError("fuel must be positive")


@dataclass(frozen=True)
class RunContext:
    cfg: EngineConfig = EngineConfig()
    sink: Optional[TraceSink] = None

    @property
    def tracing(self) -> bool:
        return self.sink is not None and self.sink.enabled


@dataclass(frozen=True, slots=True)
class State:
    subst: Substitution = EMPTY_SUBST
    store: tuple = ()
    next_var: int = 0
    ctx: RunContext = field(default=RunContext(), compare=False)
    trace_parent: Optional[int] = field(default=None, compare=False)


# -- streams -----------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Mature:
    head: State
    rest: "Stream"


@dataclass(frozen=True, slots=True)
class Immature:
    resume: Callable[[], "Stream"]


Stream = Union[None, Mature, Immature]
Goal = Callable[[State], Stream]


def mplus(s1: Stream, s2: Stream, strategy: str = INTERLEAVING) -> Stream:
    if s1 is None:
        return s2
    if strategy == INTERLEAVING:
        if isinstance(s1, Mature):
            return Mature(s1.head, mplus(s2, s1.rest, strategy))
        return Immature(lambda: mplus(s2, s1.resume(), strategy))
    if isinstance(s1, Mature):
        return Mature(s1.head, mplus(s1.rest, s2, strategy))
    return Immature(lambda: mplus(s1.resume(), s2, strategy))


def mplus_all(streams: Sequence[Stream], strategy: str = INTERLEAVING) -> Stream:
    """Merge k streams.  Interleaving rotates through them round-robin, so each
    gets an equal share; with two streams this is exactly ``mplus``."""
    live = tuple(s for s in streams if s is not None)
    if not live:
        return None
    if len(live) == 1:
        return live[0]
    if strategy != INTERLEAVING:
        out = live[-1]
        for s in reversed(live[:-1]):
            out = mplus(s, out, strategy)
        return out
    first, others = live[0], live[1:]
    if isinstance(first, Mature):
        return Mature(first.head, mplus_all(others + (first.rest,), strategy))
    return Immature(lambda: mplus_all(others + (first.resume(),), strategy))


def bind(s: Stream, g: Goal, strategy: str = INTERLEAVING) -> Stream:
    if s is None:
        return None
    if isinstance(s, Mature):
        return mplus(g(s.head), bind(s.rest, g, strategy), strategy)
    return Immature(lambda: bind(s.resume(), g, strategy))


@dataclass(frozen=True, slots=True)
class PullResult:
    answer: Optional[State]
    rest: Stream
    steps_used: int
    exhausted: bool = False


def pull(s: Stream, fuel: Optional[int] = None) -> PullResult:
    """Force ``s`` until an answer or the end appears, at most ``fuel`` times.

    On exhaustion the partially forced stream is returned so the caller can
    resume from it.
    """
    steps = 0
    while isinstance(s, Immature):
        if fuel is not None and steps >= fuel:
            return PullResult(None, s, steps, exhausted=True)
        s = s.resume()
        steps += 1
    if s is None:
        return PullResult(None, None, steps)
    return PullResult(s.head, s.rest, steps)


def take(s: Stream, n: Optional[int] = None) -> list[State]:
    out = []
    while n is None or len(out) < n:
        r = pull(s)
        if r.answer is None:
            break
        out.append(r.answer)
        s = r.rest
    return out


# -- goals -------------------------------------------------------------------

def succeed(st: State) -> Stream:
    return Mature(st, None)


def fail(st: State) -> Stream:
    return None


def record_event(st: State, kind: str, label: str, detail: str = "") -> Optional[int]:
    return st.ctx.sink.record(st.trace_parent, kind, label, detail)


def _show_ext(ext) -> str:
    if not ext:
        return "already equal"
    return ", ".join(f"{show(v)} := {show(t)}" for v, t in ext)


def _type_error(st: State, err: LogicTypeError, label: str) -> LogicTypeError:
    if st.ctx.tracing:
        node = record_event(st, "failure", label, f"type error: {err}")
        err.trace_path = st.ctx.sink.path(node)
    return err


def eq(a, b) -> Goal:
    """Unify ``a`` and ``b``, then recheck the disequality store."""
    a, b = as_term(a), as_term(b)

    def goal(st: State) -> Stream:
        ctx = st.ctx
        try:
            s, ext, why = unify_pairs([(a, b)], st.subst, ctx.cfg.occurs_check)
        except LogicTypeError as err:
            raise _type_error(st, err, "==") from None
        if s is None:
            if ctx.tracing:
                record_event(st, "failure", "==", f"{show(a)} vs {show(b)}: {why}")
            return None
        store = st.store
        if ext and store:
            store, violated = revalidate_why(store, s, ctx.cfg.occurs_check)
            if store is None:
                if ctx.tracing:
                    lhs = " ".join(show(v) for v, _ in violated.alternatives)
                    rhs = " ".join(show(t) for _, t in violated.alternatives)
                    record_event(st, "failure", "==", f"{_show_ext(ext)} violates ({lhs} =/= {rhs})")
                return None
        parent = st.trace_parent
        if ctx.tracing:
            parent = record_event(st, "unify", "==", _show_ext(ext))
        return Mature(State(s, store, st.next_var, ctx, parent), None)

    return goal


def neq(a, b) -> Goal:
    """Constrain ``a`` and ``b`` never to become equal."""
    a, b = as_term(a), as_term(b)

    def goal(st: State) -> Stream:
        ctx = st.ctx
        try:
            store = add_diseq(a, b, st.subst, st.store, ctx.cfg.occurs_check)
        except LogicTypeError as err:
            raise _type_error(st, err, "=/=") from None
        if store is None:
            if ctx.tracing:
                record_event(st, "failure", "=/=", f"{show(a)} and {show(b)} are already equal")
            return None
        parent = st.trace_parent
        if ctx.tracing:
            detail = f"{show(a)} =/= {show(b)}"
            if store is st.store:
                detail += " (always true)"
            parent = record_event(st, "diseq", "=/=", detail)
        return Mature(replace(st, store=store, trace_parent=parent), None)

    return goal


def fresh(tags: Union[str, None, Sequence[Optional[str]]], body: Callable[..., Goal]) -> Goal:
    """Allocate one variable per tag and pass them to ``body``.

    ``tags`` is a single tag or a sequence of tags; ``None`` means untyped.
    """
    tag_list = [tags] if tags is None or isinstance(tags, str) else list(tags)
    tag_list = [None if t is None else normalize_tag(t) for t in tag_list]

    def goal(st: State) -> Stream:
        n = st.next_var
        vs = [Var(n + i, t) for i, t in enumerate(tag_list)]
        return body(*vs)(replace(st, next_var=n + len(vs)))

    return goal


def conj(*goals: Goal) -> Goal:
    if not goals:
        return succeed
    if len(goals) == 1:
        return goals[0]
    first, rest = goals[0], conj(*goals[1:])

    def goal(st: State) -> Stream:
        return bind(first(st), rest, st.ctx.cfg.strategy)

    return goal


def disj(*goals: Goal) -> Goal:
    if not goals:
        return fail

    def goal(st: State) -> Stream:
        ctx = st.ctx
        streams = []
        for i, g in enumerate(goals):
            branch = st
            if ctx.tracing:
                branch = replace(st, trace_parent=record_event(st, "branch", str(i), f"{i + 1} of {len(goals)}"))
            streams.append(g(branch))
        return mplus_all(streams, ctx.cfg.strategy)

    return goal


def conde(*clauses: Sequence[Goal]) -> Goal:
    return disj(*(conj(*c) for c in clauses))


def delay(make_goal: Callable[[], Goal], label: str = "") -> Goal:
    """Suspend a goal: ``make_goal`` is not called until the stream is pulled."""

    def goal(st: State) -> Stream:
        ctx = st.ctx
        node = record_event(st, "delay", label) if ctx.tracing else st.trace_parent

        def resume() -> Stream:
            inner = st
            if ctx.tracing:
                inner = replace(st, trace_parent=ctx.sink.record(node, "force", label))
            return make_goal()(inner)

        return Immature(resume)

    return goal


def relation(fn: Callable[..., Goal]) -> Callable[..., Goal]:
    """Name a goal-building function so its activations show up in traces.

    The body is built when the goal is applied to a state, not when the
    relation is called.
    """
    name = fn.__name__

    @functools.wraps(fn)
    def build(*args) -> Goal:
        args = tuple(as_term(a) for a in args)

        def goal(st: State) -> Stream:
            if st.ctx.tracing:
                st = replace(st, trace_parent=record_event(st, "goal", name, " ".join(show(a) for a in args)))
            return fn(*args)(st)

        return goal

    return build


# -- running -----------------------------------------------------------------

class FuelExhausted(Exception):
    def __init__(self, steps: int, answers: Optional[list] = None, trace: Optional[TraceTree] = None):
        super().__init__(f"fuel exhausted after {steps} steps")
        self.steps = steps
        self.answers = answers or []
        self.trace = trace


ALL = None


def _normalize_n(n) -> Optional[int]:
    if n is None or n in ("all", "*"):
        return None
    if not isinstance(n, int) or n <= 0:
        raise ValueError("n must be a positive integer or 'all'")
    return n


class Query:
    """A started query whose answers are pulled on demand.

    ``goal_fn`` receives one fresh variable per query variable and returns
    the goal to solve.
    """

    def __init__(self, query_vars: Sequence[tuple[str, Optional[str]]], goal_fn: Callable[..., Goal],
                 cfg: Optional[EngineConfig] = None, sink: Optional[TraceSink] = None):
        self.cfg = cfg or EngineConfig()
        if sink is None:
            sink = TraceSink(self.cfg.trace_enabled, self.cfg.trace_max_depth, self.cfg.trace_max_nodes)
        self.sink = sink
        ctx = RunContext(self.cfg, sink)
        self.vars = [(name, Var(i, None if tag is None else normalize_tag(tag)))
                     for i, (name, tag) in enumerate(query_vars)]
        self.initial = State(next_var=len(self.vars), ctx=ctx)
        self._goal = goal_fn(*(v for _, v in self.vars))
        self._stream: Stream = None
        self._started = False
        self.done = False
        self.pulls = 0
        self.forcings = 0
        self.answers: list[Answer] = []

    def next(self) -> Optional[Answer]:
        """The next answer, or ``None`` when there are no more.

        Raises ``FuelExhausted`` if the configured fuel runs out; calling
        ``next`` again resumes where the search stopped.
        """
        if self.done:
            return None
        if not self._started:
            self._started = True
            self._stream = self._goal(self.initial)
        self.pulls += 1
        r = pull(self._stream, self.cfg.fuel)
        self.forcings += r.steps_used
        self._stream = r.rest
        if r.exhausted:
            raise FuelExhausted(r.steps_used, list(self.answers), self.sink.tree())
        if r.answer is None:
            self.done = True
            return None
        ans = reify(r.answer, self.vars)
        if self.sink.enabled:
            self.sink.record(r.answer.trace_parent, "success", "answer", render(ans).replace("\n", "; "))
        self.answers.append(ans)
        return ans

    def trace(self) -> TraceTree:
        return self.sink.tree()


def run(n, query_vars: Sequence[tuple[str, Optional[str]]], goal_fn: Callable[..., Goal],
        cfg: Optional[EngineConfig] = None, sink: Optional[TraceSink] = None) -> tuple[list[Answer], TraceTree]:
    """Solve for up to ``n`` answers (``None``/``"all"`` for every answer).

    ``LogicTypeError`` and ``FuelExhausted`` carry the trace so far in their
    ``trace`` attribute; ``FuelExhausted`` also carries the answers found.
    """
    n = _normalize_n(n)
    q = Query(query_vars, goal_fn, cfg, sink)
    try:
        while n is None or len(q.answers) < n:
            if q.next() is None:
                break
    except LogicTypeError as err:
        err.trace = q.trace()
        raise
    return q.answers, q.trace()


def run_states(n, g: Goal, st: Optional[State] = None) -> list[State]:
    """Raw final states of ``g`` (no reification); handy for embedding and tests."""
    return take(g(st or State()), _normalize_n(n))
