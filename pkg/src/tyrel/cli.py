"""Command line: batch runner, REPL and benchmark driver.

Exit codes for ``run``: 0 ok, 1 lex/parse/check error, 2 runtime error,
3 fuel exhausted.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import Optional, TextIO

from .generics import UnknownCtor
from .harness import default_cases, emit_report, run_suite
from .reify import render
from .search import DEPTH_FIRST, INTERLEAVING, EngineConfig, FuelExhausted, Query
from .surface import (CheckFailed, Defrel, ParseError, Program, SurfaceError, TypeDecl, check,
                      compile_program, parse_form, read)
from .trace import TraceSink, write_trace
from .unify import CyclicTerm, LogicTypeError

EXIT_OK, EXIT_STATIC, EXIT_RUNTIME, EXIT_FUEL = 0, 1, 2, 3

_STRATEGY_NAMES = {"interleave": INTERLEAVING, "interleaving": INTERLEAVING,
                   "dfs": DEPTH_FIRST, "depth_first": DEPTH_FIRST}


def _error_line(code: str, message: str, span=None) -> str:
    where = f" at {span}" if span is not None else ""
    return f"error: {code}: {message}{where}"


def _static_errors(exc: Exception) -> list[str]:
    if isinstance(exc, CheckFailed):
        return [_error_line(e.code, e.message, e.span) for e in exc.errors]
    return [_error_line(exc.code, exc.message, exc.span)]


def _runtime_error(exc: Exception) -> list[str]:
    code = "TypeError" if isinstance(exc, LogicTypeError) else type(exc).__name__
    lines = [_error_line(code, str(exc))]
    for step in getattr(exc, "trace_path", None) or []:
        lines.append(f"  in {step}")
    return lines


def _parse_forms(text: str) -> Program:
    return Program(tuple(parse_form(x) for x in read(text)))


def _engine_config(args) -> EngineConfig:
    return EngineConfig(
        occurs_check=not args.no_occurs_check,
        strategy=_STRATEGY_NAMES[args.strategy],
        fuel=args.fuel,
        trace_enabled=bool(getattr(args, "trace", None)),
        trace_max_depth=args.trace_max_depth,
        trace_max_nodes=args.trace_max_nodes,
    )


def cmd_run(args, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        with open(args.file, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        print(_error_line("IOError", str(e)), file=err)
        return EXIT_STATIC
    try:
        compiled = compile_program(check(_parse_forms(text)))
    except (SurfaceError, CheckFailed) as e:
        for line in _static_errors(e):
            print(line, file=err)
        return EXIT_STATIC

    cfg = _engine_config(args)
    sink = TraceSink(cfg.trace_enabled, cfg.trace_max_depth, cfg.trace_max_nodes)
    status = EXIT_OK
    for i, q in enumerate(compiled.queries):
        if i:
            print(file=out)
        print(f"?- {q.text}", file=out)
        n = args.answers if args.answers is not None else q.n
        query = Query(q.params, q.goal_fn, cfg, sink)
        try:
            while n is None or len(query.answers) < n:
                a = query.next()
                if a is None:
                    break
                print(render(a), file=out)
        except FuelExhausted as e:
            print(_error_line("FuelExhausted", str(e)), file=err)
            status = EXIT_FUEL
        except (LogicTypeError, CyclicTerm, UnknownCtor) as e:
            for line in _runtime_error(e):
                print(line, file=err)
            status = EXIT_RUNTIME
            break
        if not query.answers:
            print("no answers", file=out)
    out.flush()
    if args.trace:
        write_trace(sink.tree(), args.trace, args.trace_format)
    return status


class Repl:
    """Line-oriented session; feed it lines, it writes answers to ``out``."""

    def __init__(self, cfg: EngineConfig, out: Optional[TextIO] = None, err: Optional[TextIO] = None,
                 answers=None):
        self.cfg = cfg
        self.out, self.err = out or sys.stdout, err or sys.stderr
        self.answers = answers
        self.defs: list = []
        self.buffer = ""
        self.query: Optional[Query] = None
        self.finished = False

    def say(self, text: str) -> None:
        print(text, file=self.out)

    def feed(self, line: str) -> None:
        if not self.buffer and line.strip().startswith(","):
            self.directive(line.strip())
            return
        self.buffer += line if line.endswith("\n") else line + "\n"
        try:
            forms = read(self.buffer)
        except ParseError as e:
            if e.expected == frozenset({")"}) or "after quote" in e.message:
                return  # keep reading
            self.buffer = ""
            print(str(_static_errors(e)[0]), file=self.err)
            return
        except SurfaceError as e:
            self.buffer = ""
            print(_static_errors(e)[0], file=self.err)
            return
        self.buffer = ""
        for x in forms:
            try:
                self.form(parse_form(x))
            except SurfaceError as e:
                print(_static_errors(e)[0], file=self.err)

    def form(self, f) -> None:
        if isinstance(f, (TypeDecl, Defrel)):
            try:
                check(Program(tuple(self.defs) + (f,)))
            except CheckFailed as e:
                for line in _static_errors(e):
                    print(line, file=self.err)
                return
            self.defs.append(f)
            self.say(f"defined {f.tag if isinstance(f, TypeDecl) else f.name}")
            return
        try:
            compiled = compile_program(check(Program(tuple(self.defs) + (f,))))
        except CheckFailed as e:
            for line in _static_errors(e):
                print(line, file=self.err)
            return
        q = compiled.queries[0]
        self.query = Query(q.params, q.goal_fn, self.cfg)
        n = self.answers if self.answers is not None else q.n
        self.pull(n, empty="no answers")

    def pull(self, n: Optional[int], empty: str) -> None:
        q = self.query
        got = 0
        try:
            while n is None or got < n:
                a = q.next()
                if a is None:
                    break
                got += 1
                self.say(render(a))
        except FuelExhausted as e:
            self.say(f"{e} (,more to continue)")
            return
        except (LogicTypeError, CyclicTerm, UnknownCtor) as e:
            for line in _runtime_error(e):
                print(line, file=self.err)
            q.done = True
            return
        if got == 0:
            self.say(empty)

    def directive(self, line: str) -> None:
        parts = line.split()
        cmd, rest = parts[0], parts[1:]
        if cmd == ",quit":
            self.finished = True
        elif cmd == ",more":
            if self.query is None or self.query.done:
                self.say("no more answers")
            else:
                self.pull(1, empty="no more answers")
        elif cmd == ",trace" and rest in (["on"], ["off"]):
            self.cfg = replace(self.cfg, trace_enabled=rest[0] == "on")
            self.say(f"tracing {rest[0]}")
        elif cmd == ",trace" and len(rest) == 3 and rest[0] == "dump" and rest[2] in ("text", "json", "dot"):
            if self.query is None or not self.query.sink.enabled:
                self.say("no trace recorded")
            else:
                write_trace(self.query.trace(), rest[1], rest[2])
                self.say(f"trace written to {rest[1]}")
        elif cmd == ",strategy" and len(rest) == 1 and rest[0] in ("dfs", "interleave"):
            self.cfg = replace(self.cfg, strategy=_STRATEGY_NAMES[rest[0]])
            self.say(f"strategy {rest[0]}")
        else:
            print(f"error: unknown directive {line}", file=self.err)

    def run(self, stdin: TextIO, interactive: bool = False) -> int:
        while not self.finished:
            if interactive:
                self.out.write(".. " if self.buffer else "?- ")
                self.out.flush()
            line = stdin.readline()
            if not line:
                break
            self.feed(line)
        return EXIT_OK


def cmd_repl(args, stdin: Optional[TextIO] = None, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    stdin = stdin or sys.stdin
    cfg = _engine_config(args)
    repl = Repl(cfg, out, err, args.answers)
    if args.file:
        with open(args.file, encoding="utf-8") as f:
            for line in f:
                repl.feed(line)
    return repl.run(stdin, interactive=stdin.isatty())


def cmd_bench(args, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    report = run_suite(default_cases())
    data = emit_report(report, args.format)
    if args.out:
        with open(args.out, "wb") as f:
            f.write(data)
    else:
        out.write(data.decode("utf-8"))
    bad = [r for r in report.rows if r.oracle_match is False and r.strategy == INTERLEAVING]
    return EXIT_OK if not bad else EXIT_RUNTIME


def _engine_flags(p: argparse.ArgumentParser, trace_file: bool = True) -> None:
    p.add_argument("-n", "--answers", type=int, default=None, help="answers per query (overrides run counts)")
    p.add_argument("--strategy", choices=sorted(_STRATEGY_NAMES), default="interleave")
    p.add_argument("--no-occurs-check", action="store_true")
    p.add_argument("--fuel", type=int, default=None, help="max suspended steps forced per answer")
    if trace_file:
        p.add_argument("--trace", metavar="PATH", help="write the search trace here")
        p.add_argument("--trace-format", choices=("text", "json", "dot"), default=None)
    p.add_argument("--trace-max-nodes", type=int, default=100_000)
    p.add_argument("--trace-max-depth", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tyrel", description="typed relational programming")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run every query in a .wls file")
    p_run.add_argument("file")
    _engine_flags(p_run)
    p_repl = sub.add_parser("repl", help="interactive session")
    p_repl.add_argument("file", nargs="?", help="definitions to load first")
    _engine_flags(p_repl, trace_file=False)
    p_bench = sub.add_parser("bench", help="run the evaluation suite")
    p_bench.add_argument("--out", help="report path (default: stdout)")
    p_bench.add_argument("--format", choices=("csv", "markdown"), default="csv")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "fuel", None) is not None and args.fuel <= 0:
        print("error: --fuel must be positive", file=sys.stderr)
        return EXIT_STATIC
    if getattr(args, "answers", None) is not None and args.answers <= 0:
        print("error: --answers must be positive", file=sys.stderr)
        return EXIT_STATIC
    if args.command == "run":
        if args.trace_format and not args.trace:
            print("error: --trace-format needs --trace PATH", file=sys.stderr)
            return EXIT_STATIC
        args.trace_format = args.trace_format or "text"
        return cmd_run(args)
    if args.command == "repl":
        return cmd_repl(args)
    return cmd_bench(args)


if __name__ == "__main__":
    sys.exit(main())
