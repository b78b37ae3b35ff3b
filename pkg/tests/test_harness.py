import csv
import io

import pytest

from tyrel.harness import (COLUMNS, BenchCase, BenchReport, bit_lists, default_cases, emit_report, run_case,
                           run_suite, show_list)
from tyrel.search import DEPTH_FIRST, INTERLEAVING, eq
from tyrel.term import atom


@pytest.fixture(scope="module")
def report():
    return run_suite(default_cases())


def test_empty_report_is_header_only():
    assert emit_report(BenchReport()) == (",".join(COLUMNS) + "\n").encode()


def test_markdown_report(report):
    text = emit_report(report, "markdown").decode()
    lines = text.splitlines()
    assert lines[0] == "| " + " | ".join(COLUMNS) + " |"
    assert len(lines) == 2 + len(report.rows)


def test_unknown_format(report):
    with pytest.raises(ValueError):
        emit_report(report, "xml")


def test_rows_cover_every_case_and_strategy(report):
    names = sorted(c.name for c in default_cases())
    assert [(r.case, r.strategy) for r in report.rows] == [(n, s) for n in names
                                                           for s in (INTERLEAVING, DEPTH_FIRST)]


@pytest.mark.parametrize("name", ["appendo-ground-matrix", "membero-ground-matrix", "pluso-ground-matrix",
                                  "appendo-splits", "surface-appendo-splits", "membero-duplicates",
                                  "lengtho-singleton"])
def test_finite_cases_match_under_both_strategies(report, name):
    a, b = report.row(name, INTERLEAVING), report.row(name, DEPTH_FIRST)
    assert a.oracle_match is True and b.oracle_match is True
    assert sorted(a.rendered) == sorted(b.rendered)


def test_appendo_split_orders(report):
    expected = [f"a = {show_list((1, 2, 3)[:i])}\nb = {show_list((1, 2, 3)[i:])}" for i in range(4)]
    # only one disjunct survives each step with a ground third argument, so the
    # swap rule never gets a second live stream to alternate with
    assert report.row("appendo-splits", INTERLEAVING).rendered == expected
    assert report.row("appendo-splits", DEPTH_FIRST).rendered == expected


def test_fairness_rows(report):
    fair = report.row("fairness-nevero-vs-done", INTERLEAVING)
    unfair = report.row("fairness-nevero-vs-done", DEPTH_FIRST)
    assert fair.oracle_match is True and fair.forcings <= 50
    assert unfair.oracle_match is False and "fuel exhausted" in unfair.error
    assert report.row("fairness-infinite-vs-done", INTERLEAVING).oracle_match is True
    assert report.row("fairness-infinite-vs-done", DEPTH_FIRST).oracle_match is False


def test_metrics_are_deterministic(report):
    again = run_suite(default_cases())

    def strip(r):
        rows = list(csv.reader(io.StringIO(emit_report(r).decode())))
        return [row[:-1] for row in rows]

    assert strip(report) == strip(again)


def test_oracle_sizes():
    lists = bit_lists(3)
    assert len(lists) == 15
    cases = {c.name: c for c in default_cases()}
    assert len(cases["appendo-ground-matrix"].oracle) == sum(1 for a in lists for b in lists if len(a + b) <= 3)
    assert len(cases["pluso-ground-matrix"].oracle) == 36


def test_run_case_reports_mismatch():
    case = BenchCase("wrong", [("q", "Int")], lambda q: eq(q, atom(1)), oracle=["q = 2"])
    row = run_case(case, INTERLEAVING)
    assert row.oracle_match is False and row.answers == 1


def test_run_case_catches_errors():
    case = BenchCase("boom", [("q", "Int")], lambda q: eq(q, atom("x")), oracle=["q = 1"])
    row = run_case(case, INTERLEAVING)
    assert row.oracle_match is False and "LogicTypeError" in row.error


def test_budgets_override_fuel():
    report = run_suite([c for c in default_cases() if c.name == "fairness-nevero-vs-done"],
                       budgets={"fairness-nevero-vs-done": 10})
    assert "after 10 steps" in report.row("fairness-nevero-vs-done", DEPTH_FIRST).error
