from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hhmeans.errors import DomainError, FnSyntaxError, UnknownFunction
from hhmeans.fnspec import (
    Node,
    convexity_probe,
    eval_fnspec,
    fn_from_text,
    natural_domain,
    parse_fnspec,
    to_text,
)
from hhmeans.functions import Interval


def ev(src, x):
    return eval_fnspec(parse_fnspec(src), x)


def test_basic_trees():
    assert parse_fnspec("exp(x)") == Node("exp", (Node("var"),))
    assert parse_fnspec("-log(x)") == Node("neg", (Node("log", (Node("var"),)),))


@pytest.mark.parametrize(
    "src, x, expected",
    [
        ("x", 5.0, 5.0),
        ("exp(x)", 1.0, math.e),
        ("2^x", 3.0, 8.0),
        ("2^x^0.5", 4.0, 4.0),
        ("3^x", 0.4, 3 ** 0.4),
        ("-x^2", 3.0, -9.0),
        ("2^-x", 1.0, 0.5),
        ("1-2-3", 0.0, -4.0),
        ("8/4/2", 0.0, 1.0),
        ("2*-x", 3.0, -6.0),
        ("abs(x-1)", -2.0, 3.0),
        ("sqrt(x)*.5e1", 4.0, 10.0),
    ],
)
def test_evaluation(src, x, expected):
    assert ev(src, x) == pytest.approx(expected, rel=1e-15)


def test_vectorised_evaluation():
    x = np.linspace(0.5, 2.0, 7)
    assert np.allclose(ev("x*log(x)", x), x * np.log(x))
    assert ev("3", x).shape == x.shape


@pytest.mark.parametrize(
    "src, pos",
    [("", 0), ("x+", 2), ("(x", 2), ("x)", 1), ("2 x", 2), ("exp x", 4), ("x $ 1", 2), ("1e999", 0)],
)
def test_syntax_errors_carry_positions(src, pos):
    with pytest.raises(FnSyntaxError) as info:
        parse_fnspec(src)
    assert info.value.position == pos


def test_unknown_function_and_name():
    with pytest.raises(UnknownFunction) as info:
        parse_fnspec("sin(x)")
    assert info.value.name == "sin" and "exp" in info.value.expected
    with pytest.raises(FnSyntaxError):
        parse_fnspec("y + 1")


def test_deep_nesting_is_rejected_not_crashing():
    with pytest.raises(FnSyntaxError):
        parse_fnspec("(" * 5000 + "x" + ")" * 5000)
    with pytest.raises(FnSyntaxError):
        parse_fnspec("-" * 5000 + "x")
    assert ev("(" * 50 + "x" + ")" * 50, 2.0) == 2.0


def test_domain_errors_report_node_and_x():
    with pytest.raises(DomainError) as info:
        ev("log(x)", np.array([1.0, -1.0]))
    assert info.value.x == -1.0
    assert info.value.node.kind == "log"
    for src, x in [("1/(x-1)", 1.0), ("sqrt(x)", -1.0), ("x^0.5", -4.0), ("exp(x)", 1000.0), ("0^-1", 0.0)]:
        with pytest.raises(DomainError):
            ev(src, x)


def test_natural_domain():
    assert natural_domain(parse_fnspec("exp(x)")).interval == Interval()
    assert natural_domain(parse_fnspec("-log(x)")).interval == Interval(0.0, math.inf)
    dom = natural_domain(parse_fnspec("1/(x-1)"))
    assert dom.singularities == (1.0,)
    assert natural_domain(parse_fnspec("log(3-x)")).interval == Interval(-math.inf, 3.0)
    assert natural_domain(parse_fnspec("log(log(x))")).interval == Interval(1.0, math.inf)
    assert natural_domain(parse_fnspec("sqrt(x-2)+x^0.5")).interval == Interval(2.0, math.inf)
    assert natural_domain(parse_fnspec("log(-1)")).interval is None
    inexact = natural_domain(parse_fnspec("log(x^2-1)"))
    assert not inexact.exact


def test_convexity_probe():
    assert convexity_probe(parse_fnspec("exp(x)"), Interval(-5, 5), 10_000, 0).passed
    assert convexity_probe(parse_fnspec("-log(x)"), Interval(0.01, 100), 10_000, 0).passed
    res = convexity_probe(parse_fnspec("-(x^2)"), Interval(-1, 1), 10_000, 0)
    assert not res.passed
    x, y, z = res.witness
    assert -1 <= x < y < z <= 1 and res.worst > 0


def test_fn_from_text():
    f = fn_from_text("x*log(x)", Interval(0.5, 4.0))
    assert f(2.0) == pytest.approx(2 * math.log(2))
    with pytest.raises(DomainError):
        f(5.0)
    with pytest.raises(DomainError):
        fn_from_text("1/(x-1)")


CORPUS = [
    "x", "3", "-x", "--x", "x+1", "x-1", "1-x", "2*x", "x/3", "x^2", "x^3", "x^-1",
    "-x^2", "(-x)^2", "2^x", "2^-x", "2^x^0.5", "(2^x)^0.5", "exp(x)", "exp(-x)",
    "exp(x)^2", "log(x)", "-log(x)", "x*log(x)", "sqrt(x)", "abs(x)", "abs(x-1)+x",
    "1/x", "1/(x+6)", "x-(1-x)", "x-(1+x)", "(x-1)-(x+1)", "x/(2/x)", "x*(2*x)",
    "x/2*3", "x/(2*3)", "-(x+1)", "-(x*2)", "-(x/2)", "-exp(x)", "exp(x)+exp(-x)",
    "x^2+3*x-1", "(x+1)^2/(x^2+1)", "abs(x)^1.5", "exp(abs(x))", "log(1+x^2)",
    "sqrt(1+x^2)", "2.5e-1*x^4", "1e3/(x^2+1e3)", "x^2^0.5",
]


def test_corpus_size():
    assert len(CORPUS) == 50 and len(set(CORPUS)) == 50


@pytest.mark.parametrize("src", CORPUS)
def test_round_trip(src):
    ast = parse_fnspec(src)
    again = parse_fnspec(to_text(ast))
    assert again == ast
    xs = np.linspace(-3.0, 3.0, 100)
    for x in xs:
        try:
            want = eval_fnspec(ast, x)
        except DomainError:
            with pytest.raises(DomainError):
                eval_fnspec(again, x)
            continue
        assert eval_fnspec(again, x) == pytest.approx(want, rel=1e-12, abs=1e-12)


@settings(max_examples=500, deadline=None)
@given(st.text(alphabet="x0123456789.e+-*/^()explogsqrtab ", max_size=30))
def test_parser_total_on_token_soup(src):
    try:
        ast = parse_fnspec(src)
    except FnSyntaxError:
        return
    assert isinstance(ast, Node)
    assert parse_fnspec(to_text(ast)) == ast
