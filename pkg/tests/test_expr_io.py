import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schrosym.diffop import DiffOp, ExpPolyOp, commutator
from schrosym.exactnum import GQ, I, Poly
from schrosym.expr_io import (
    ParseError,
    format_json,
    format_operator,
    format_poly,
    operator_from_json,
    operator_to_json,
    parse_poly,
    poly_from_json,
    poly_to_json,
)
from strategies import diffops, polys


def x(n, a):
    return Poly.var(n, a)


def test_parse_examples():
    assert parse_poly("x1^2 + x2^2", 2) == x(2, 0) ** 2 + x(2, 1) ** 2
    assert parse_poly("1/2*x1^2", 1) == x(1, 0) ** 2 * (GQ(1) / 2)
    t = Poly.time(1)
    assert parse_poly("(x1+t)*(x1-t)", 1) == x(1, 0) ** 2 - t ** 2


def test_parse_misc():
    assert parse_poly("  -x1 ", 1) == -x(1, 0)
    assert parse_poly("i*i", 1) == Poly.const(1, -1)
    assert parse_poly("2^3*x1^0", 1) == Poly.const(1, 8)
    assert parse_poly("-1/2*x2 + (1 + 2*i)*t", 2) == x(2, 1) * (GQ(-1) / 2) + Poly.time(2) * GQ(1, 2)


@pytest.mark.parametrize(
    "src, n, pos",
    [
        ("x1 +", 1, 4),
        ("x3", 2, 0),
        ("x1^-2", 1, 3),
        ("x1^(1/2)", 1, 3),
        ("x1^1/2", 1, 4),
        ("1/x1", 1, 2),
        ("sin(x1)", 1, 0),
        ("x1 $ 2", 1, 3),
        ("(x1 + 1", 1, 7),
        ("1/0", 1, 2),
        ("", 1, 0),
        ("x0", 1, 0),
    ],
)
def test_parse_errors_carry_position(src, n, pos):
    with pytest.raises(ParseError) as err:
        parse_poly(src, n)
    assert err.value.pos == pos
    assert "^" in err.value.pointer()


def test_rational_function_diagnostic():
    with pytest.raises(ParseError, match="polynomial"):
        parse_poly("x1/(1 + x1^2)", 1)


def test_format_poly_examples():
    assert format_poly(Poly.zero(2)) == "0"
    p = parse_poly("x1^2 + 2*x1*x2 - 3/2*i*x2 + (1+2*i)*t", 2)
    assert format_poly(p) == "x1^2 + 2*x1*x2 - 3/2*i*x2 + (1 + 2*i)*t"


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: polys(n, max_exp=5, max_terms=6)))
def test_format_parse_roundtrip(p):
    assert parse_poly(format_poly(p), p.n) == p


def test_format_operator_examples():
    xp = DiffOp(1, {(1,): x(1, 0) * GQ(0, -2), (0,): -I})
    assert format_operator(xp) == "(-2*i*x1)*d1 + (-i)"
    assert format_operator(DiffOp.zero(2)) == "0"
    assert format_operator(ExpPolyOp(1, {})) == "0"
    # e^{it}(x + i p) with p = -i d expands to x + d
    r = ExpPolyOp.from_op(DiffOp.multiplication(x(1, 0)) + DiffOp.momentum(1, 0) * I, I)
    assert format_operator(r) == "exp(i*t)*((1)*d1 + (x1))"


def test_format_operator_with_dt():
    L = DiffOp.time_derivative(1, I) - DiffOp.partial(1, 0, 2) * (GQ(-1) / 2)
    assert format_operator(L) == "(i)*dt + (1/2)*d1^2"


def _parse_operator(text: str, n: int) -> DiffOp:
    # inverse of the DiffOp printer for the tests: "(c)*d1^2*d2 + (c)"
    op = DiffOp.zero(n)
    if text == "0":
        return op
    depth, start, parts = 0, 0, []
    for k, ch in enumerate(text):
        depth += ch == "("
        depth -= ch == ")"
        if depth == 0 and text.startswith(" + ", k):
            parts.append(text[start:k])
            start = k + 3
    parts.append(text[start:])
    for part in parts:
        close = part.rindex(")")
        coeff = parse_poly(part[1:close], n)
        alpha = [0] * n
        for tok in filter(None, part[close + 1:].split("*")):
            name, _, k = tok.partition("^")
            alpha[int(name[1:]) - 1] += int(k or 1)
        op = op + DiffOp(n, {tuple(alpha): coeff})
    return op


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: diffops(n, max_order=3, with_t=True)))
def test_operator_printing_is_injective(op):
    # the printed text determines the operator
    assert _parse_operator(format_operator(op), op.n) == op


def test_distinct_operators_print_differently():
    ops = [DiffOp.partial(2, 0), DiffOp.partial(2, 1), DiffOp.multiplication(x(2, 0)), DiffOp.partial(2, 0) * I]
    assert len({format_operator(o) for o in ops}) == len(ops)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: polys(n)))
def test_poly_json_roundtrip(p):
    data = json.loads(json.dumps(poly_to_json(p)))
    assert poly_from_json(data, p.n) == p


@settings(max_examples=60, deadline=None)
@given(diffops(2, with_t=True), diffops(2, with_t=True))
def test_operator_json_roundtrip(a, b):
    r = ExpPolyOp(2, {0: a, GQ(0, 2): b})
    data = json.loads(format_json(operator_to_json(r)))
    assert operator_from_json(data, 2) == r


def test_json_rationals_are_strings():
    data = operator_to_json(DiffOp.scalar(1, GQ(3)))
    coeff = data["branches"][0]["terms"][0]["coeff"][0]
    assert coeff == {"exps": [0], "t_exp": 0, "re": "3/1", "im": "0/1"}


def test_format_json_is_deterministic():
    h = commutator(DiffOp.partial(1, 0, 2), DiffOp.multiplication(x(1, 0) ** 3))
    a = format_json(operator_to_json(h))
    assert a == format_json(operator_to_json(h)) and a.endswith("\n")
