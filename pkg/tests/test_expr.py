import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhdkit.expr import (
    DomainError,
    NotSeparable,
    ParseError,
    compile_expr,
    const,
    differentiate,
    evaluate,
    extract_separable,
    parse,
    polynomial_coefficients,
    substitute,
    to_string,
    var,
)
from qhdkit.instances import _NONLINEAR

XY = ("x", "y")


def test_parse_constant_zero():
    e = parse("0", [])
    assert e.is_const and e.value == 0.0


def test_parse_instance_three():
    e = parse("y^1.5 - exp(4*x)*(y - 0.75)", XY)
    x, y = 0.3, 0.7
    assert evaluate(e, [x, y]) == pytest.approx(y**1.5 - math.exp(4 * x) * (y - 0.75), rel=1e-15)
    assert evaluate(e, [1.0, 1.0]) == pytest.approx(1 - 0.25 * math.exp(4), rel=1e-15)


def test_instance_one_value_at_corner():
    e = parse("-4*x^2 + 3*x*y - 2*y^2 + 3*x - y", XY)
    assert evaluate(e, [0.0, 1.0]) == -3.0


def test_qp_value_at_corner():
    e = parse("-x^2 + x*y - 1/2*y^2 + 3/4*x - 1/4*y", XY)
    assert evaluate(e, [0.0, 1.0]) == -0.75


def test_product_at_origin():
    assert evaluate(parse("x*y", XY), [0.0, 0.0]) == 0.0


@pytest.mark.parametrize(
    "text, expected",
    [("-x^2", -4.0), ("2^3", 8.0), ("x**2", 4.0), ("-(x)^2", -4.0), ("8/2/2", 2.0),
     ("2-3-4", -5.0), ("sqrt(x*8)", 4.0), ("log(exp(x))", 2.0), ("(x+1)^0.5", math.sqrt(3))],
)
def test_precedence(text, expected):
    assert evaluate(parse(text, ["x"]), [2.0]) == pytest.approx(expected)


@pytest.mark.parametrize("text", ["x +", "foo(x)", "z", "1.2.3", "x ^ y", "(x", "x)", "", "3 $ 4"])
def test_parse_errors_have_positions(text):
    with pytest.raises(ParseError) as info:
        parse(text, ["x", "y"])
    assert isinstance(info.value.position, int)
    assert 0 <= info.value.position <= len(text)


@given(st.text(alphabet="xy0123456789.+-*/^() expolgqrt", max_size=40))
def test_parser_is_total(text):
    try:
        parse(text, XY)
    except ParseError:
        pass
    except DomainError:
        pass  # constant folding such as log(0)


def test_deep_nesting_is_a_parse_error_not_a_crash():
    with pytest.raises(ParseError):
        parse("(" * 5000 + "x" + ")" * 5000, ["x"])


@pytest.mark.parametrize("text, point", [("log(x)", [0.0]), ("sqrt(x - 1)", [0.5]),
                                         ("x^1.5", [-1.0]), ("1/x", [0.0])])
def test_domain_errors_are_reported(text, point):
    with pytest.raises(DomainError):
        evaluate(parse(text, ["x"]), point)


def test_compiled_evaluator_returns_nonfinite_outside_domain():
    f = compile_expr(parse("log(x)", ["x"]))
    out = f(np.array([[0.0, 1.0]]))
    assert not np.isfinite(out[0]) and out[1] == 0.0


def test_constant_folding_is_canonical():
    e = parse("2*3 + x*(4-4) + exp(0)", ["x"])
    assert e.is_const and e.value == 7.0


def _no_constant_subtrees(e):
    if e.args:
        assert not all(a.is_const for a in e.args), to_string(e)
        for a in e.args:
            _no_constant_subtrees(a)


@pytest.mark.parametrize("iid", sorted(_NONLINEAR))
def test_builtin_trees_are_folded(iid):
    text, names, *_ = _NONLINEAR[iid]
    _no_constant_subtrees(parse(text, names))


def test_derivative_of_square():
    d = differentiate(parse("x^2", ["x"]), 0)
    assert polynomial_coefficients(d) == [0.0, 2.0]


def test_chain_rule_exp():
    e = parse("exp(4*x)*(y - 0.75)", XY)
    d = differentiate(e, 0)
    for x, y in [(0.1, 0.2), (0.9, 0.4)]:
        assert evaluate(d, [x, y]) == pytest.approx(4 * math.exp(4 * x) * (y - 0.75), rel=1e-14)


@pytest.mark.parametrize("iid", sorted(_NONLINEAR))
def test_gradient_matches_central_differences(iid, rng):
    text, names, *_ = _NONLINEAR[iid]
    e = parse(text, names)
    n = len(names)
    grads = [differentiate(e, i) for i in range(n)]
    step = 1e-6
    for _ in range(100):
        x = rng.uniform(0.05, 0.95, n)
        for i in range(n):
            xp, xm = x.copy(), x.copy()
            xp[i] += step
            xm[i] -= step
            fd = (evaluate(e, xp) - evaluate(e, xm)) / (2 * step)
            g = evaluate(grads[i], x)
            assert abs(g - fd) <= 1e-6 * max(1.0, abs(g))


def test_extract_qp():
    e = parse("-x^2 + x*y - 1/2*y^2 + 3/4*x - 1/4*y", XY)
    sep = extract_separable(e, 2)
    assert sep.m == 1
    assert [i for i, _ in sep.univariate] == [0, 1]
    assert polynomial_coefficients(sep.univariate[0][1]) == pytest.approx([0, 0.75, -1])
    k, l, p, q = sep.bivariate[0]
    assert (k, l) == (0, 1)
    assert evaluate(p, [2.0, 0]) * evaluate(q, [0, 3.0]) == pytest.approx(6.0)


def test_trivariate_monomial_rejected():
    with pytest.raises(NotSeparable):
        extract_separable(parse("x*y*z", ["x", "y", "z"]), 3)


def test_nonfactoring_pair_rejected():
    with pytest.raises(NotSeparable):
        extract_separable(parse("exp(x*y)", XY), 2)


def test_single_variable_square():
    sep = extract_separable(parse("x^2", ["x"]), 1)
    assert len(sep.univariate) == 1 and sep.m == 0


def test_univariate_terms_are_merged():
    sep = extract_separable(parse("x + y + x^2 + 3", XY), 2)
    assert len(sep.univariate) == 2
    assert sep.constant == 3.0


@pytest.mark.parametrize("iid", sorted(_NONLINEAR))
def test_separable_round_trip(iid, rng):
    text, names, *_ = _NONLINEAR[iid]
    e = parse(text, names)
    sep = extract_separable(e, len(names))
    back = sep.reassemble()
    X = rng.random((len(names), 1000))
    np.testing.assert_allclose(compile_expr(back)(X), compile_expr(e)(X), rtol=0, atol=1e-12)
    for _, g in sep.univariate:
        assert len(g.variables) == 1


def test_substitute_refolds():
    e = substitute(parse("x*y", XY), {0: const(2.0), 1: const(3.0)})
    assert e.is_const and e.value == 6.0


_leaves = st.one_of(
    st.integers(-5, 5).map(lambda v: const(float(v))),
    st.sampled_from([var(0), var(1)]),
)


def _grow(children):
    return st.one_of(
        st.tuples(children, children).map(lambda ab: ab[0] + ab[1]),
        st.tuples(children, children).map(lambda ab: ab[0] - ab[1]),
        st.tuples(children, children).map(lambda ab: ab[0] * ab[1]),
        children.map(lambda a: -a),
        children.map(lambda a: a**2),
    )


@given(st.recursive(_leaves, _grow, max_leaves=8),
       st.floats(-2, 2), st.floats(-2, 2))
def test_to_string_round_trips(e, x, y):
    back = parse(to_string(e, XY), XY)
    a, b = evaluate(e, [x, y]), evaluate(back, [x, y])
    assert a == pytest.approx(b, rel=1e-9, abs=1e-9)
