from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from monofol.problem import parse_series
from monofol.series import (DivergentSubstitution, NonUnitError, RationalPowerError, Series,
                            SeriesError, center_shift, format_series)

X = ["x"]
UV = ["u", "v"]


def P(text, names, order=12):
    return parse_series(text, names, order)


def to_sympy(s, names):
    syms = sympy.symbols(names)
    return sum(sympy.Rational(c.numerator, c.denominator) * sympy.prod(x ** k for x, k in zip(syms, e))
               for e, c in s.terms.items())


def sympy_truncate(expr, names, order):
    syms = sympy.symbols(names)
    poly = sympy.Poly(sympy.expand(expr), *syms)
    return sum(c * sympy.prod(x ** k for x, k in zip(syms, m))
               for m, c in poly.terms() if sum(m) <= order)


def test_mul_examples():
    assert P("1 + x", X, 5) * P("1 - x", X, 5) == P("1 - x^2", X, 5)
    assert (P("x^5", X, 5) * P("x", X, 5)).is_zero()
    # (1+x+x^2)(1-x) = 1 - x^3, truncated at 2
    assert P("1 + x + x^2", X, 2) * P("1 - x", X, 2) == P("1", X, 2)


def test_mul_result_order_is_min():
    a = P("1 + x", X, 3)
    b = P("1 + x", X, 7)
    assert (a * b).order == 3


def test_mul_frame_mismatch():
    with pytest.raises(SeriesError):
        P("x", X) * P("u", UV)


def test_invert_unit_examples():
    assert P("1 - x", X, 3).inverse() == P("1 + x + x^2 + x^3", X, 3)
    assert P("4", X, 3).inverse() == P("1/4", X, 3)
    with pytest.raises(NonUnitError):
        P("x", X, 3).inverse()


def test_unit_power_examples():
    y = ["y"]
    assert P("1 + y", y, 2).power(Fraction(1, 2)) == P("1 + 1/2*y - 1/8*y^2", y, 2)
    a = P("2 + y + y^2", y, 4)
    assert a.power(1) == a
    assert a.power(0) == P("1", y, 4)
    assert P("4 + y", y, 1).power(Fraction(1, 2)) == P("2 + 1/4*y", y, 1)


def test_unit_power_rejects_irrational_constant():
    with pytest.raises(RationalPowerError):
        P("2 + x", X, 3).power(Fraction(1, 2))
    with pytest.raises(NonUnitError):
        P("x", X, 3).power(Fraction(1, 2))


def test_unit_power_matches_sympy_binomial():
    y = sympy.Symbol("y")
    got = P("9 + 3*y", ["y"], 6).power(Fraction(-3, 2))
    ref = sympy.series((9 + 3 * y) ** sympy.Rational(-3, 2), y, 0, 7).removeO()
    assert sympy.expand(to_sympy(got, ["y"]) - ref) == 0


def test_substitute_examples():
    uw = ["x", "w"]
    a = P("x*w", uw)
    out = a.substitute([P("x^2", uw), P("w", uw)])
    assert out == P("x^2*w", uw)
    xz = ["x", "z"]
    a = P("v^2", ["v", "z"], 4)
    img = P("x*z + x", xz, 4)
    out = a.substitute([img, P("z", xz, 4)])
    assert out == P("x^2*z^2 + 2*x^2*z + x^2", xz, 4)
    shifted = P("x", ["x", "y"]).substitute([P("y + 1", ["x", "y"]), P("y", ["x", "y"])])
    assert shifted == P("y + 1", ["x", "y"])


def test_substitute_unit_into_truncated_series_is_refused():
    a = P("1 + x", X, 3).inverse()      # inexact
    with pytest.raises(DivergentSubstitution):
        a.substitute([P("1 + x", X, 3)])


def test_v_coefficients_examples():
    names = ["u", "v", "w"]
    cs = P("v^2 + u*v + w", names).v_coefficients(1)
    assert cs == [P("w", names), P("u", names), P("1", names)]
    assert P("u + w", names).v_coefficients(1) == [P("u + w", names)]
    cs = P("v^2 + 2*u*v + u^2", names).v_coefficients(1)
    assert cs == [P("u^2", names), P("2*u", names), P("1", names)]


def test_center_shift_examples():
    images, Tp = center_shift(P("v^2 + 2*u*v", UV), 1, 2)
    assert images[1] == P("v - u", UV)
    assert Tp == P("v^2 - u^2", UV)
    images, Tp = center_shift(P("v^3", UV), 1, 3)
    assert images[1] == P("v", UV)
    names = ["v", "w"]
    images, Tp = center_shift(P("v^3 + 3*w*v^2", names), 0, 3)
    assert images[0] == P("v - w", names)
    assert Tp == P("v^3 - 3*w^2*v + 2*w^3", names)


def test_center_shift_precondition():
    with pytest.raises(SeriesError):
        center_shift(P("u*v^2", UV), 1, 2)


def test_format_is_graded_lex():
    s = P("u^2 + 3 + v - 1/2*u", UV)
    assert format_series(s, UV) == "3 - 1/2*u + v + u^2"


# ---------------------------------------------------------------------------
# properties

coeff = st.integers(-3, 3).map(Fraction)


@st.composite
def series(draw, nvars=2, order=None, unit=False, maxdeg=3):
    N = order if order is not None else draw(st.integers(1, 8))
    terms = {}
    for _ in range(draw(st.integers(0, 5))):
        e = tuple(draw(st.integers(0, maxdeg)) for _ in range(nvars))
        terms[e] = draw(coeff)
    if unit:
        terms[(0,) * nvars] = draw(st.sampled_from([Fraction(1), Fraction(-1), Fraction(2), Fraction(1, 3)]))
    return Series(nvars, terms, N)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8).flatmap(lambda N: st.tuples(series(order=N), series(order=N), series(order=N))))
def test_mul_commutative_associative(abc):
    a, b, c = abc
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)


@settings(max_examples=200, deadline=None)
@given(series(unit=True))
def test_inverse_times_self_is_one(a):
    assert a * a.inverse() == Series.const(2, 1, a.order)


@settings(max_examples=60, deadline=None)
@given(series(unit=True, order=5), st.sampled_from([(1, 2), (2, 3), (-1, 3), (3, 2)]))
def test_unit_power_round_trip(a, pq):
    p, q = pq
    a = a.scale(Fraction(1) / a.constant())     # constant 1 keeps every root rational
    r = a.power(Fraction(p, q))
    assert r ** q == a ** p if p >= 0 else r ** q == a.inverse() ** (-p)


@st.composite
def monomial_map(draw, m=2):
    rows = [[draw(st.integers(0, 2)) for _ in range(m)] for _ in range(m)]
    for i in range(m):
        if not any(rows[i]):
            rows[i][i] = 1
    return rows


def apply_map(rows, order):
    m = len(rows)
    return [Series.monomial(tuple(r), 1, order) for r in rows]


@settings(max_examples=80, deadline=None)
@given(series(order=6), monomial_map(), monomial_map())
def test_substitute_respects_composition(a, f, g):
    F, G = apply_map(f, 6), apply_map(g, 6)
    composed = [im.substitute(G) for im in F]
    assert a.substitute(F).substitute(G) == a.substitute(composed)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2).flatmap(lambda i: st.tuples(st.just(i), series(nvars=3, order=8))))
def test_v_coefficients_reassemble(ia):
    i, a = ia
    parts = a.v_coefficients(i)
    total = Series.zero(3, a.order)
    for j, p in enumerate(parts):
        assert not p.involves(i)
        total = total + p * (Series.var(3, i, a.order) ** j)
    assert total == a


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 3), series(nvars=2, order=7, maxdeg=3))
def test_center_shift_kills_subleading_coefficient(nu, extra):
    # T = v^nu * (1 + ...) plus lower v-powers that vanish at the origin
    v = 1
    T = Series.var(2, v, 7) ** nu + extra.filter(lambda e: e[v] < nu and sum(e) > e[v] or e[v] < nu - 1)
    T = T + (Series.var(2, v, 7) ** (nu - 1)) * Series.var(2, 0, 7)
    _, Tp = center_shift(T, v, nu)
    cs = Tp.v_coefficients(v) + [Series.zero(2, 7)] * (nu + 1)
    assert cs[nu - 1].is_zero()
    assert cs[nu].is_unit()
