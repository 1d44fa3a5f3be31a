import random
from fractions import Fraction

import pytest

import randmodels
from randmodels import random_chart, random_point, source_model
from monofol.charts import (ChartTransition, TransitionError, classify_point, normalize_case1,
                            normalize_case2, normalize_point, pullback_model)
from monofol.foliation import ChartFrame, LocalModel
from monofol.linalg import ExpMatrix, in_row_span
from monofol.problem import parse_series
from monofol.series import RationalPowerError, Series


def uv_model(gens, B=None, v_slot=None):
    names = ["u", "v"]
    kinds = ["u", "w"] if v_slot is not None else ["u", "u"]
    div = [True, False] if v_slot is not None else [True, True]
    fr = ChartFrame(names, kinds, div, v_slot)
    k = len(fr.u_block)
    Bm = ExpMatrix(B, k) if B else ExpMatrix.empty(k)
    return LocalModel(fr, Bm, [parse_series(g, names) for g in gens], 12)


def test_pullback_monomial_map():
    md = uv_model(["u*v"])
    out = pullback_model(md, ChartTransition([0, 1], [[1, 1], [0, 1]]))
    # u = x1 x2, v = x2
    assert out.gens[0] == parse_series("u*v^2", ["u", "v"])


def test_pullback_transports_lattice():
    md = uv_model(["u"], B=[[1, 1]])
    out = pullback_model(md, ChartTransition([0, 1], [[1, 0], [1, 1]]))
    assert out.B.tolist() == [[2, 1]]


def test_pullback_identity():
    md = uv_model(["u + v^2"], B=[[1, 0]])
    out = pullback_model(md, ChartTransition.identity([0, 1]))
    assert out.gens == md.gens and out.B == md.B and out.frame.kinds == md.frame.kinds


def test_classify_examples():
    assert classify_point(ChartTransition([0, 1], [[1, 0], [0, 1]], {}, 1)) == "rank-deficient"
    # v row is the second one; the vanishing column {0} meets the u-row [1]
    t = ChartTransition([0, 1], [[1, 1], [0, 1]], {1: 1}, 1)
    assert classify_point(t) == "rank-full"
    t = ChartTransition([0, 1, 2], [[1, 1, 0], [0, 1, 0], [0, 1, 1]], {0: 1}, 2)
    assert classify_point(t) == "rank-deficient"


def test_classify_off_divisor():
    with pytest.raises(TransitionError):
        classify_point(ChartTransition([0, 1], [[1, 0], [0, 1]], {0: 1, 1: 1}, 1))


def test_case1_two_variables():
    # u = x, v = x z (chart of the (u, v) blowup keeping u), point z = 1
    md = uv_model(["u^2 + v"], v_slot=1)
    t = ChartTransition([0, 1], [[1, 0], [1, 1]], {1: 1}, 1)
    out, cls, case, z, images = normalize_point(md, t)
    names = ["u", "v"]
    assert case == "rank-full" and z == 1
    # v = x (z + 1) with the point at z = -1 of the translated coordinate
    assert images[1] == parse_series("u + u*v", names)
    assert out.gens[0] == parse_series("u + u^2 + u*v", names)
    assert out.frame.kinds[1] == "w"      # d/dz in the distribution


def test_case1_identity_when_no_translation():
    md = uv_model(["u + v"], v_slot=1)
    t = ChartTransition([0, 1], [[1, 0], [0, 1]], {}, 1)
    with pytest.raises(TransitionError):
        normalize_case1(md, t)
    out, _ = normalize_case2(md, t)
    assert out.gens == md.gens


def test_case2_v_is_monomial():
    names = ["a", "b", "v"]
    fr = ChartFrame(names, ["u", "u", "w"], [True, True, False], 2)
    md = LocalModel(fr, ExpMatrix.empty(2), [parse_series("v", names)], 12)
    t = ChartTransition([0, 1, 2], [[1, 1, 0], [1, 1, 1], [0, 1, 1]], {2: 3}, 2)
    out, cls = normalize_case2(md, t)
    assert out.gens[0] == parse_series("b", names)


def test_pullback_functorial():
    rng = random.Random(7)
    names = ["u1", "u2", "u3"]
    fr = ChartFrame(names, ["u"] * 3, [True] * 3)
    for _ in range(20):
        B = randmodels.random_lattice(rng, 3)
        md = LocalModel(fr, B, [parse_series("u1*u3 + u2^2 + u3^3", names)], 12)
        t1 = ChartTransition([0, 1, 2], random_chart(rng, 3, rng.randint(1, 2)))
        t2 = ChartTransition([0, 1, 2], random_chart(rng, 3, rng.randint(1, 2)))
        two = pullback_model(pullback_model(md, t1), t2)
        one = pullback_model(md, t1.then(t2))
        assert [g.terms for g in two.gens] == [g.terms for g in one.gens]
        assert two.B == one.B


def direct_branch(source, images, out, xi):
    """Recompute which alternative holds for u^xi from the coordinate change."""
    ub = source.frame.u_block
    m = out.frame.m
    xt = [0] * m
    U = Series.const(m, 1, 1)
    for j, x in zip(ub, xi):
        if not x:
            continue
        im = images[j]
        a = im.min_exponent()
        assert im.coefficient(a) != 0
        rest = im.divide_monomial(a)
        assert source.order - sum(a) >= 1
        U = U * (rest.truncate(1) ** x)
        xt = [p + x * q for p, q in zip(xt, a)]
    assert U.constant() != 0
    if not out.dist.is_first_integral(tuple(xt)):
        return ("not-first-integral", None)
    for s in range(m):
        if out.frame.kinds[s] == "w" and U.derivative(s).constant() != 0:
            return ("unit-derivative", s)
    return ("neither", None)


def normalized_charts(seed, count):
    rng = random.Random(seed)
    done = 0
    while done < count:
        k = rng.randint(1, 3)
        source = source_model(rng, k)
        A = random_chart(rng, k + 1, rng.randint(1, 4))
        gamma = random_point(rng, A)
        if gamma is None:
            continue
        t = ChartTransition(list(range(k + 1)), A, gamma, k)
        try:
            out, cls, case, z, images = normalize_point(source, t)
        except RationalPowerError:
            continue
        done += 1
        yield rng, source, t, out, cls, case, z, images


def test_normalized_frames_are_monomial():
    for rng, source, t, out, cls, case, z, images in normalized_charts(11, 25):
        assert out.B.nrows == source.B.nrows
        v = images[source.frame.v_slot]
        if case == "rank-full":
            # v = x^a (z - c): exactly one nonconstant factor in z
            assert out.frame.kinds[z] == "w"
        else:
            assert len(v.terms) == 1


def test_dichotomy_against_direct_computation():
    for rng, source, t, out, cls, case, z, images in normalized_charts(12, 25):
        k = len(source.frame.u_block)
        tried = 0
        while tried < 100:
            xi = tuple(rng.randint(0, 3) for _ in range(k))
            if in_row_span(list(xi), source.B):
                if not any(xi):
                    tried += 1
                continue
            tried += 1
            got = cls.classify(xi)
            assert direct_branch(source, images, out, xi) == got
