from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pharmonic.polyalg import (
    Component,
    MultiPoly,
    add,
    component_square_sum,
    evaluate,
    laplacian,
    mul,
    partial,
    radial_power,
    variables,
)

x1, x2 = variables(2)


def test_add_cancels_to_zero():
    p = add(x1 ** 2, -(x1 ** 2))
    assert p.is_zero() and len(p.terms) == 0


def test_add_examples():
    assert add(x1 ** 2, x2 ** 2) == radial_power(2, 2)
    assert add(x1 ** 2 - x2 ** 2, 2 * x2 ** 2) == x1 ** 2 + x2 ** 2


def test_mul_two_square_identity():
    a, b = x1 ** 2 - x2 ** 2, 2 * x1 * x2
    assert add(mul(a, a), mul(b, b)) == radial_power(2, 4)


def test_mul_units():
    p = x1 ** 3 - Fraction(1, 7) * x2
    assert mul(MultiPoly.constant(2, 1), p) == p
    assert mul(MultiPoly.zero(2), p).is_zero()


def test_dimension_mismatch():
    y = MultiPoly.var(3, 0)
    with pytest.raises(ValueError):
        add(x1, y)
    with pytest.raises(ValueError):
        mul(x1, y)
    with pytest.raises(ValueError):
        component_square_sum([Component.rational(x1), Component.rational(y)])


def test_partial_one_based():
    assert partial(x1 ** 2 * x2, 1) == 2 * x1 * x2
    assert partial(x1 ** 2, 2).is_zero()
    assert partial(x1 ** 2 - x2 ** 2, 1) == 2 * x1
    with pytest.raises((ValueError, IndexError)):
        partial(x1, 3)
    with pytest.raises((ValueError, IndexError)):
        partial(x1, 0)


def test_laplacian_examples():
    assert laplacian(x1 ** 2 - x2 ** 2).is_zero()
    assert laplacian(x1 ** 2 + x2 ** 2) == MultiPoly.constant(2, 4)
    assert laplacian(2 * x1 * x2).is_zero()


def test_radial_power():
    assert radial_power(2, 4) == (x1 ** 2 + x2 ** 2) ** 2
    assert radial_power(3, 0) == MultiPoly.constant(3, 1)
    assert radial_power(2, 2) == x1 ** 2 + x2 ** 2
    with pytest.raises(ValueError):
        radial_power(2, 3)


def test_evaluate():
    assert evaluate(x1 ** 2 - x2 ** 2, [1.0, 1.0]) == 0
    assert evaluate(2 * x1 * x2, [1.0, 1.0]) == 2
    assert evaluate((x1 ** 2 + x2 ** 2) ** 2, [3.0, 4.0]) == 625
    assert evaluate(x1 - x2, [Fraction(1, 3), Fraction(1, 2)]) == Fraction(-1, 6)
    with pytest.raises(ValueError):
        evaluate(x1, [1.0, 2.0, 3.0])


def test_eval_batch_matches_pointwise():
    p = x1 ** 3 - 3 * x1 * x2 ** 2 + Fraction(1, 2)
    pts = np.array([[0.3, -1.2], [2.0, 0.5], [1.0, 1.0]])
    batch = p.eval_float(pts)
    assert batch.shape == (3,)
    for row, v in zip(pts, batch):
        assert v == pytest.approx(p.eval_float(row), rel=1e-15)


def test_component_square_sum_examples():
    h = [Component.rational(x1 ** 2 - x2 ** 2), Component.rational(2 * x1 * x2)]
    assert component_square_sum(h) == radial_power(2, 4)
    assert component_square_sum([Component.rational(x1)]) == x1 ** 2
    y = variables(4)
    h43 = [
        Component.rational(y[0] ** 2 + y[1] ** 2 - y[2] ** 2 - y[3] ** 2),
        Component.rational(2 * y[0] * y[2] + 2 * y[1] * y[3]),
        Component.rational(2 * y[0] * y[3] - 2 * y[1] * y[2]),
    ]
    assert component_square_sum(h43) == radial_power(4, 4)


def test_component_radical_normalised():
    c = Component(Fraction(1, 2), 12, x1)  # sqrt(12) = 2 sqrt(3)
    assert c.radicand == 3 and c.scale == 1
    assert c.square() == 3 * x1 ** 2
    assert c.factor() == pytest.approx(3 ** 0.5)
    with pytest.raises(ValueError):
        Component(Fraction(1), 0, x1)


def test_canonical_form_and_floats_rejected():
    p = MultiPoly(2, {(1, 0): 0, (0, 1): Fraction(3, 6)})
    assert dict(p.terms) == {(0, 1): Fraction(1, 2)}
    with pytest.raises(TypeError):
        MultiPoly(2, {(1, 0): 0.5})
    with pytest.raises(ValueError):
        MultiPoly(2, {(1, 0, 0): 1})


def test_json_round_trip_big_integers():
    big = Fraction(3 ** 80, 7 ** 40)
    p = MultiPoly(3, {(2, 0, 1): big, (0, 0, 0): -1})
    assert MultiPoly.from_json(p.to_json()) == p
    c = Component(Fraction(-5, 3), 6, p)
    data = c.to_json()
    assert isinstance(data["terms"][0]["num"], str)
    back = Component.from_json(data)
    assert back == c and back.to_json() == data


def test_grlex_serialization_order():
    p = x2 + x1 ** 2 + x1 * x2 + 1
    assert [e for e, _ in p.sorted_terms()] == [(2, 0), (1, 1), (0, 1), (0, 0)]


# -- properties ------------------------------------------------------------------

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def polys(draw, nvars=3, max_deg=3, max_terms=5):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        exp = tuple(draw(st.integers(0, max_deg)) for _ in range(nvars))
        terms[exp] = draw(coeffs)
    return MultiPoly(nvars, terms)


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a.square() == a * a


@settings(max_examples=60, deadline=None)
@given(polys(), polys())
def test_laplacian_product_rule(p, q):
    cross = sum((p.partial(i) * q.partial(i) for i in range(3)), MultiPoly.zero(3))
    assert (p * q).laplacian() == q * p.laplacian() + p * q.laplacian() + 2 * cross


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), st.lists(coeffs, min_size=3, max_size=3))
def test_eval_is_ring_homomorphism(p, q, x):
    assert (p * q).eval_exact(x) == p.eval_exact(x) * q.eval_exact(x)
    assert (p + q).eval_exact(x) == p.eval_exact(x) + q.eval_exact(x)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 4),
       st.lists(st.floats(-3, 3, allow_nan=False), min_size=5, max_size=5))
def test_radial_power_values(n, k, x):
    r = radial_power(n, 2 * k)
    assert all(c > 0 for c in r.terms.values())
    pt = np.array(x[:n])
    expected = float(np.sum(pt ** 2)) ** k
    assert r.eval_float(pt) == pytest.approx(expected, rel=1e-12, abs=1e-300)
