import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qpointproc.qcalc import (
    PowerSeries,
    QContext,
    QDomainError,
    q_binomial,
    q_derivative,
    q_exp,
    q_exp_dual,
    q_factorial,
    q_falling_factorial,
    q_number,
    q_shift_identity,
)
from qpointproc.qpoly import Q, QPoly

qs = st.fractions(min_value=Fraction(1, 10), max_value=3, max_denominator=12)


def brute_q_number(n, q):
    return sum(q ** k for k in range(n))


def test_q_number_examples():
    assert q_number(3, QContext.exact(Fraction(1, 2))) == Fraction(7, 4)
    assert q_number(4, QContext.symbolic()) == 1 + Q + Q ** 2 + Q ** 3
    assert q_number(5, QContext.exact(1)) == 5
    assert q_number(0, QContext.floating(0.3)) == 0


def test_decimal_q_maps_exactly():
    assert QContext.exact(0.3).q == Fraction(3, 10)


@given(qs, st.integers(0, 25))
def test_q_number_matches_geometric_sum(q, n):
    assert q_number(n, QContext.exact(q)) == brute_q_number(n, q)


@given(qs, st.integers(1, 25))
def test_q_number_recursion(q, n):
    ctx = QContext.exact(q)
    assert q_number(n, ctx) == 1 + q * q_number(n - 1, ctx)


@given(st.integers(1, 15), st.data())
def test_shift_identity_symbolic(n, data):
    s = data.draw(st.integers(0, n - 1))
    lhs, rhs = q_shift_identity(n, s, QContext.symbolic())
    assert lhs == rhs


def test_factorials():
    ctx = QContext.exact(Fraction(1, 2))
    expected = math.prod(brute_q_number(k, Fraction(1, 2)) for k in range(1, 6))
    assert q_factorial(5, ctx) == expected
    assert q_factorial(0, ctx) == 1
    assert q_falling_factorial(6, 2, ctx) == brute_q_number(6, Fraction(1, 2)) * brute_q_number(5, Fraction(1, 2))
    with pytest.raises(QDomainError):
        q_falling_factorial(3, 4, ctx)


@given(st.integers(0, 14), st.data())
def test_binomial_symmetry_and_q1(n, data):
    k = data.draw(st.integers(0, n))
    ctx = QContext.symbolic()
    assert q_binomial(n, k, ctx) == q_binomial(n, n - k, ctx)
    assert q_binomial(n, k, QContext.exact(1)) == math.comb(n, k)


@given(st.integers(1, 10), st.data())
def test_binomial_is_factorial_ratio(n, data):
    k = data.draw(st.integers(0, n))
    q = Fraction(2, 3)
    ctx = QContext.exact(q)
    assert q_binomial(n, k, ctx) == q_factorial(n, ctx) / (q_factorial(k, ctx) * q_factorial(n - k, ctx))


@pytest.mark.parametrize("q", [0.3, 0.5, 0.9, 1.5, 2.0])
@pytest.mark.parametrize("x", [0.1, 0.5, 1.0])
def test_euler_identity(q, x):
    ctx = QContext.floating(q)
    assert abs(q_exp(x, ctx) * q_exp_dual(-x, ctx) - 1) < 1e-10


def test_classical_exponential():
    ctx = QContext.floating(1.0)
    assert q_exp(0.7, ctx) == pytest.approx(math.exp(0.7), rel=1e-14)
    assert q_exp_dual(-0.7, ctx) == pytest.approx(math.exp(-0.7), rel=1e-14)


def test_q_exp_closed_form_for_q_below_one():
    # e_q(x) = prod_k 1/(1 - (1-q) q^k x) for |x|(1-q) < 1
    q, x = 0.5, 0.8
    oracle = math.prod(1 / (1 - (1 - q) * q ** k * x) for k in range(200))
    assert q_exp(x, QContext.floating(q)) == pytest.approx(oracle, rel=1e-13)


def test_q_exp_domain():
    with pytest.raises(QDomainError):
        q_exp(2.0, QContext.floating(0.5))
    with pytest.raises(QDomainError):
        q_exp_dual(-3.0, QContext.floating(3.0))


def test_full_output_reports_terms():
    out = q_exp(0.5, QContext.floating(0.5), full_output=True)
    assert out.terms > 1
    assert out.tail_bound < 1e-13


def test_exact_backend_returns_fraction():
    assert isinstance(q_exp(Fraction(1, 4), QContext.exact(Fraction(1, 2))), Fraction)


@settings(max_examples=30)
@given(st.integers(0, 9), st.data())
def test_derivative_gives_falling_factorial(n, data):
    r = data.draw(st.integers(0, n))
    for ctx in (QContext.symbolic(), QContext.exact(Fraction(3, 2))):
        s = PowerSeries.monomial(n, ctx.scalar(1))
        for _ in range(r):
            s = q_derivative(s, ctx)
        assert s.evaluate(ctx.scalar(1)) == q_falling_factorial(n, r, ctx)


def test_derivative_at_q1_is_ordinary():
    ctx = QContext.exact(1)
    s = PowerSeries((1, 2, 3, 4), 3)
    assert q_derivative(s, ctx).coefficients[:3] == (2, 6, 12)


def test_power_series_product_truncates():
    a = PowerSeries((1, 1), 3)
    b = a * a * a * a
    assert b.order == 3
    assert b.coefficients[:4] == (1, 4, 6, 4)
