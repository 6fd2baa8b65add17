"""q-numbers, q-factorials, q-binomials, the two q-exponentials and the q-derivative.

Every function takes a :class:`QContext` that fixes the value of ``q`` and the
arithmetic backend:

* ``exact-rational`` -- ``q`` is a :class:`~fractions.Fraction`, results are
  exact integers/fractions (series are still truncated, but summed exactly);
* ``symbolic`` -- ``q`` is the formal variable and results are :class:`QPoly`;
* ``float64`` -- plain floats.

At ``q == 1`` the numeric backends dispatch to the classical formulas so no
``0/0`` is ever evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Iterable

from .qpoly import QPoly

DEFAULT_EPSILON = 1e-14
EXACT_EPSILON = 1e-26
MAX_TERMS = 10_000


class QDomainError(ValueError):
    """Raised when an argument lies outside the domain where a quantity is defined."""


class ConvergenceError(RuntimeError):
    """Raised when a series needs more terms than the configured cap."""


class Backend(str, Enum):
    EXACT = "exact-rational"
    SYMBOLIC = "symbolic"
    FLOAT = "float64"


def _to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    # decimal literal semantics: 0.3 -> 3/10, not the nearest binary fraction
    return Fraction(str(value))


@dataclass(frozen=True)
class QContext:
    """Deformation parameter plus arithmetic backend.

    Use the :meth:`exact`, :meth:`symbolic` and :meth:`floating` constructors
    rather than building instances by hand.
    """

    q: Fraction | float | None
    backend: Backend = Backend.FLOAT
    epsilon: float = DEFAULT_EPSILON
    max_terms: int = MAX_TERMS

    def __post_init__(self):
        backend = Backend(self.backend)
        object.__setattr__(self, "backend", backend)
        if backend is Backend.SYMBOLIC:
            object.__setattr__(self, "q", None)
            return
        if self.q is None:
            raise QDomainError("numeric backends need a value for q")
        q = _to_fraction(self.q) if backend is Backend.EXACT else float(self.q)
        if not q > 0 or (isinstance(q, float) and not math.isfinite(q)):
            raise QDomainError(f"q must be a positive finite number, got {self.q!r}")
        object.__setattr__(self, "q", q)
        if self.epsilon < 0:
            raise QDomainError("epsilon must be nonnegative")

    @classmethod
    def exact(cls, q, epsilon: float = EXACT_EPSILON, max_terms: int = MAX_TERMS) -> "QContext":
        return cls(q, Backend.EXACT, epsilon, max_terms)

    @classmethod
    def symbolic(cls) -> "QContext":
        return cls(None, Backend.SYMBOLIC)

    @classmethod
    def floating(cls, q, epsilon: float = DEFAULT_EPSILON, max_terms: int = MAX_TERMS) -> "QContext":
        return cls(q, Backend.FLOAT, epsilon, max_terms)

    @property
    def is_symbolic(self) -> bool:
        return self.backend is Backend.SYMBOLIC

    @property
    def is_classical(self) -> bool:
        """True for the degenerate ``q == 1`` case of a numeric backend."""
        return not self.is_symbolic and self.q == 1

    def scalar(self, value):
        """Convert a plain number into the backend's value type."""
        if self.backend is Backend.SYMBOLIC:
            if isinstance(value, QPoly):
                return value
            if isinstance(value, int) or (isinstance(value, Fraction) and value.denominator == 1):
                return QPoly.const(int(value))
            raise TypeError(f"symbolic backend holds integer polynomials only, got {value!r}")
        if self.backend is Backend.EXACT:
            return _to_fraction(value)
        return float(value)

    def power(self, k: int):
        """``q**k`` in the backend's value type."""
        if self.is_symbolic:
            return QPoly.monomial(k)
        return self.q ** k

    def numeric(self) -> "QContext":
        """A context usable for numeric series; symbolic contexts have no value of q."""
        if self.is_symbolic:
            raise TypeError("q-exponential series are numeric only; supply a value of q")
        return self


# -- q-numbers and factorials ---------------------------------------------------

def q_number(n: int, ctx: QContext):
    """``[n] = (1 - q**n) / (1 - q)``; exactly ``n`` when ``q == 1``."""
    if n < 0:
        raise QDomainError("q_number is defined for nonnegative integers")
    if ctx.is_symbolic:
        return QPoly([1] * n)
    if ctx.is_classical:
        return ctx.scalar(n)
    q = ctx.q
    return (1 - q ** n) / (1 - q)


def q_numbers(n_max: int, ctx: QContext) -> list:
    """``[[0], [1], ..., [n_max]]`` built with ``[k] = 1 + q [k-1]``."""
    out = [ctx.scalar(0)]
    if ctx.is_symbolic or ctx.is_classical:
        return [q_number(k, ctx) for k in range(n_max + 1)]
    q = ctx.q
    for _ in range(n_max):
        out.append(1 + q * out[-1])
    return out


def q_factorial(n: int, ctx: QContext):
    """``[n]! = [1][2]...[n]`` with ``[0]! = 1``."""
    return q_falling_factorial(n, n, ctx)


def q_falling_factorial(n: int, s: int, ctx: QContext):
    """``[n][n-1]...[n-s+1]``, i.e. ``[n]!/[n-s]!`` computed without division."""
    if s < 0 or n < 0:
        raise QDomainError("arguments must be nonnegative")
    if s > n:
        raise QDomainError(f"falling factorial needs s <= n, got n={n}, s={s}")
    acc = ctx.scalar(1)
    for k in range(n - s + 1, n + 1):
        acc = acc * q_number(k, ctx)
    return acc


def q_shift_identity(n: int, s: int, ctx: QContext) -> tuple:
    """Both sides of ``[n-s] = ([n] - [s]) / q**s`` for ``s < n``."""
    if not 0 <= s < n:
        raise QDomainError(f"shift identity needs 0 <= s < n, got n={n}, s={s}")
    lhs = q_number(n - s, ctx)
    diff = q_number(n, ctx) - q_number(s, ctx)
    if ctx.is_symbolic:
        rhs = diff.exact_div(QPoly.monomial(s))
    else:
        rhs = diff / ctx.power(s)
    return lhs, rhs


def q_binomial(n: int, k: int, ctx: QContext):
    """Gaussian binomial ``[n]!/([k]![n-k]!)`` via the q-Pascal rule.

    The recurrence ``[n,k] = [n-1,k-1] + q**k [n-1,k]`` avoids division so the
    symbolic backend stays polynomial.
    """
    if k < 0 or n < 0:
        raise QDomainError("arguments must be nonnegative")
    if k > n:
        raise QDomainError(f"q_binomial needs k <= n, got n={n}, k={k}")
    one, zero = ctx.scalar(1), ctx.scalar(0)
    row = [one] + [zero] * k
    for m in range(1, n + 1):
        for j in range(min(m, k), 0, -1):
            row[j] = row[j - 1] + ctx.power(j) * row[j]
    return row[k]


# -- series summation -----------------------------------------------------------

@dataclass(frozen=True)
class SeriesSum:
    """Result of a truncated series: value, number of terms used and a bound on the dropped tail."""

    value: object
    terms: int
    tail_bound: float


def _absf(x) -> float:
    return abs(float(x))


def sum_decreasing_ratio(terms: Iterable, ctx: QContext) -> SeriesSum:
    """Sum a series of nonnegative-magnitude terms whose ratios ``|t[n+1]/t[n]|`` decrease.

    Once the current ratio ``rho`` is below one the remaining tail is bounded by
    ``|t[n]| * rho / (1 - rho)``; summation stops when that bound drops under
    ``ctx.epsilon * max(1, |partial sum|)``.  Raises :class:`ConvergenceError`
    after ``ctx.max_terms`` terms.
    """
    exact = ctx.backend is Backend.EXACT
    acc = [] if not exact else None
    total = 0
    prev_mag = None
    count = 0
    for t in terms:
        count += 1
        if exact:
            total = total + t
        else:
            acc.append(float(t))
            total += float(t)
        mag = _absf(t)
        if prev_mag is not None:
            if prev_mag == 0.0:
                rho = 0.0 if mag == 0.0 else math.inf
            else:
                rho = mag / prev_mag
            if rho < 1.0:
                bound = mag * rho / (1.0 - rho)
                if bound < ctx.epsilon * max(1.0, _absf(total)):
                    value = total if exact else math.fsum(acc)
                    return SeriesSum(value, count, bound)
        prev_mag = mag
        if count >= ctx.max_terms:
            break
    raise ConvergenceError(f"series did not converge within {ctx.max_terms} terms")


def _check_exp_domain(x, ctx: QContext, dual: bool) -> None:
    q = float(ctx.q)
    ax = _absf(x)
    if not dual and q < 1 and ax * (1 - q) >= 1:
        raise QDomainError(f"e_q(x) diverges: |x|(1-q) = {ax * (1 - q):g} >= 1")
    if dual and q > 1 and ax * (q - 1) >= q:
        raise QDomainError(f"e_(1/q)(x) diverges: |x|(q-1) = {ax * (q - 1):g} >= q")


def _exp_terms(x, ctx: QContext, dual: bool):
    t = ctx.scalar(1)
    x = ctx.scalar(x)
    n = 0
    qn = ctx.scalar(1)  # q**(n-1) for the dual series
    bracket = ctx.scalar(0)
    while True:
        yield t
        n += 1
        bracket = 1 + ctx.q * bracket if not ctx.is_classical else ctx.scalar(n)
        t = t * x / bracket
        if dual:
            if n > 1:
                qn = qn * ctx.q
            t = t * qn


def q_exp(x, ctx: QContext, full_output: bool = False):
    """``e_q(x) = sum_n x**n / [n]!``.

    For ``0 < q < 1`` the series needs ``|x|(1-q) < 1``.  With
    ``full_output=True`` a :class:`SeriesSum` (value, term count, tail bound)
    is returned instead of the bare value.
    """
    ctx = ctx.numeric()
    _check_exp_domain(x, ctx, dual=False)
    res = sum_decreasing_ratio(_exp_terms(x, ctx, dual=False), ctx)
    return res if full_output else res.value


def q_exp_dual(x, ctx: QContext, full_output: bool = False):
    """``e_{1/q}(x) = sum_n q**(n(n-1)/2) x**n / [n]_q!``.

    Uses ``[n]_{1/q}! = q**(-n(n-1)/2) [n]_q!`` so the same q-numbers serve
    both exponentials.  Entire for ``q <= 1``; needs ``|x|(q-1) < q`` for ``q > 1``.
    """
    ctx = ctx.numeric()
    _check_exp_domain(x, ctx, dual=True)
    res = sum_decreasing_ratio(_exp_terms(x, ctx, dual=True), ctx)
    return res if full_output else res.value


# -- truncated power series -------------------------------------------------------

@dataclass(frozen=True)
class PowerSeries:
    """Truncated power series ``sum_n c[n] u**n`` known up to ``u**order``."""

    coefficients: tuple
    order: int = field(default=-1)

    def __post_init__(self):
        coeffs = tuple(self.coefficients)
        order = self.order if self.order >= 0 else max(len(coeffs) - 1, 0)
        if len(coeffs) > order + 1:
            raise ValueError(f"{len(coeffs)} coefficients exceed order {order}")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "order", order)

    @classmethod
    def monomial(cls, n: int, coeff=1, order: int | None = None) -> "PowerSeries":
        return cls((0,) * n + (coeff,), n if order is None else order)

    def coefficient(self, n: int):
        if n > self.order:
            raise IndexError(f"coefficient {n} lies beyond truncation order {self.order}")
        return self.coefficients[n] if n < len(self.coefficients) else 0

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        order = min(self.order, other.order)
        n = min(order + 1, max(len(self.coefficients), len(other.coefficients)))
        return PowerSeries(
            tuple(self.coefficient(i) + other.coefficient(i) for i in range(n)), order
        )

    def scale(self, factor) -> "PowerSeries":
        return PowerSeries(tuple(factor * c for c in self.coefficients), self.order)

    def __mul__(self, other: "PowerSeries") -> "PowerSeries":
        order = min(self.order, other.order)
        a, b = self.coefficients, other.coefficients
        n = min(order + 1, len(a) + len(b) - 1) if a and b else 0
        out = []
        for k in range(n):
            acc = 0
            for i in range(max(0, k - len(b) + 1), min(k, len(a) - 1) + 1):
                acc = acc + a[i] * b[k - i]
            out.append(acc)
        return PowerSeries(tuple(out), order)

    def evaluate(self, u):
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * u + c
        return acc

    def evaluate_sum(self, u: float = 1.0) -> float:
        """Float evaluation with compensated summation (useful at ``u = 1``)."""
        return math.fsum(float(c) * u ** i for i, c in enumerate(self.coefficients))


def q_derivative(series: PowerSeries, ctx: QContext) -> PowerSeries:
    """Jackson derivative in ``u``: ``D_q u**n = [n] u**(n-1)``; order drops by one."""
    if series.order < 1:
        raise ValueError("q-derivative needs a series of order >= 1")
    c = series.coefficients
    brackets = q_numbers(len(c), ctx)
    return PowerSeries(
        tuple(brackets[n + 1] * c[n + 1] for n in range(len(c) - 1)), series.order - 1
    )

