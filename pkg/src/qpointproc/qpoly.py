"""Integer-coefficient polynomials in a single formal variable ``q``."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Union

Scalar = Union[int, Fraction, float]


class QPoly:
    """Immutable polynomial with integer coefficients; ``coeffs[i]`` multiplies ``q**i``.

    Trailing zeros are stripped on construction, so the zero polynomial has
    an empty coefficient tuple.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[int] = ()):
        c = [int(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self._c = tuple(c)

    @classmethod
    def monomial(cls, k: int, coeff: int = 1) -> "QPoly":
        if k < 0:
            raise ValueError("negative exponent")
        return cls([0] * k + [coeff])

    @classmethod
    def const(cls, value: int) -> "QPoly":
        return cls([value])

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self._c

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    def is_zero(self) -> bool:
        return not self._c

    def __iter__(self):
        return iter(self._c)

    def __len__(self):
        return len(self._c)

    def __hash__(self):
        return hash(self._c)

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._c == other._c

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._c, other._c
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, x in enumerate(b):
            out[i] += x
        return QPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return QPoly(-x for x in self._c)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._c, other._c
        if not a or not b:
            return QPoly()
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return QPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result, base = QPoly([1]), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def divmod(self, divisor: "QPoly") -> tuple["QPoly", "QPoly"]:
        """Long division; requires the divisor's leading coefficient to divide each step."""
        divisor = _coerce(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self._c)
        lead = divisor._c[-1]
        dd = divisor.degree
        quot = [0] * max(len(rem) - dd, 0)
        for i in range(len(rem) - 1, dd - 1, -1):
            c = rem[i]
            if c == 0:
                continue
            if c % lead:
                raise ArithmeticError("division leaves non-integer coefficients")
            f = c // lead
            quot[i - dd] = f
            for j, d in enumerate(divisor._c):
                rem[i - dd + j] -= f * d
        return QPoly(quot), QPoly(rem)

    def exact_div(self, divisor) -> "QPoly":
        quot, rem = self.divmod(_coerce(divisor))
        if not rem.is_zero():
            raise ArithmeticError(f"{self} is not divisible by {divisor}")
        return quot

    def __truediv__(self, other):
        return self.exact_div(other)

    def __call__(self, q: Scalar) -> Scalar:
        return self.evaluate(q)

    def evaluate(self, q: Scalar) -> Scalar:
        """Horner evaluation; keeps the type of ``q`` (int, Fraction, float)."""
        acc = 0
        for c in reversed(self._c):
            acc = acc * q + c
        return acc

    def __repr__(self):
        return f"QPoly({list(self._c)})"

    def __str__(self):
        return self.to_string()

    def to_string(self, var: str = "q") -> str:
        """Ascending-power rendering, e.g. ``2q + q^2``; zero renders as ``0``."""
        terms = []
        for i, c in enumerate(self._c):
            if c == 0:
                continue
            mag = abs(c)
            if i == 0:
                body = str(mag)
            else:
                mono = var if i == 1 else f"{var}^{i}"
                body = mono if mag == 1 else f"{mag}{mono}"
            if not terms:
                terms.append(body if c > 0 else f"-{body}")
            else:
                terms.append(("+ " if c > 0 else "- ") + body)
        return " ".join(terms) if terms else "0"


Q = QPoly([0, 1])


def _coerce(x):
    if isinstance(x, QPoly):
        return x
    if isinstance(x, int):
        return QPoly([x])
    return NotImplemented
