"""q-Stirling numbers of the second kind, q-Bell numbers and the q-Dobinsky series.

The coefficients are defined by the recursion

    C(r+1, s) = q**(s-1) C(r, s-1) + [s] C(r, s),   C(1, 1) = 1,

and are always built symbolically (as :class:`QPoly`) before being evaluated
at a numeric ``q``, so the recursion never accumulates rounding error.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .qcalc import (
    QContext,
    QDomainError,
    SeriesSum,
    q_exp,
    q_falling_factorial,
    q_number,
    sum_decreasing_ratio,
)
from .qpoly import QPoly

DEFAULT_RMAX = 16


@lru_cache(maxsize=None)
def _symbolic_rows(r_max: int) -> tuple[tuple[QPoly, ...], ...]:
    # rows[r][s] for 0 <= s <= r; rows[0] is the empty-set row and unused
    rows = [(QPoly([1]),), (QPoly(), QPoly([1]))]
    for r in range(1, r_max):
        prev = rows[r]
        row = [QPoly()]
        for s in range(1, r + 2):
            left = QPoly.monomial(s - 1) * prev[s - 1] if s - 1 >= 1 else QPoly()
            right = QPoly([1] * s) * prev[s] if s <= r else QPoly()
            row.append(left + right)
        rows.append(tuple(row))
    return tuple(rows[: r_max + 1])


def stirling_poly(r: int, s: int) -> QPoly:
    """Symbolic C(r, s); zero outside ``1 <= s <= r``."""
    if r < 1 or s < 1 or s > r:
        return QPoly()
    return _symbolic_rows(max(r, DEFAULT_RMAX))[r][s]


@dataclass(frozen=True)
class StirlingTable:
    """Lower-triangular table of C(r, s), ``1 <= s <= r <= r_max``.

    ``polys`` always holds the symbolic entries; :meth:`entry` returns them
    evaluated in the table's context (unchanged for a symbolic context).
    """

    r_max: int
    ctx: QContext
    polys: tuple[tuple[QPoly, ...], ...]

    def poly(self, r: int, s: int) -> QPoly:
        if r < 1 or r > self.r_max:
            raise IndexError(f"row {r} outside 1..{self.r_max}")
        if s < 1 or s > r:
            return QPoly()
        return self.polys[r][s]

    def entry(self, r: int, s: int):
        return evaluate_poly(self.poly(r, s), self.ctx)

    def row(self, r: int) -> list:
        return [self.entry(r, s) for s in range(1, r + 1)]

    def row_sum(self, r: int):
        return evaluate_poly(sum(self.polys[r][1:], QPoly()), self.ctx)

    def rows(self):
        for r in range(1, self.r_max + 1):
            for s in range(1, r + 1):
                yield r, s, self.poly(r, s), self.entry(r, s)

    def to_csv(self, value_format=None) -> str:
        """CSV with columns ``r, s, polynomial, value`` (value empty for symbolic tables)."""
        value_format = value_format or _value_text
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "s", "polynomial", "value"])
        for r, s, p, v in self.rows():
            w.writerow([r, s, p.to_string(), "" if self.ctx.is_symbolic else value_format(v)])
        return buf.getvalue()


def _value_text(v) -> str:
    if isinstance(v, Fraction) and v.denominator == 1:
        return str(v.numerator)
    return repr(float(v))


def evaluate_poly(p: QPoly, ctx: QContext):
    if ctx.is_symbolic:
        return p
    return ctx.scalar(p.evaluate(ctx.q))


def build_stirling_table(r_max: int, ctx: QContext) -> StirlingTable:
    if r_max < 1:
        raise QDomainError("r_max must be at least 1")
    return StirlingTable(r_max, ctx, _symbolic_rows(r_max))


def q_stirling(r: int, s: int, ctx: QContext):
    """C(r, s) in the context's backend; the classical S(r, s) at ``q == 1``."""
    if s < 1 or s > r:
        raise QDomainError(f"q_stirling needs 1 <= s <= r, got r={r}, s={s}")
    return evaluate_poly(stirling_poly(r, s), ctx)


def verify_falling_expansion(r: int, N: int, ctx: QContext) -> tuple:
    """``([N]**r, sum_s C(r, s) [N][N-1]...[N-s+1])``.

    Terms with ``s > N`` are dropped: their falling factorial contains ``[0] = 0``.
    """
    if r < 1 or N < 1:
        raise QDomainError("r and N must be positive")
    lhs = q_number(N, ctx) ** r
    rhs = ctx.scalar(0)
    for s in range(1, min(r, N) + 1):
        rhs = rhs + q_stirling(r, s, ctx) * q_falling_factorial(N, s, ctx)
    return lhs, rhs


def q_bell(r: int, ctx: QContext):
    """Row sum of C(r, s) over s."""
    if r < 1:
        raise QDomainError("r must be positive")
    return evaluate_poly(sum((stirling_poly(r, s) for s in range(1, r + 1)), QPoly()), ctx)


def _power_over_factorial_terms(r: int, lam, ctx: QContext):
    # [N]**r * lam**N / [N]! for N = 1, 2, ...
    lam = ctx.scalar(lam)
    bracket = ctx.scalar(1)
    base = lam  # lam**N / [N]!
    n = 1
    while True:
        yield bracket ** r * base
        n += 1
        bracket = 1 + ctx.q * bracket if not ctx.is_classical else ctx.scalar(n)
        base = base * lam / bracket


def dobinsky_sum(r: int, lam, ctx: QContext) -> SeriesSum:
    """Truncated ``sum_{N>=1} [N]**r lam**N / [N]!``."""
    ctx = ctx.numeric()
    q = float(ctx.q)
    if q < 1 and abs(float(lam)) * (1 - q) >= 1:
        raise QDomainError(f"series diverges: lambda(1-q) = {float(lam) * (1 - q):g} >= 1")
    return sum_decreasing_ratio(_power_over_factorial_terms(r, lam, ctx), ctx)


def dobinsky_generating(r: int, lam, ctx: QContext) -> tuple:
    """``(sum_s C(r, s) lam**s,  e_q(lam)**-1 * sum_N [N]**r lam**N / [N]!)``."""
    if r < 1:
        raise QDomainError("r must be positive")
    ctx = ctx.numeric()
    lam = ctx.scalar(lam)
    lhs = ctx.scalar(0)
    for s in range(1, r + 1):
        lhs = lhs + q_stirling(r, s, ctx) * lam ** s
    rhs = dobinsky_sum(r, lam, ctx).value / q_exp(lam, ctx)
    return lhs, rhs


def q_bell_dobinsky(r: int, ctx: QContext):
    """q-Bell number from the q-Dobinsky series ``e_q(1)**-1 sum_N [N]**r / [N]!``."""
    if r < 1:
        raise QDomainError("r must be positive")
    ctx = ctx.numeric()
    one = ctx.scalar(1)
    return dobinsky_sum(r, one, ctx).value / q_exp(one, ctx)
